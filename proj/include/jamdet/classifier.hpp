#pragma once

// One-dimensional binary classifiers over the RMSE feature. All three share
// the decision rule: Jamming iff weight * rmse + bias > 0.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jamdet/detector.hpp"

namespace jamdet {

enum class ClassifierKind : std::uint8_t { Threshold, LogisticRegression, LinearSvm };

const char* to_string(ClassifierKind kind) noexcept;
/// Accepts "threshold", "logreg"/"logistic", "svm". Throws ConfigError otherwise.
ClassifierKind parse_classifier_kind(const std::string& name);

struct TrainingSummary {
    int iterations = 0;
    double loss = 0.0;  // final training objective (1 - accuracy for the threshold model)
    std::vector<double> objective_history;
};

struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::Threshold;
    double weight = 0.0;
    double bias = 0.0;
    TrainingSummary summary;

    double decision(double rmse) const noexcept { return weight * rmse + bias; }
    BinaryLabel predict(double rmse) const noexcept {
        return decision(rmse) > 0.0 ? BinaryLabel::Jamming : BinaryLabel::Normal;
    }
    /// Feature value where the decision flips; nullopt for a constant model.
    std::optional<double> boundary() const noexcept;
};

/// Optimal training-accuracy split at the midpoint between neighbouring
/// feature values; ties go to the lowest threshold. Throws ConfigError when
/// either class is missing.
ClassifierModel fit_threshold(std::span<const FeatureRow> rows);

struct LogisticHyper {
    double lr = 0.5;
    int epochs = 5000;
    double l2 = 1e-6;
};

struct LogisticObjective {
    double loss = 0.0;
    double grad_weight = 0.0;
    double grad_bias = 0.0;
};

/// Mean log-loss + (l2 / 2) * w^2 with y in {0, 1} and its gradient.
LogisticObjective logistic_objective(double weight, double bias, std::span<const double> x, std::span<const double> y,
                                     double l2);

/// Full-batch gradient descent on the standardized feature; stops when the
/// loss changes by less than 1e-8.
ClassifierModel fit_logistic(std::span<const FeatureRow> rows, const LogisticHyper& hyper = {});

struct SvmHyper {
    double c = 1.0;
    int epochs = 50;
    double lr = 0.5;
    std::uint64_t seed = 1;
};

/// (lambda / 2) * w^2 + mean hinge loss with lambda = 1 / (C * n), y in {-1, +1}.
double svm_objective(double weight, double bias, std::span<const double> x, std::span<const double> y, double lambda);

/// Averaged stochastic subgradient descent on the standardized feature.
ClassifierModel fit_linear_svm(std::span<const FeatureRow> rows, const SvmHyper& hyper = {});

using ModelFactory = std::function<ClassifierModel(std::span<const FeatureRow>)>;

ModelFactory make_model_factory(ClassifierKind kind, const LogisticHyper& logistic = {}, const SvmHyper& svm = {});

/// JSON (kind, parameters, training summary) with a format version.
std::string model_to_json(const ClassifierModel& model);
/// Throws ConfigError on malformed JSON or a version mismatch.
ClassifierModel model_from_json(const std::string& text);

}  // namespace jamdet
