#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jamdet/classifier.hpp"

namespace jamdet {

struct ClassMetrics {
    double precision = 0.0;  // 0 when the class is never predicted
    double recall = 0.0;     // 0 when the class has no support
    double f1 = 0.0;
    std::size_t support = 0;
};

struct EvalReport {
    // confusion[actual][predicted], indexed by BinaryLabel
    std::array<std::array<std::size_t, 2>, 2> confusion{};
    double accuracy = 0.0;
    std::array<ClassMetrics, 2> per_class{};
    std::size_t total = 0;
};

EvalReport report_from_confusion(const std::array<std::array<std::size_t, 2>, 2>& confusion);

/// Throws ConfigError on empty input.
EvalReport evaluate(const ClassifierModel& model, std::span<const FeatureRow> rows);

std::string report_to_json(const EvalReport& report);
std::string format_report(const EvalReport& report);

/// Spearman rank correlation with average ranks for ties. NaN when either
/// input is constant.
double spearman(std::span<const double> a, std::span<const double> b);

// --- accuracy sweeps over jammer distance x power ratio x BS distance ---

struct SweepAxes {
    std::vector<double> bs_distances_m{30.0, 90.0, 350.0};
    std::vector<double> jammer_distances_m{10.0, 30.0, 90.0, 200.0, 350.0};
    std::vector<double> power_ratios{1.0, 2.0, 5.0, 10.0, 20.0};
};

struct SweepConfig {
    SweepAxes axes;
    double train_fraction = 0.7;
    std::uint64_t seed = 1;
    std::optional<double> fix_power_ratio;
    std::optional<double> fix_jammer_distance_m;
    std::optional<double> fix_bs_distance_m;
};

struct SweepCell {
    double bs_distance_m = 0.0;
    double jammer_distance_m = 0.0;
    double power_ratio = 0.0;
    std::optional<double> accuracy;  // empty when the cell has no usable data
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

struct SweepResult {
    std::vector<SweepCell> cells;

    /// Mean over evaluated cells; NaN if none.
    double mean_accuracy() const;
    std::size_t evaluated_cells() const;
    /// Rows = (bs distance, jammer distance), columns = power ratios; "NA" for missing cells.
    std::string to_csv() const;
    std::string to_json() const;
};

/// Scenario-level split: each (label, channel quality, grid cell) stratum is
/// shuffled by a seeded hash and its first round(train_fraction * count)
/// scenarios go to training (at least one on each side when the stratum has
/// two or more; a lone scenario goes to training with probability
/// train_fraction). Returns per-row membership.
std::vector<bool> split_by_scenario(std::span<const FeatureRow> rows, double train_fraction, std::uint64_t seed);

/// Per cell: jamming triples of that cell plus an equal number of normal
/// triples at the same BS distance, split by scenario, trained with
/// `factory` and evaluated on the held-out scenarios.
SweepResult sweep_accuracy(std::span<const FeatureRow> rows, const ModelFactory& factory, const SweepConfig& config);

}  // namespace jamdet
