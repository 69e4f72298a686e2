#include "jamdet/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "jamdet/error.hpp"
#include "jamdet/rng.hpp"

namespace jamdet {

namespace {

constexpr int kModelFormatVersion = 1;

struct Standardized {
    std::vector<double> x;
    std::vector<BinaryLabel> y;
    double mean = 0.0;
    double scale = 1.0;
};

void require_both_classes(std::span<const FeatureRow> rows, const char* who) {
    bool normal = false;
    bool jamming = false;
    for (const auto& r : rows) {
        if (!std::isfinite(r.rmse)) throw DomainError(std::string(who) + ": non-finite feature");
        (r.label == BinaryLabel::Jamming ? jamming : normal) = true;
    }
    if (!normal || !jamming) throw ConfigError(std::string(who) + ": training data must contain both classes");
}

Standardized standardize(std::span<const FeatureRow> rows) {
    Standardized s;
    s.x.reserve(rows.size());
    for (const auto& r : rows) {
        s.x.push_back(r.rmse);
        s.y.push_back(r.label);
    }
    const double n = static_cast<double>(rows.size());
    s.mean = std::accumulate(s.x.begin(), s.x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : s.x) var += (v - s.mean) * (v - s.mean);
    s.scale = std::sqrt(var / n);
    if (!(s.scale > 0.0)) s.scale = 1.0;
    for (double& v : s.x) v = (v - s.mean) / s.scale;
    return s;
}

// Maps w * (x - mean) / scale + b back to raw-feature coefficients.
void unstandardize(const Standardized& s, double w, double b, ClassifierModel& model) {
    model.weight = w / s.scale;
    model.bias = b - w * s.mean / s.scale;
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

const char* to_string(ClassifierKind kind) noexcept {
    switch (kind) {
        case ClassifierKind::Threshold: return "threshold";
        case ClassifierKind::LogisticRegression: return "logreg";
        case ClassifierKind::LinearSvm: return "svm";
    }
    return "?";
}

ClassifierKind parse_classifier_kind(const std::string& name) {
    if (name == "threshold") return ClassifierKind::Threshold;
    if (name == "logreg" || name == "logistic") return ClassifierKind::LogisticRegression;
    if (name == "svm") return ClassifierKind::LinearSvm;
    throw ConfigError("classifier: unknown kind '" + name + "' (expected threshold, logreg or svm)");
}

std::optional<double> ClassifierModel::boundary() const noexcept {
    if (weight == 0.0) return std::nullopt;
    return -bias / weight;
}

ClassifierModel fit_threshold(std::span<const FeatureRow> rows) {
    require_both_classes(rows, "fit_threshold");

    std::vector<std::pair<double, BinaryLabel>> sorted;
    sorted.reserve(rows.size());
    for (const auto& r : rows) sorted.emplace_back(r.rmse, r.label);
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const std::size_t n = sorted.size();
    std::size_t jam_total = 0;
    for (const auto& [x, y] : sorted) jam_total += (y == BinaryLabel::Jamming);
    const std::size_t normal_total = n - jam_total;

    std::size_t best_correct = 0;
    double best_t = 0.0;
    double best_w = 0.0;
    bool have = false;
    std::size_t jam_below = 0;
    std::size_t normal_below = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        if (i > 0) (sorted[i - 1].second == BinaryLabel::Jamming ? jam_below : normal_below) += 1;
        if (i > 0 && i < n && !(sorted[i - 1].first < sorted[i].first)) continue;

        double t;
        if (i == 0)
            t = sorted.front().first - 1.0;
        else if (i == n)
            t = sorted.back().first + 1.0;
        else
            t = 0.5 * (sorted[i - 1].first + sorted[i].first);

        // Jamming above the threshold, then Jamming below it
        const std::size_t above = normal_below + (jam_total - jam_below);
        const std::size_t below = jam_below + (normal_total - normal_below);
        if (!have || above > best_correct) {
            best_correct = above;
            best_t = t;
            best_w = 1.0;
            have = true;
        }
        if (below > best_correct) {
            best_correct = below;
            best_t = t;
            best_w = -1.0;
        }
    }

    ClassifierModel m;
    m.kind = ClassifierKind::Threshold;
    m.weight = best_w;
    m.bias = -best_w * best_t;
    m.summary.iterations = 1;
    m.summary.loss = 1.0 - static_cast<double>(best_correct) / static_cast<double>(n);
    return m;
}

LogisticObjective logistic_objective(double weight, double bias, std::span<const double> x, std::span<const double> y,
                                     double l2) {
    if (x.size() != y.size() || x.empty()) throw DomainError("logistic_objective: x and y must be equal, non-empty");
    LogisticObjective out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = weight * x[i] + bias;
        out.loss += softplus(z) - y[i] * z;
        const double r = sigmoid(z) - y[i];
        out.grad_weight += r * x[i];
        out.grad_bias += r;
    }
    const double n = static_cast<double>(x.size());
    out.loss = out.loss / n + 0.5 * l2 * weight * weight;
    out.grad_weight = out.grad_weight / n + l2 * weight;
    out.grad_bias /= n;
    return out;
}

ClassifierModel fit_logistic(std::span<const FeatureRow> rows, const LogisticHyper& hyper) {
    require_both_classes(rows, "fit_logistic");
    if (!(hyper.lr > 0.0)) throw ConfigError("fit_logistic: lr must be > 0");
    if (hyper.epochs < 1) throw ConfigError("fit_logistic: epochs must be >= 1");
    if (hyper.l2 < 0.0) throw ConfigError("fit_logistic: l2 must be >= 0");

    const Standardized s = standardize(rows);
    std::vector<double> y(s.y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = s.y[i] == BinaryLabel::Jamming ? 1.0 : 0.0;

    double w = 0.0;
    double b = 0.0;
    ClassifierModel m;
    m.kind = ClassifierKind::LogisticRegression;
    LogisticObjective obj = logistic_objective(w, b, s.x, y, hyper.l2);
    int epoch = 0;
    for (; epoch < hyper.epochs; ++epoch) {
        w -= hyper.lr * obj.grad_weight;
        b -= hyper.lr * obj.grad_bias;
        const LogisticObjective next = logistic_objective(w, b, s.x, y, hyper.l2);
        const double change = std::abs(next.loss - obj.loss);
        obj = next;
        if (change < 1e-8) {
            ++epoch;
            break;
        }
    }
    unstandardize(s, w, b, m);
    m.summary.iterations = epoch;
    m.summary.loss = obj.loss;
    return m;
}

double svm_objective(double weight, double bias, std::span<const double> x, std::span<const double> y, double lambda) {
    if (x.size() != y.size() || x.empty()) throw DomainError("svm_objective: x and y must be equal, non-empty");
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) hinge += std::max(0.0, 1.0 - y[i] * (weight * x[i] + bias));
    return 0.5 * lambda * weight * weight + hinge / static_cast<double>(x.size());
}

ClassifierModel fit_linear_svm(std::span<const FeatureRow> rows, const SvmHyper& hyper) {
    require_both_classes(rows, "fit_linear_svm");
    if (!(hyper.lr > 0.0)) throw ConfigError("fit_linear_svm: lr must be > 0");
    if (!(hyper.c > 0.0)) throw ConfigError("fit_linear_svm: C must be > 0");
    if (hyper.epochs < 1) throw ConfigError("fit_linear_svm: epochs must be >= 1");

    const Standardized s = standardize(rows);
    const std::size_t n = s.x.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = s.y[i] == BinaryLabel::Jamming ? 1.0 : -1.0;
    const double lambda = 1.0 / (hyper.c * static_cast<double>(n));

    Rng rng = make_rng(hyper.seed, {stream::svm});
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    double w = 0.0;
    double b = 0.0;
    double w_avg = 0.0;
    double b_avg = 0.0;
    double t = 0.0;

    ClassifierModel m;
    m.kind = ClassifierKind::LinearSvm;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            const double eta = hyper.lr / (1.0 + hyper.lr * lambda * t);
            const double margin = y[i] * (w * s.x[i] + b);
            w -= eta * lambda * w;
            if (margin < 1.0) {
                w += eta * y[i] * s.x[i];
                b += eta * y[i];
            }
            t += 1.0;
            w_avg += (w - w_avg) / t;
            b_avg += (b - b_avg) / t;
        }
        m.summary.objective_history.push_back(svm_objective(w_avg, b_avg, s.x, y, lambda));
    }
    unstandardize(s, w_avg, b_avg, m);
    m.summary.iterations = hyper.epochs;
    m.summary.loss = m.summary.objective_history.back();
    return m;
}

ModelFactory make_model_factory(ClassifierKind kind, const LogisticHyper& logistic, const SvmHyper& svm) {
    switch (kind) {
        case ClassifierKind::Threshold: return [](std::span<const FeatureRow> rows) { return fit_threshold(rows); };
        case ClassifierKind::LogisticRegression:
            return [logistic](std::span<const FeatureRow> rows) { return fit_logistic(rows, logistic); };
        case ClassifierKind::LinearSvm:
            return [svm](std::span<const FeatureRow> rows) { return fit_linear_svm(rows, svm); };
    }
    throw ConfigError("make_model_factory: unknown classifier kind");
}

std::string model_to_json(const ClassifierModel& model) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = to_string(model.kind);
    j["weight"] = model.weight;
    j["bias"] = model.bias;
    if (auto t = model.boundary()) j["boundary"] = *t;
    j["summary"] = {{"iterations", model.summary.iterations},
                    {"loss", model.summary.loss},
                    {"objective_history", model.summary.objective_history}};
    return j.dump(2);
}

ClassifierModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model: malformed JSON: ") + e.what());
    }
    const int version = j.value("format_version", -1);
    if (version != kModelFormatVersion)
        throw ConfigError("model: format version mismatch (expected " + std::to_string(kModelFormatVersion) +
                          ", found " + std::to_string(version) + ")");
    try {
        ClassifierModel m;
        m.kind = parse_classifier_kind(j.at("kind").get<std::string>());
        m.weight = j.at("weight").get<double>();
        m.bias = j.at("bias").get<double>();
        const auto& s = j.at("summary");
        m.summary.iterations = s.at("iterations").get<int>();
        m.summary.loss = s.at("loss").get<double>();
        m.summary.objective_history = s.value("objective_history", std::vector<double>{});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

}  // namespace jamdet
