#include "jamdet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "jamdet/error.hpp"
#include "jamdet/rng.hpp"

namespace jamdet {

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

// Bucket index of v on an axis, matching within a relative tolerance.
std::optional<std::size_t> bucket(const std::vector<double>& axis, double v) {
    for (std::size_t i = 0; i < axis.size(); ++i)
        if (std::abs(v - axis[i]) <= 1e-3 * std::max(1.0, std::abs(axis[i]))) return i;
    return std::nullopt;
}

long long key(double v) { return std::llround(v * 1000.0); }

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::uint64_t row_hash(std::uint64_t seed, std::uint64_t salt, const FeatureRow& r) {
    return substream_seed(seed, {stream::split, salt, r.meta.scenario_id, r.meta.triple_index});
}

}  // namespace

EvalReport report_from_confusion(const std::array<std::array<std::size_t, 2>, 2>& confusion) {
    EvalReport r;
    r.confusion = confusion;
    r.total = confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
    if (r.total == 0) throw ConfigError("evaluate: no samples");
    r.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) / static_cast<double>(r.total);
    for (int c = 0; c < 2; ++c) {
        auto& m = r.per_class[c];
        const std::size_t tp = confusion[c][c];
        const std::size_t predicted = confusion[0][c] + confusion[1][c];
        m.support = confusion[c][0] + confusion[c][1];
        m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        m.recall = m.support ? static_cast<double>(tp) / static_cast<double>(m.support) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    }
    return r;
}

EvalReport evaluate(const ClassifierModel& model, std::span<const FeatureRow> rows) {
    if (rows.empty()) throw ConfigError("evaluate: no rows");
    std::array<std::array<std::size_t, 2>, 2> confusion{};
    for (const auto& row : rows)
        ++confusion[static_cast<int>(row.label)][static_cast<int>(model.predict(row.rmse))];
    return report_from_confusion(confusion);
}

std::string report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["total"] = r.total;
    j["accuracy"] = r.accuracy;
    j["confusion"] = {{"labels", {"Normal", "Jamming"}},
                      {"matrix", {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}}}};
    for (int c = 0; c < 2; ++c) {
        const auto& m = r.per_class[c];
        j["classes"][to_string(static_cast<BinaryLabel>(c))] = {
            {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
    }
    return j.dump(2);
}

std::string format_report(const EvalReport& r) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %10s\n", "", "precision", "recall", "f1-score", "support");
    os << line;
    for (int c = 0; c < 2; ++c) {
        const auto& m = r.per_class[c];
        std::snprintf(line, sizeof line, "%-10s %10.4f %10.4f %10.4f %10zu\n", to_string(static_cast<BinaryLabel>(c)),
                      m.precision, m.recall, m.f1, m.support);
        os << line;
    }
    std::snprintf(line, sizeof line, "\naccuracy %.4f over %zu samples\n", r.accuracy, r.total);
    os << line;
    std::snprintf(line, sizeof line, "confusion (rows actual, cols predicted)\n%-10s %10s %10s\n", "", "Normal",
                  "Jamming");
    os << line;
    for (int c = 0; c < 2; ++c) {
        std::snprintf(line, sizeof line, "%-10s %10zu %10zu\n", to_string(static_cast<BinaryLabel>(c)),
                      r.confusion[c][0], r.confusion[c][1]);
        os << line;
    }
    return os.str();
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw DomainError("spearman: need two equal-length series (n >= 2)");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

double SweepResult::mean_accuracy() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells)
        if (c.accuracy) {
            sum += *c.accuracy;
            ++n;
        }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

std::size_t SweepResult::evaluated_cells() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) {
        return c.accuracy.has_value();
    }));
}

std::string SweepResult::to_csv() const {
    std::vector<double> powers;
    std::vector<std::pair<double, double>> distances;
    for (const auto& c : cells) {
        if (std::find(powers.begin(), powers.end(), c.power_ratio) == powers.end()) powers.push_back(c.power_ratio);
        const std::pair<double, double> d{c.bs_distance_m, c.jammer_distance_m};
        if (std::find(distances.begin(), distances.end(), d) == distances.end()) distances.push_back(d);
    }
    std::ostringstream os;
    os << "bs_distance_m,jammer_distance_m";
    for (double p : powers) os << ",pr_" << fmt(p, "%g");
    os << '\n';
    for (const auto& [bs, jd] : distances) {
        os << fmt(bs, "%g") << ',' << fmt(jd, "%g");
        for (double p : powers) {
            os << ',';
            auto it = std::find_if(cells.begin(), cells.end(), [&](const SweepCell& c) {
                return c.bs_distance_m == bs && c.jammer_distance_m == jd && c.power_ratio == p;
            });
            if (it != cells.end() && it->accuracy)
                os << fmt(*it->accuracy);
            else
                os << "NA";
        }
        os << '\n';
    }
    return os.str();
}

std::string SweepResult::to_json() const {
    nlohmann::json j;
    const double mean = mean_accuracy();
    j["mean_accuracy"] = std::isnan(mean) ? nlohmann::json(nullptr) : nlohmann::json(mean);
    j["evaluated_cells"] = evaluated_cells();
    j["cells"] = nlohmann::json::array();
    for (const auto& c : cells) {
        nlohmann::json cell = {{"bs_distance_m", c.bs_distance_m},
                               {"jammer_distance_m", c.jammer_distance_m},
                               {"power_ratio", c.power_ratio},
                               {"train_rows", c.train_rows},
                               {"test_rows", c.test_rows}};
        cell["accuracy"] = c.accuracy ? nlohmann::json(*c.accuracy) : nlohmann::json(nullptr);
        j["cells"].push_back(cell);
    }
    return j.dump(2);
}

std::vector<bool> split_by_scenario(std::span<const FeatureRow> rows, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("split: train_fraction must lie in (0, 1)");

    using Stratum = std::tuple<int, int, long long, long long, long long>;
    std::map<Stratum, std::vector<std::uint32_t>> strata;
    std::map<std::uint32_t, Stratum> scenario_stratum;
    for (const auto& r : rows) {
        if (scenario_stratum.count(r.meta.scenario_id)) continue;
        const Stratum s{static_cast<int>(r.label), static_cast<int>(r.meta.quality), key(r.meta.bs_distance_m),
                        key(r.meta.jammer_distance_m), key(r.meta.power_ratio)};
        scenario_stratum[r.meta.scenario_id] = s;
        strata[s].push_back(r.meta.scenario_id);
    }

    std::map<std::uint32_t, bool> in_train;
    for (auto& [s, ids] : strata) {
        std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
            const auto ha = substream_seed(seed, {stream::split, a});
            const auto hb = substream_seed(seed, {stream::split, b});
            return ha != hb ? ha < hb : a < b;
        });
        std::size_t n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ids.size())));
        if (ids.size() >= 2) {
            n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
        } else {
            // a lone scenario goes to training with probability train_fraction
            const double u = static_cast<double>(substream_seed(seed, {stream::split, ids[0], 1}) >> 11) * 0x1.0p-53;
            n_train = u < train_fraction ? 1 : 0;
        }
        for (std::size_t i = 0; i < ids.size(); ++i) in_train[ids[i]] = i < n_train;
    }

    std::vector<bool> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = in_train[rows[i].meta.scenario_id];
    return out;
}

SweepResult sweep_accuracy(std::span<const FeatureRow> rows, const ModelFactory& factory, const SweepConfig& config) {
    const auto& axes = config.axes;
    if (axes.bs_distances_m.empty() || axes.jammer_distances_m.empty() || axes.power_ratios.empty())
        throw ConfigError("sweep: every axis needs at least one bucket");

    const std::vector<bool> train = split_by_scenario(rows, config.train_fraction, config.seed);

    auto matches_fix = [](const std::optional<double>& fix, double v) {
        return !fix || std::abs(*fix - v) <= 1e-9 * std::max(1.0, std::abs(v));
    };

    SweepResult result;
    std::uint64_t cell_index = 0;
    for (std::size_t bi = 0; bi < axes.bs_distances_m.size(); ++bi) {
        const double bs = axes.bs_distances_m[bi];
        if (!matches_fix(config.fix_bs_distance_m, bs)) continue;

        // normal pools at this BS distance
        std::vector<std::size_t> normal_train, normal_test;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.label != BinaryLabel::Normal || bucket(axes.bs_distances_m, r.meta.bs_distance_m) != bi) continue;
            (train[i] ? normal_train : normal_test).push_back(i);
        }

        for (std::size_t ji = 0; ji < axes.jammer_distances_m.size(); ++ji) {
            const double jd = axes.jammer_distances_m[ji];
            if (!matches_fix(config.fix_jammer_distance_m, jd)) continue;
            for (std::size_t pi = 0; pi < axes.power_ratios.size(); ++pi) {
                const double pr = axes.power_ratios[pi];
                if (!matches_fix(config.fix_power_ratio, pr)) continue;
                ++cell_index;

                std::vector<std::size_t> jam_train, jam_test;
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    const auto& r = rows[i];
                    if (r.label != BinaryLabel::Jamming) continue;
                    if (bucket(axes.bs_distances_m, r.meta.bs_distance_m) != bi ||
                        bucket(axes.jammer_distances_m, r.meta.jammer_distance_m) != ji ||
                        bucket(axes.power_ratios, r.meta.power_ratio) != pi)
                        continue;
                    (train[i] ? jam_train : jam_test).push_back(i);
                }

                // balanced, deterministic subsets of both classes
                auto pick = [&](std::vector<std::size_t> a, std::vector<std::size_t> b) {
                    auto order = [&](std::vector<std::size_t>& v) {
                        std::sort(v.begin(), v.end(), [&](std::size_t x, std::size_t y) {
                            const auto hx = row_hash(config.seed, cell_index, rows[x]);
                            const auto hy = row_hash(config.seed, cell_index, rows[y]);
                            return hx != hy ? hx < hy : x < y;
                        });
                    };
                    order(a);
                    order(b);
                    const std::size_t n = std::min(a.size(), b.size());
                    std::vector<FeatureRow> out;
                    for (std::size_t i = 0; i < n; ++i) {
                        out.push_back(rows[a[i]]);
                        out.push_back(rows[b[i]]);
                    }
                    return out;
                };

                SweepCell cell{bs, jd, pr, std::nullopt, 0, 0};
                const auto train_rows = pick(jam_train, normal_train);
                const auto test_rows = pick(jam_test, normal_test);
                cell.train_rows = train_rows.size();
                cell.test_rows = test_rows.size();
                if (!train_rows.empty() && !test_rows.empty()) {
                    try {
                        const ClassifierModel model = factory(train_rows);
                        cell.accuracy = evaluate(model, test_rows).accuracy;
                    } catch (const ConfigError&) {
                        // left missing
                    }
                }
                result.cells.push_back(cell);
            }
        }
    }
    return result;
}

}  // namespace jamdet
