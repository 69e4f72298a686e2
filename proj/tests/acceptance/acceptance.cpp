// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here, not tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jamdet/channel_sim.hpp"
#include "jamdet/classifier.hpp"
#include "jamdet/detector.hpp"
#include "jamdet/evaluation.hpp"
#include "jamdet/jamdet.h"
#include "jamdet/stl.hpp"

using namespace jamdet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* spec, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, spec, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Streams a generated dataset through triple building and feature extraction,
// a batch of scenarios at a time, without holding all blocks in memory.
std::vector<FeatureRow> stream_features(const DatasetSpec& spec) {
    const auto scenarios = plan_scenarios(spec);
    const StlParams params = triple_stl_params(spec.fft_size);
    std::vector<FeatureRow> rows;
    std::vector<ResourceBlock> pending;
    std::size_t failures = 0;

    auto flush = [&] {
        if (pending.empty()) return;
        const TripleSet set = make_triples(pending, scenarios);
        FeatureBatch batch = extract_features(set.samples, params, 0);
        failures += batch.failures.size();
        rows.insert(rows.end(), batch.rows.begin(), batch.rows.end());
        pending.clear();
    };
    std::size_t in_batch = 0;
    for (const auto& s : scenarios) {
        for (std::uint32_t b = 0; b < s.block_count; ++b) pending.push_back(synthesize_block(s, b));
        if (++in_batch == 256) {
            flush();
            in_batch = 0;
        }
    }
    flush();
    if (failures) std::fprintf(stderr, "note: %zu triples could not be scored\n", failures);
    return rows;
}

// --- Table I: mean power difference (jammed minus unjammed) --------------

Outcome table_one() {
    const auto t0 = Clock::now();
    DatasetSpec spec;
    spec.total_blocks = 40000;  // 10,000 blocks per class
    spec.bs_distances_m = {30.0};
    spec.jammer_distances_m = {30.0};
    spec.power_ratios = {1.0};
    spec.seed = 2024;
    const Dataset ds = generate_dataset(spec);
    const MeanPowerDifference d = mean_power_difference(ds.blocks);
    const double secs = seconds_since(t0);

    const std::size_t pairs = std::min(d.good_pairs, d.bad_pairs);
    const bool good_ok = std::abs(d.good_db - 4.189) <= 1.0;
    const bool bad_ok = std::abs(d.bad_db - 0.592) <= 0.5;
    const bool order_ok = d.good_db > d.bad_db;
    const bool time_ok = secs < 120.0;
    return {good_ok && bad_ok && order_ok && time_ok && pairs >= 10000,
            fmt("Good %.3f dB (want 4.189 +/- 1) [%s]; Bad %.3f dB (want 0.592 +/- 0.5) [%s]; Good > Bad [%s]; "
                "%zu pairs per class; %.1f s (< 120)",
                d.good_db, good_ok ? "ok" : "out", d.bad_db, bad_ok ? "ok" : "out", order_ok ? "ok" : "no", pairs,
                secs)};
}

// --- peak cell accuracy ----------------------------------------------------

double cell_accuracy(const std::vector<FeatureRow>& rows, ClassifierKind kind, SweepCell* cell_out = nullptr) {
    SweepConfig cfg;
    cfg.axes.bs_distances_m = {90.0};
    cfg.axes.jammer_distances_m = {30.0};
    cfg.axes.power_ratios = {5.0};
    const SweepResult r = sweep_accuracy(rows, make_model_factory(kind), cfg);
    if (cell_out) *cell_out = r.cells.at(0);
    return r.cells.at(0).accuracy.value_or(std::nan(""));
}

Outcome peak_accuracy() {
    const auto t0 = Clock::now();
    DatasetSpec spec;
    spec.total_blocks = 14000;  // 7,000 jammed blocks -> ~2,333 jammed triples
    spec.bs_distances_m = {90.0};
    spec.jammer_distances_m = {30.0};
    spec.power_ratios = {5.0};
    spec.seed = 31;
    const auto rows = stream_features(spec);

    SweepCell cell;
    const double acc = cell_accuracy(rows, ClassifierKind::LinearSvm, &cell);
    const double thr_acc = cell_accuracy(rows, ClassifierKind::Threshold);
    const double secs = seconds_since(t0);

    const std::size_t jammed = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const FeatureRow& r) { return r.label == BinaryLabel::Jamming; }));
    const bool ok = std::abs(acc - 0.8438) <= 0.05 && jammed >= 2000 && secs < 600.0;
    std::printf("INFO peak cell: threshold classifier %.4f on the same split (SVM - threshold = %+.2f pp)\n", thr_acc,
                100.0 * (acc - thr_acc));
    return {ok, fmt("SVM accuracy %.2f%% (want 84.38 +/- 5 pp); %zu jammed triples, %zu train / %zu test rows; %.1f s",
                    100.0 * acc, jammed, cell.train_rows, cell.test_rows, secs)};
}

// The STL spans are not pinned by the detector's definition; report how the
// peak cell responds to the main alternatives (informational only).
void report_stl_variants() {
    DatasetSpec spec;
    spec.total_blocks = 4800;
    spec.bs_distances_m = {90.0};
    spec.jammer_distances_m = {30.0};
    spec.power_ratios = {5.0};
    spec.seed = 32;
    const Dataset ds = generate_dataset(spec);
    const TripleSet triples = make_triples(ds.blocks, ds.scenarios);

    struct Variant {
        const char* name;
        std::function<void(StlParams&)> edit;
    };
    const std::vector<Variant> variants{
        {"default", [](StlParams&) {}},
        {"trend_span=513", [](StlParams& p) { p.trend_span = 513; }},
        {"trend_span=257", [](StlParams& p) { p.trend_span = 257; }},
        {"seasonal_degree=1,seasonal_span=7", [](StlParams& p) { p.seasonal_degree = 1, p.seasonal_span = 7; }},
        {"outer_iterations=1", [](StlParams& p) { p.outer_iterations = 1; }},
    };
    for (const auto& v : variants) {
        StlParams p = triple_stl_params(spec.fft_size);
        v.edit(p);
        const FeatureBatch batch = extract_features(triples.samples, p, 0);
        std::printf("INFO STL variant %-34s peak-cell SVM accuracy %.4f (%zu triples)\n", v.name,
                    cell_accuracy(batch.rows, ClassifierKind::LinearSvm), batch.rows.size());
    }
}

// --- full grid: overall mean and trends -----------------------------------

struct GridRun {
    SweepResult result;
    std::size_t min_cell_triples = 0;
    double seconds = 0.0;
};

const GridRun& grid_run() {
    static const GridRun run = [] {
        const auto t0 = Clock::now();
        DatasetSpec spec;
        // 23,000 blocks per class -> at least 68 jammed scenarios (204 triples) per cell
        spec.total_blocks = 92000;
        spec.seed = 77;
        const auto rows = stream_features(spec);

        std::map<std::tuple<double, double, double>, std::size_t> per_cell;
        for (const auto& r : rows)
            if (r.label == BinaryLabel::Jamming)
                ++per_cell[{std::round(r.meta.bs_distance_m), std::round(r.meta.jammer_distance_m),
                            r.meta.power_ratio}];
        GridRun g;
        g.min_cell_triples = per_cell.empty() ? 0 : SIZE_MAX;
        for (const auto& [k, n] : per_cell) g.min_cell_triples = std::min(g.min_cell_triples, n);
        if (per_cell.size() != 75) g.min_cell_triples = 0;

        g.result = sweep_accuracy(rows, make_model_factory(ClassifierKind::LinearSvm), SweepConfig{});
        g.seconds = seconds_since(t0);
        return g;
    }();
    return run;
}

Outcome overall_accuracy() {
    const GridRun& g = grid_run();
    const double mean = g.result.mean_accuracy();
    const bool ok = std::abs(mean - 0.70) <= 0.08 && g.min_cell_triples >= 200 && g.result.evaluated_cells() == 75;
    std::printf("INFO sweep grid (SVM, rows = bs,jammer distance; cols = power ratio):\n%s", g.result.to_csv().c_str());
    return {ok, fmt("mean SVM accuracy %.2f%% over %zu/75 cells (want 70 +/- 8 pp); >= %zu jammed triples per cell; "
                    "%.1f s",
                    100.0 * mean, g.result.evaluated_cells(), g.min_cell_triples, g.seconds)};
}

Outcome trends() {
    const GridRun& g = grid_run();
    const SweepAxes axes;

    // (a) P_j = 5 P_s: mean accuracy per jammer distance bucket, over BS distances
    std::vector<double> dist, dist_acc;
    for (double jd : axes.jammer_distances_m) {
        double sum = 0.0;
        int n = 0;
        for (const auto& c : g.result.cells)
            if (c.power_ratio == 5.0 && c.jammer_distance_m == jd && c.accuracy) sum += *c.accuracy, ++n;
        if (n) dist.push_back(jd), dist_acc.push_back(sum / n);
    }
    // (b) BS at 350 m: mean accuracy per power bucket, over jammer distances
    std::vector<double> power, power_acc;
    for (double pr : axes.power_ratios) {
        double sum = 0.0;
        int n = 0;
        for (const auto& c : g.result.cells)
            if (c.bs_distance_m == 350.0 && c.power_ratio == pr && c.accuracy) sum += *c.accuracy, ++n;
        if (n) power.push_back(pr), power_acc.push_back(sum / n);
    }
    const double rho_d = dist.size() >= 2 ? spearman(dist, dist_acc) : std::nan("");
    const double rho_p = power.size() >= 2 ? spearman(power, power_acc) : std::nan("");

    std::string da, pa;
    for (double a : dist_acc) da += fmt(" %.3f", a);
    for (double a : power_acc) pa += fmt(" %.3f", a);
    const bool ok = rho_d <= -0.5 && rho_p >= 0.5;
    return {ok, fmt("distance rho %.3f (want <= -0.5; acc by distance:%s); power rho %.3f (want >= 0.5; acc by "
                    "power:%s)",
                    rho_d, da.c_str(), rho_p, pa.c_str())};
}

// --- STL property suite ----------------------------------------------------

double rel_rms(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num / a.size());
}

std::vector<double> random_seasonal(std::mt19937_64& rng, std::size_t period, std::size_t cycles) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> y(period * cycles);
    double walk = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        walk += 0.3 * noise(rng);
        y[i] = walk + 2.0 * std::sin(6.283185307179586 * static_cast<double>(i) / period) + 0.5 * noise(rng);
    }
    return y;
}

Outcome stl_suite() {
    std::mt19937_64 rng(515);

    // additivity: trend + seasonal + residual == input
    double worst_add = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t period = 4 + trial % 13;
        const auto y = random_seasonal(rng, period, 3 + trial % 4);
        StlParams p;
        p.period = period;
        p.outer_iterations = trial % 5 == 0 ? 2 : 0;
        const auto d = stl_decompose(y, p);
        double scale = 0.0;
        for (double v : y) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < y.size(); ++i)
            worst_add = std::max(worst_add, std::abs(d.trend[i] + d.seasonal[i] + d.residual[i] - y[i]) / scale);
    }

    // degree-1 Loess reproduces affine inputs
    double worst_affine = 0.0;
    std::vector<double> line(101);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = -4.0 + 0.37 * static_cast<double>(i);
    for (std::size_t span = 3; span <= 99; span += 4)
        for (std::size_t jump : {1, 3, 7}) {
            LoessParams lp;
            lp.span = span;
            lp.degree = 1;
            lp.jump = jump;
            const auto out = loess_smooth(line, lp);
            for (std::size_t i = 0; i < line.size(); ++i)
                worst_affine = std::max(worst_affine, std::abs(out[i] - line[i]) / (1.0 + std::abs(line[i])));
        }

    // shift and scale equivariance
    double worst_eq = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t period = 6 + trial;
        const auto y = random_seasonal(rng, period, 4);
        StlParams p;
        p.period = period;
        const auto base = stl_decompose(y, p);
        std::vector<double> moved(y);
        for (double& v : moved) v = -3.0 * v + 12.5;
        const auto d = stl_decompose(moved, p);
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double scale = 1.0 + std::abs(base.trend[i]) * 3.0 + 12.5;
            worst_eq = std::max(worst_eq, std::abs(d.trend[i] - (-3.0 * base.trend[i] + 12.5)) / scale);
            worst_eq = std::max(worst_eq, std::abs(d.seasonal[i] + 3.0 * base.seasonal[i]) / scale);
            worst_eq = std::max(worst_eq, std::abs(d.residual[i] + 3.0 * base.residual[i]) / scale);
        }
    }

    // reference implementation
    std::ifstream in(std::string(JAMDET_TEST_DATA_DIR) + "/stl_reference.json");
    const auto ref = nlohmann::json::parse(in);
    std::size_t cases = 0;
    double worst_ref = 0.0;
    for (const auto& c : ref.at("cases")) {
        const auto& pj = c.at("params");
        StlParams p;
        p.period = pj.at("period");
        p.seasonal_span = pj.at("seasonal_span");
        p.trend_span = pj.at("trend_span");
        p.lowpass_span = pj.at("lowpass_span");
        p.seasonal_degree = pj.at("seasonal_degree");
        p.trend_degree = pj.at("trend_degree");
        p.lowpass_degree = pj.at("lowpass_degree");
        p.seasonal_jump = pj.at("seasonal_jump");
        p.trend_jump = pj.at("trend_jump");
        p.lowpass_jump = pj.at("lowpass_jump");
        p.inner_iterations = pj.at("inner_iterations");
        p.outer_iterations = pj.at("outer_iterations");
        const auto d = stl_decompose(c.at("series").get<std::vector<double>>(), p);
        worst_ref = std::max(worst_ref, rel_rms(d.trend, c.at("trend").get<std::vector<double>>()));
        worst_ref = std::max(worst_ref, rel_rms(d.seasonal, c.at("seasonal").get<std::vector<double>>()));
        ++cases;
    }

    const bool ok = worst_add <= 1e-9 && worst_affine <= 1e-9 && worst_eq <= 1e-9 && cases >= 20 && worst_ref <= 1e-6;
    return {ok, fmt("additivity %.1e (<= 1e-9, 100 inputs); affine loess %.1e; equivariance %.1e; reference %.1e "
                    "relative RMS over %zu cases (<= 1e-6)",
                    worst_add, worst_affine, worst_eq, worst_ref, cases)};
}

// --- classifier oracles ----------------------------------------------------

Outcome classifier_oracles() {
    std::mt19937_64 rng(616);
    std::normal_distribution<double> g(0.0, 1.0);

    // logistic gradient vs central differences
    std::vector<double> x(200), y(200);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g(rng);
        y[i] = x[i] + 0.7 * g(rng) > 0.0 ? 1.0 : 0.0;
    }
    double worst_grad = 0.0;
    const double h = 1e-6;
    for (auto [w, b] : {std::pair{0.4, -0.3}, std::pair{-2.0, 1.1}, std::pair{3.5, 0.2}}) {
        const auto o = logistic_objective(w, b, x, y, 1e-3);
        const double dw =
            (logistic_objective(w + h, b, x, y, 1e-3).loss - logistic_objective(w - h, b, x, y, 1e-3).loss) / (2 * h);
        const double db =
            (logistic_objective(w, b + h, x, y, 1e-3).loss - logistic_objective(w, b - h, x, y, 1e-3).loss) / (2 * h);
        worst_grad = std::max(worst_grad, std::abs(o.grad_weight - dw) / std::abs(dw));
        worst_grad = std::max(worst_grad, std::abs(o.grad_bias - db) / std::abs(db));
    }

    // separable data
    std::uniform_real_distribution<double> lo(0.0, 0.45), hi(0.55, 1.0);
    std::vector<FeatureRow> sep;
    for (int i = 0; i < 500; ++i) {
        FeatureRow a, b;
        a.rmse = lo(rng);
        a.label = BinaryLabel::Jamming;
        b.rmse = hi(rng);
        b.label = BinaryLabel::Normal;
        sep.push_back(a);
        sep.push_back(b);
    }
    std::string sep_detail;
    bool sep_ok = true;
    for (auto kind : {ClassifierKind::Threshold, ClassifierKind::LogisticRegression, ClassifierKind::LinearSvm}) {
        const auto m = make_model_factory(kind)(sep);
        std::size_t correct = 0;
        for (const auto& r : sep) correct += m.predict(r.rmse) == r.label;
        const double acc = static_cast<double>(correct) / sep.size();
        sep_ok = sep_ok && acc == 1.0;
        sep_detail += fmt(" %s %.3f", to_string(kind), acc);
    }

    // symmetric Gaussians: Bayes boundary at the midpoint
    const double sigma = 1.0;
    const std::size_t n = 40000;
    std::normal_distribution<double> a(2.0, sigma), b(4.0, sigma);
    std::vector<FeatureRow> gauss;
    for (std::size_t i = 0; i < n / 2; ++i) {
        FeatureRow p, q;
        p.rmse = a(rng);
        p.label = BinaryLabel::Normal;
        q.rmse = b(rng);
        q.label = BinaryLabel::Jamming;
        gauss.push_back(p);
        gauss.push_back(q);
    }
    const auto lr = fit_logistic(gauss);
    const double boundary = lr.boundary().value_or(std::nan(""));
    const double tol = 3.0 * sigma / std::sqrt(static_cast<double>(n));
    const bool gauss_ok = std::abs(boundary - 3.0) <= tol;

    const bool ok = worst_grad < 1e-6 && sep_ok && gauss_ok;
    return {ok, fmt("gradient rel. error %.1e (< 1e-6); separable accuracy:%s; logistic boundary %.4f vs 3 (+/- %.4f)",
                    worst_grad, sep_detail.c_str(), boundary, tol)};
}

// --- determinism -------------------------------------------------------------

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// generate -> features -> train -> evaluate through the C interface; returns
// the concatenated artifacts, or "" on any failure.
std::string pipeline(const fs::path& dir) {
    const std::string data = (dir / "d.jamd").string();
    const std::string feats_path = (dir / "f.csv").string();
    const std::string model_path = (dir / "m.json").string();
    const char* spec = R"({"total_blocks": 1800, "blocks_per_scenario": 9, "seed": 4242,
                          "bs_distances_m": [90], "jammer_distances_m": [30], "power_ratios": [5]})";
    std::uint64_t n = 0;
    if (jd_generate(spec, data.c_str(), &n) != JD_OK) return "";
    jd_features* feats = nullptr;
    if (jd_features_extract(data.c_str(), nullptr, 0, &feats) != JD_OK) return "";
    jd_features *train = nullptr, *test = nullptr;
    jd_model* model = nullptr;
    jd_report* report = nullptr;
    char* report_json = nullptr;
    std::string out;
    if (jd_features_save(feats, feats_path.c_str()) == JD_OK &&
        jd_features_split(feats, 0.7, 4242, &train, &test) == JD_OK &&
        jd_model_train(train, "svm", nullptr, &model) == JD_OK && jd_model_save(model, model_path.c_str()) == JD_OK &&
        jd_evaluate(model, test, &report) == JD_OK && jd_report_to_json(report, &report_json) == JD_OK) {
        out = file_bytes(data) + file_bytes(data + ".meta.json") + file_bytes(feats_path) + file_bytes(model_path) +
              report_json;
    }
    jd_string_free(report_json);
    jd_report_free(report);
    jd_model_free(model);
    jd_features_free(train);
    jd_features_free(test);
    jd_features_free(feats);
    return out;
}

Outcome determinism() {
    std::random_device rd;
    const fs::path root = fs::temp_directory_path() / ("jamdet_accept_" + std::to_string(rd()));
    fs::create_directories(root / "a");
    fs::create_directories(root / "b");
    const std::string a = pipeline(root / "a");
    const std::string b = pipeline(root / "b");
    fs::remove_all(root);
    const bool ok = !a.empty() && a == b;
    return {ok, a.empty() ? std::string("pipeline failed: ") + jd_last_error()
                          : fmt("two runs from seed 4242: %zu artifact bytes, %s", a.size(),
                                a == b ? "bit-identical" : "DIFFERENT")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"table-one-power-difference", table_one},
        {"peak-cell-accuracy", peak_accuracy},
        {"overall-sweep-accuracy", overall_accuracy},
        {"accuracy-trends", trends},
        {"stl-property-suite", stl_suite},
        {"classifier-oracles", classifier_oracles},
        {"pipeline-determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    report_stl_variants();
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
