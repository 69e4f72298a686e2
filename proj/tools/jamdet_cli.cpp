// jamdet command-line front end. Talks to the toolkit only through the C API.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jamdet/jamdet.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kDomain = 3 };

struct Failure {
    int code;
    std::string message;
};

[[noreturn]] void raise(int code, std::string message) { throw Failure{code, std::move(message)}; }

void check(jd_status st) {
    if (st != JD_OK) raise(static_cast<int>(st), jd_last_error());
}

// Owns a string returned by the library.
struct LibString {
    char* p = nullptr;
    ~LibString() { jd_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

template <typename T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    ~Handle() { Free(p); }
};
using Features = Handle<jd_features, jd_features_free>;
using Model = Handle<jd_model, jd_model_free>;
using Dataset = Handle<jd_dataset, jd_dataset_free>;
using Report = Handle<jd_report, jd_report_free>;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(kIo, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(kIo, "cannot open '" + tmp + "' for writing");
        out << content;
        if (!out.flush()) raise(kIo, "write failed for '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        raise(kIo, "cannot rename '" + tmp + "' to '" + path + "'");
    }
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        raise(kUsage, "config '" + path + "': " + e.what());
    }
    if (!j.is_object()) raise(kUsage, "config '" + path + "': expected a JSON object");
    return j;
}

void require_input(const std::string& path) {
    if (!fs::is_regular_file(path)) raise(kIo, "input '" + path + "' does not exist");
}

void require_output(const std::string& path) {
    if (path.empty()) return;
    const fs::path parent = fs::absolute(path).parent_path();
    if (!fs::is_directory(parent)) raise(kIo, "output directory '" + parent.string() + "' does not exist");
    if (fs::is_directory(path)) raise(kIo, "output '" + path + "' is a directory");
}

std::string timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Context {
    std::vector<std::string> argv;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool quiet = false;
};

void write_manifest(const Context& ctx, const std::string& command, const json& config,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
    json m = {{"command", command},
              {"argv", ctx.argv},
              {"config", config},
              {"seed", ctx.seed},
              {"inputs", inputs},
              {"outputs", outputs},
              {"version", jd_version()},
              {"timestamp", timestamp()}};
    for (const auto& out : outputs) write_atomic(out + ".manifest.json", m.dump(2) + "\n");
}

void note(const Context& ctx, const std::string& msg) {
    if (!ctx.quiet) std::cerr << msg << "\n";
}

// --- subcommands ---

struct GenerateArgs {
    std::string out;
    std::string config;
    std::string preset;
    std::string csv;
    std::optional<std::uint64_t> total;
    std::optional<std::uint32_t> blocks_per_scenario;
    std::optional<std::uint32_t> fft_size;
    std::optional<double> occupancy;
    std::vector<double> bs_distances;
    std::vector<double> jammer_distances;
    std::vector<double> power_ratios;
    bool allow_nonpaper = false;
};

int run_generate(const Context& ctx, const GenerateArgs& a, bool seed_given) {
    json spec = json::object();
    if (!a.preset.empty()) spec["preset"] = a.preset;
    spec.merge_patch(load_config(a.config));
    if (seed_given || !spec.contains("seed")) spec["seed"] = ctx.seed;
    if (a.total) spec["total_blocks"] = *a.total;
    if (a.blocks_per_scenario) spec["blocks_per_scenario"] = *a.blocks_per_scenario;
    if (a.fft_size) spec["fft_size"] = *a.fft_size;
    if (a.occupancy) spec["occupancy_min"] = spec["occupancy_max"] = *a.occupancy;
    if (!a.bs_distances.empty()) spec["bs_distances_m"] = a.bs_distances;
    if (!a.jammer_distances.empty()) spec["jammer_distances_m"] = a.jammer_distances;
    if (!a.power_ratios.empty()) spec["power_ratios"] = a.power_ratios;
    if (a.allow_nonpaper) spec["allow_nonpaper"] = true;

    LibString resolved;
    check(jd_spec_resolve(spec.dump().c_str(), &resolved.p));
    require_output(a.out);
    require_output(a.csv);

    std::uint64_t blocks = 0;
    check(jd_generate(resolved.p, a.out.c_str(), &blocks));
    std::vector<std::string> outputs{a.out};
    if (!a.csv.empty()) {
        Dataset d;
        check(jd_dataset_load(a.out.c_str(), &d.p));
        check(jd_dataset_export_csv(d.p, a.csv.c_str()));
        outputs.push_back(a.csv);
    }
    json cfg = json::parse(resolved.str());
    write_manifest(ctx, "generate", cfg, {}, outputs);
    note(ctx, "wrote " + std::to_string(blocks) + " blocks to " + a.out);
    return kOk;
}

struct DecomposeArgs {
    std::string data;
    std::string out;
    std::string config;
    std::uint32_t scenario = 0;
    std::uint32_t triple = 0;
};

int run_decompose(const Context& ctx, const DecomposeArgs& a) {
    require_input(a.data);
    const json stl = load_config(a.config);
    require_output(a.out);
    Dataset d;
    check(jd_dataset_load(a.data.c_str(), &d.p));
    LibString csv;
    check(jd_decompose_triple(d.p, a.scenario, a.triple, stl.dump().c_str(), &csv.p));
    write_atomic(a.out, csv.str());
    write_manifest(ctx, "decompose",
                   {{"stl", stl}, {"scenario_id", a.scenario}, {"triple_index", a.triple}}, {a.data}, {a.out});
    note(ctx, "wrote decomposition of scenario " + std::to_string(a.scenario) + " triple " +
                  std::to_string(a.triple) + " to " + a.out);
    return kOk;
}

struct FeaturesArgs {
    std::string data;
    std::string out;
    std::string config;
    std::optional<double> split;
    std::string train_out;
    std::string test_out;
};

int run_features(const Context& ctx, const FeaturesArgs& a) {
    require_input(a.data);
    const json stl = load_config(a.config);
    if (a.split && (a.train_out.empty() || a.test_out.empty()))
        raise(kUsage, "--split needs --train-out and --test-out");
    if (a.split && !(*a.split > 0.0 && *a.split < 1.0)) raise(kUsage, "--split: must lie in (0, 1)");
    for (const auto& p : {a.out, a.train_out, a.test_out}) require_output(p);

    Features f;
    check(jd_features_extract(a.data.c_str(), stl.dump().c_str(), ctx.threads, &f.p));
    if (jd_features_failures(f.p) > 0)
        note(ctx, "warning: " + std::to_string(jd_features_failures(f.p)) + " triples could not be scored");
    if (jd_features_count(f.p) == 0) raise(kDomain, "no triples could be scored");

    std::vector<std::string> outputs{a.out};
    if (a.split) {
        Features train, test;
        check(jd_features_split(f.p, *a.split, ctx.seed, &train.p, &test.p));
        check(jd_features_save(train.p, a.train_out.c_str()));
        check(jd_features_save(test.p, a.test_out.c_str()));
        outputs.push_back(a.train_out);
        outputs.push_back(a.test_out);
        note(ctx, "split " + std::to_string(jd_features_count(train.p)) + " train / " +
                      std::to_string(jd_features_count(test.p)) + " test rows");
    }
    check(jd_features_save(f.p, a.out.c_str()));
    json cfg = {{"stl", stl}, {"threads", ctx.threads}};
    if (a.split) cfg["train_fraction"] = *a.split;
    write_manifest(ctx, "features", cfg, {a.data}, outputs);
    note(ctx, "wrote " + std::to_string(jd_features_count(f.p)) + " feature rows to " + a.out);
    return kOk;
}

struct TrainArgs {
    std::string features;
    std::string out;
    std::string config;
    std::string classifier = "svm";
};

int run_train(const Context& ctx, const TrainArgs& a, bool seed_given) {
    require_input(a.features);
    json hyper = load_config(a.config);
    if (seed_given || !hyper.contains("seed")) hyper["seed"] = ctx.seed;
    require_output(a.out);
    Features f;
    check(jd_features_load(a.features.c_str(), &f.p));
    Model m;
    check(jd_model_train(f.p, a.classifier.c_str(), hyper.dump().c_str(), &m.p));
    check(jd_model_save(m.p, a.out.c_str()));
    write_manifest(ctx, "train", {{"classifier", a.classifier}, {"hyper", hyper}}, {a.features}, {a.out});
    note(ctx, "trained " + a.classifier + " on " + std::to_string(jd_features_count(f.p)) + " rows -> " + a.out);
    return kOk;
}

struct EvaluateArgs {
    std::string model;
    std::string features;
    std::string out;
};

int run_evaluate(const Context& ctx, const EvaluateArgs& a) {
    require_input(a.model);
    require_input(a.features);
    require_output(a.out);
    Model m;
    check(jd_model_load(a.model.c_str(), &m.p));
    Features f;
    check(jd_features_load(a.features.c_str(), &f.p));
    Report r;
    check(jd_evaluate(m.p, f.p, &r.p));
    LibString table;
    check(jd_report_to_table(r.p, &table.p));
    std::cout << table.str();
    if (!a.out.empty()) {
        LibString js;
        check(jd_report_to_json(r.p, &js.p));
        write_atomic(a.out, js.str() + "\n");
        write_manifest(ctx, "evaluate", json::object(), {a.model, a.features}, {a.out});
    }
    return kOk;
}

struct SweepArgs {
    std::string data;
    std::string features;
    std::string out;
    std::string json_out;
    std::string config;
    std::string stl_config;
    std::string classifier = "svm";
    std::vector<std::string> fix;
};

int run_sweep(const Context& ctx, const SweepArgs& a, bool seed_given) {
    if (a.data.empty() == a.features.empty()) raise(kUsage, "sweep needs exactly one of --data or --features");
    require_input(a.data.empty() ? a.features : a.data);
    json cfg = load_config(a.config);
    const json stl = load_config(a.stl_config);
    if (seed_given || !cfg.contains("seed")) cfg["seed"] = ctx.seed;
    for (const auto& f : a.fix) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) raise(kUsage, "--fix expects key=value, got '" + f + "'");
        const std::string key = f.substr(0, eq);
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(f.substr(eq + 1), &used);
            if (used != f.size() - eq - 1) throw std::invalid_argument(f);
        } catch (const std::exception&) {
            raise(kUsage, "--fix " + key + ": not a number");
        }
        cfg["fix"][key] = value;
    }
    require_output(a.out);
    require_output(a.json_out);

    Features f;
    if (!a.data.empty()) {
        check(jd_features_extract(a.data.c_str(), stl.dump().c_str(), ctx.threads, &f.p));
    } else {
        note(ctx, "note: feature files carry no scenario ids; splitting per row");
        check(jd_features_load(a.features.c_str(), &f.p));
    }
    LibString csv, js;
    double mean = 0.0;
    check(jd_sweep(f.p, a.classifier.c_str(), nullptr, cfg.dump().c_str(), &csv.p, &js.p, &mean));
    write_atomic(a.out, csv.str());
    std::vector<std::string> outputs{a.out};
    if (!a.json_out.empty()) {
        write_atomic(a.json_out, js.str() + "\n");
        outputs.push_back(a.json_out);
    }
    write_manifest(ctx, "sweep", {{"classifier", a.classifier}, {"sweep", cfg}, {"stl", stl}},
                   {a.data.empty() ? a.features : a.data}, outputs);
    std::cout << csv.str();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "mean accuracy %.4f", mean);
    note(ctx, buf);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    Context ctx;
    ctx.argv.assign(argv, argv + argc);

    CLI::App app{"UAV jamming dataset synthesis and STL-based jamming detection"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(jd_version()));
    auto* seed_opt = app.add_option("--seed", ctx.seed, "Root random seed")->default_val(1);
    app.add_option("--threads", ctx.threads, "Worker threads (0 = all cores)")->default_val(0);
    app.add_flag("-q,--quiet", ctx.quiet, "Suppress progress messages");

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Synthesize a labelled dataset");
    g->add_option("--out", gen.out, "Dataset file")->required();
    g->add_option("--config", gen.config, "JSON dataset spec");
    g->add_option("--preset", gen.preset, "Built-in preset")->check(CLI::IsMember({"paper"}));
    g->add_option("--csv", gen.csv, "Also export the blocks as CSV");
    g->add_option("--total", gen.total, "Total number of blocks");
    g->add_option("--blocks-per-scenario", gen.blocks_per_scenario, "Blocks per scenario");
    g->add_option("--fft-size", gen.fft_size, "Bins per block");
    g->add_option("--occupancy", gen.occupancy, "Fraction of bins the jammer occupies");
    g->add_option("--bs-distances", gen.bs_distances, "BS distances (m)")->delimiter(',');
    g->add_option("--jammer-distances", gen.jammer_distances, "Jammer distances (m)")->delimiter(',');
    g->add_option("--power-ratios", gen.power_ratios, "Jammer-to-signal power ratios")->delimiter(',');
    g->add_flag("--allow-nonpaper", gen.allow_nonpaper, "Permit occupancy / power outside the reference ranges");

    DecomposeArgs dec;
    auto* d = app.add_subcommand("decompose", "STL decomposition of one triple as CSV");
    d->add_option("--data", dec.data, "Dataset file")->required();
    d->add_option("--scenario", dec.scenario, "Scenario id")->required();
    d->add_option("--triple", dec.triple, "Triple index within the scenario")->default_val(0);
    d->add_option("--out", dec.out, "Output CSV")->required();
    d->add_option("--config", dec.config, "JSON STL parameters");

    FeaturesArgs feat;
    auto* f = app.add_subcommand("features", "Extract RMSE features from a dataset");
    f->add_option("--data", feat.data, "Dataset file")->required();
    f->add_option("--out", feat.out, "Feature CSV")->required();
    f->add_option("--config", feat.config, "JSON STL parameters");
    f->add_option("--split", feat.split, "Also write a scenario-level train/test split with this train fraction");
    f->add_option("--train-out", feat.train_out, "Training feature CSV (with --split)");
    f->add_option("--test-out", feat.test_out, "Test feature CSV (with --split)");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Fit a classifier on a feature file");
    t->add_option("--features", tr.features, "Feature CSV")->required();
    t->add_option("--out", tr.out, "Model JSON")->required();
    t->add_option("--classifier", tr.classifier, "Classifier kind")
        ->check(CLI::IsMember({"svm", "logreg", "threshold"}))
        ->default_val("svm");
    t->add_option("--config", tr.config, "JSON hyperparameters");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Evaluate a model on a feature file");
    e->add_option("--model", ev.model, "Model JSON")->required();
    e->add_option("--features", ev.features, "Feature CSV")->required();
    e->add_option("--out", ev.out, "Report JSON");

    SweepArgs sw;
    auto* s = app.add_subcommand("sweep", "Accuracy grid over distance and power buckets");
    s->add_option("--data", sw.data, "Dataset file (features are extracted)");
    s->add_option("--features", sw.features, "Feature CSV (per-row split)");
    s->add_option("--out", sw.out, "Grid CSV")->required();
    s->add_option("--json-out", sw.json_out, "Per-cell JSON");
    s->add_option("--config", sw.config, "JSON sweep config");
    s->add_option("--stl-config", sw.stl_config, "JSON STL parameters (with --data)");
    s->add_option("--classifier", sw.classifier, "Classifier kind")
        ->check(CLI::IsMember({"svm", "logreg", "threshold"}))
        ->default_val("svm");
    s->add_option("--fix", sw.fix, "Fix an axis, e.g. power_ratio=5");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kUsage;
    }

    const bool seed_given = seed_opt->count() > 0;
    try {
        if (*g) return run_generate(ctx, gen, seed_given);
        if (*d) return run_decompose(ctx, dec);
        if (*f) return run_features(ctx, feat);
        if (*t) return run_train(ctx, tr, seed_given);
        if (*e) return run_evaluate(ctx, ev);
        if (*s) return run_sweep(ctx, sw, seed_given);
    } catch (const Failure& fail) {
        std::cerr << "error: " << fail.message << "\n";
        return fail.code;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kDomain;
    }
    return kUsage;
}
