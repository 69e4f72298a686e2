#include "jamdet/jamdet.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <set>
#include <string>

#include <json.hpp>

#include "jamdet/classifier.hpp"
#include "jamdet/config.hpp"
#include "jamdet/dataset_io.hpp"
#include "jamdet/detector.hpp"
#include "jamdet/error.hpp"
#include "jamdet/evaluation.hpp"

struct jd_dataset {
    jamdet::Dataset data;
};

struct jd_features {
    std::vector<jamdet::FeatureRow> rows;
    std::size_t failures = 0;
};

struct jd_model {
    jamdet::ClassifierModel model;
};

struct jd_report {
    jamdet::EvalReport report;
};

namespace {

using namespace jamdet;

thread_local std::string g_last_error;

jd_status fail(jd_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <typename F>
jd_status guarded(F&& body) {
    g_last_error.clear();
    try {
        body();
        return JD_OK;
    } catch (const Error& e) {
        return fail(static_cast<jd_status>(e.kind()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(JD_ERR_CONFIG, e.what());
    } catch (const std::bad_alloc&) {
        return fail(JD_ERR_DOMAIN, "out of memory");
    } catch (const std::exception& e) {
        return fail(JD_ERR_DOMAIN, e.what());
    }
}

void require_arg(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid argument: ") + what);
}

std::string_view view(const char* s) { return s == nullptr ? std::string_view{} : std::string_view{s}; }

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Scores the triples collected so far and appends them to `out`.
void flush_triples(std::vector<TripleSample>& pending, const StlParams& params, unsigned threads, jd_features& out) {
    if (pending.empty()) return;
    FeatureBatch batch = extract_features(pending, params, threads);
    out.rows.insert(out.rows.end(), batch.rows.begin(), batch.rows.end());
    out.failures += batch.failures.size();
    pending.clear();
}

}  // namespace

extern "C" {

const char* jd_version(void) { return JAMDET_VERSION; }

const char* jd_last_error(void) { return g_last_error.c_str(); }

void jd_string_free(char* s) { std::free(s); }

jd_status jd_spec_resolve(const char* spec_json, char** resolved_json) {
    return guarded([&] {
        require_arg(resolved_json != nullptr, "resolved_json is NULL");
        *resolved_json = dup(dataset_spec_to_json(parse_dataset_spec(view(spec_json))));
    });
}

jd_status jd_generate(const char* spec_json, const char* path, uint64_t* blocks_written) {
    return guarded([&] {
        require_arg(path != nullptr && *path != '\0', "path is empty");
        const DatasetSpec spec = parse_dataset_spec(view(spec_json));
        DatasetWriter writer(path, spec.fft_size);
        const auto scenarios = generate_dataset(spec, [&](const ResourceBlock& b) { writer.write(b); });
        const std::string meta = metadata_path(path);
        atomic_write(meta, scenarios_to_json(scenarios));
        try {
            writer.finish();
        } catch (...) {
            std::error_code ec;
            std::filesystem::remove(meta, ec);
            throw;
        }
        if (blocks_written != nullptr) *blocks_written = writer.count();
    });
}

jd_status jd_dataset_generate(const char* spec_json, jd_dataset** out) {
    return guarded([&] {
        require_arg(out != nullptr, "out is NULL");
        auto d = std::make_unique<jd_dataset>();
        d->data = generate_dataset(parse_dataset_spec(view(spec_json)));
        *out = d.release();
    });
}

jd_status jd_dataset_load(const char* path, jd_dataset** out) {
    return guarded([&] {
        require_arg(path != nullptr && out != nullptr, "path/out is NULL");
        auto d = std::make_unique<jd_dataset>();
        d->data = read_dataset(path);
        *out = d.release();
    });
}

jd_status jd_dataset_save(const jd_dataset* dataset, const char* path) {
    return guarded([&] {
        require_arg(dataset != nullptr && path != nullptr, "dataset/path is NULL");
        write_dataset(path, dataset->data);
    });
}

jd_status jd_dataset_export_csv(const jd_dataset* dataset, const char* path) {
    return guarded([&] {
        require_arg(dataset != nullptr && path != nullptr, "dataset/path is NULL");
        write_dataset_csv(path, dataset->data.blocks);
    });
}

void jd_dataset_free(jd_dataset* dataset) { delete dataset; }

uint64_t jd_dataset_block_count(const jd_dataset* dataset) { return dataset ? dataset->data.blocks.size() : 0; }

uint32_t jd_dataset_fft_size(const jd_dataset* dataset) { return dataset ? dataset->data.fft_size : 0; }

uint64_t jd_dataset_scenario_count(const jd_dataset* dataset) { return dataset ? dataset->data.scenarios.size() : 0; }

jd_status jd_dataset_mean_power_difference(const jd_dataset* dataset, double* good_db, double* bad_db) {
    return guarded([&] {
        require_arg(dataset != nullptr && good_db != nullptr && bad_db != nullptr, "NULL argument");
        const MeanPowerDifference d = mean_power_difference(dataset->data.blocks);
        *good_db = d.good_db;
        *bad_db = d.bad_db;
    });
}

jd_status jd_stl_decompose(const double* series, size_t n, const char* stl_json, double* trend, double* seasonal,
                           double* residual) {
    return guarded([&] {
        require_arg(series != nullptr && trend != nullptr && seasonal != nullptr && residual != nullptr,
                    "NULL array");
        const StlParams params = parse_stl_params(view(stl_json), 1024);
        const StlDecomposition d = stl_decompose(std::span<const double>(series, n), params);
        std::copy(d.trend.begin(), d.trend.end(), trend);
        std::copy(d.seasonal.begin(), d.seasonal.end(), seasonal);
        std::copy(d.residual.begin(), d.residual.end(), residual);
    });
}

jd_status jd_decompose_triple(const jd_dataset* dataset, uint32_t scenario_id, uint32_t triple_index,
                              const char* stl_json, char** csv) {
    return guarded([&] {
        require_arg(dataset != nullptr && csv != nullptr, "NULL argument");
        const TripleSample sample = triple_for(dataset->data, scenario_id, triple_index);
        const StlParams params = parse_stl_params(view(stl_json), dataset->data.fft_size);
        const StlDecomposition d = stl_decompose(sample.values, params);
        std::string out = "original,trend,seasonal,residual\n";
        char line[128];
        for (std::size_t i = 0; i < sample.values.size(); ++i) {
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", sample.values[i], d.trend[i],
                          d.seasonal[i], d.residual[i]);
            out += line;
        }
        *csv = dup(out);
    });
}

jd_status jd_features_extract(const char* dataset_path, const char* stl_json, unsigned threads, jd_features** out) {
    return guarded([&] {
        require_arg(dataset_path != nullptr && out != nullptr, "dataset_path/out is NULL");
        DatasetReader reader(dataset_path);
        const StlParams params = parse_stl_params(view(stl_json), reader.fft_size());
        validate(params, 3 * static_cast<std::size_t>(reader.fft_size()));

        std::vector<ScenarioConfig> scenarios;
        const std::string meta = metadata_path(dataset_path);
        if (std::filesystem::exists(meta)) scenarios = scenarios_from_json(read_text_file(meta));

        auto result = std::make_unique<jd_features>();
        std::vector<TripleSample> pending;
        std::vector<ResourceBlock> group;
        std::set<std::uint32_t> finished;
        const std::size_t batch = 256;

        auto close_group = [&] {
            if (group.empty()) return;
            if (!finished.insert(group.front().scenario_id).second)
                throw ConfigError("dataset: blocks of scenario " + std::to_string(group.front().scenario_id) +
                                  " are not contiguous");
            TripleSet set = make_triples(group, scenarios);
            result->failures += set.degenerate;
            for (auto& s : set.samples) pending.push_back(std::move(s));
            group.clear();
            if (pending.size() >= batch) flush_triples(pending, params, threads, *result);
        };

        while (auto block = reader.next()) {
            if (!group.empty() && block->scenario_id != group.front().scenario_id) close_group();
            group.push_back(std::move(*block));
        }
        close_group();
        flush_triples(pending, params, threads, *result);
        *out = result.release();
    });
}

jd_status jd_features_load(const char* path, jd_features** out) {
    return guarded([&] {
        require_arg(path != nullptr && out != nullptr, "path/out is NULL");
        auto f = std::make_unique<jd_features>();
        f->rows = read_features_csv(path);
        // no scenario ids on disk: every row is its own split unit
        for (std::size_t i = 0; i < f->rows.size(); ++i) f->rows[i].meta.scenario_id = static_cast<std::uint32_t>(i);
        *out = f.release();
    });
}

jd_status jd_features_save(const jd_features* features, const char* path) {
    return guarded([&] {
        require_arg(features != nullptr && path != nullptr, "features/path is NULL");
        write_features_csv(path, features->rows);
    });
}

void jd_features_free(jd_features* features) { delete features; }

size_t jd_features_count(const jd_features* features) { return features ? features->rows.size() : 0; }

size_t jd_features_failures(const jd_features* features) { return features ? features->failures : 0; }

jd_status jd_features_get(const jd_features* features, size_t index, double* rmse, int* jamming) {
    return guarded([&] {
        require_arg(features != nullptr && index < features->rows.size(), "index out of range");
        if (rmse != nullptr) *rmse = features->rows[index].rmse;
        if (jamming != nullptr) *jamming = features->rows[index].label == BinaryLabel::Jamming ? 1 : 0;
    });
}

jd_status jd_features_split(const jd_features* features, double train_fraction, uint64_t seed, jd_features** train,
                            jd_features** test) {
    return guarded([&] {
        require_arg(features != nullptr && train != nullptr && test != nullptr, "NULL argument");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw ConfigError("train_fraction: must lie in (0, 1)");
        const std::vector<bool> in_train = split_by_scenario(features->rows, train_fraction, seed);
        auto a = std::make_unique<jd_features>();
        auto b = std::make_unique<jd_features>();
        for (std::size_t i = 0; i < features->rows.size(); ++i)
            (in_train[i] ? a : b)->rows.push_back(features->rows[i]);
        *train = a.release();
        *test = b.release();
    });
}

jd_status jd_model_train(const jd_features* features, const char* kind, const char* hyper_json, jd_model** out) {
    return guarded([&] {
        require_arg(features != nullptr && kind != nullptr && out != nullptr, "NULL argument");
        const ClassifierHyper hyper = parse_classifier_hyper(view(hyper_json));
        const ModelFactory fit = make_model_factory(parse_classifier_kind(kind), hyper.logistic, hyper.svm);
        auto m = std::make_unique<jd_model>();
        m->model = fit(features->rows);
        *out = m.release();
    });
}

jd_status jd_model_load(const char* path, jd_model** out) {
    return guarded([&] {
        require_arg(path != nullptr && out != nullptr, "path/out is NULL");
        auto m = std::make_unique<jd_model>();
        m->model = model_from_json(read_text_file(path));
        *out = m.release();
    });
}

jd_status jd_model_save(const jd_model* model, const char* path) {
    return guarded([&] {
        require_arg(model != nullptr && path != nullptr, "model/path is NULL");
        atomic_write(path, model_to_json(model->model) + "\n");
    });
}

jd_status jd_model_to_json(const jd_model* model, char** json) {
    return guarded([&] {
        require_arg(model != nullptr && json != nullptr, "NULL argument");
        *json = dup(model_to_json(model->model));
    });
}

void jd_model_free(jd_model* model) { delete model; }

jd_status jd_evaluate(const jd_model* model, const jd_features* features, jd_report** out) {
    return guarded([&] {
        require_arg(model != nullptr && features != nullptr && out != nullptr, "NULL argument");
        auto r = std::make_unique<jd_report>();
        r->report = evaluate(model->model, features->rows);
        *out = r.release();
    });
}

double jd_report_accuracy(const jd_report* report) { return report ? report->report.accuracy : 0.0; }

jd_status jd_report_to_json(const jd_report* report, char** json) {
    return guarded([&] {
        require_arg(report != nullptr && json != nullptr, "NULL argument");
        *json = dup(report_to_json(report->report));
    });
}

jd_status jd_report_to_table(const jd_report* report, char** table) {
    return guarded([&] {
        require_arg(report != nullptr && table != nullptr, "NULL argument");
        *table = dup(format_report(report->report));
    });
}

void jd_report_free(jd_report* report) { delete report; }

jd_status jd_sweep(const jd_features* features, const char* kind, const char* hyper_json, const char* sweep_json,
                   char** csv, char** json, double* mean_accuracy) {
    return guarded([&] {
        require_arg(features != nullptr && kind != nullptr, "NULL argument");
        const ClassifierHyper hyper = parse_classifier_hyper(view(hyper_json));
        const ModelFactory fit = make_model_factory(parse_classifier_kind(kind), hyper.logistic, hyper.svm);
        const SweepConfig config = parse_sweep_config(view(sweep_json));
        const SweepResult result = sweep_accuracy(features->rows, fit, config);
        if (result.evaluated_cells() == 0) throw DomainError("sweep: no grid cell has data for both classes");
        char* csv_out = csv != nullptr ? dup(result.to_csv()) : nullptr;
        try {
            if (json != nullptr) *json = dup(result.to_json());
        } catch (...) {
            std::free(csv_out);
            throw;
        }
        if (csv != nullptr) *csv = csv_out;
        if (mean_accuracy != nullptr) *mean_accuracy = result.mean_accuracy();
    });
}

}  // extern "C"
