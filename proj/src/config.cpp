#include "jamdet/config.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>

#include <json.hpp>

#include "jamdet/detector.hpp"
#include "jamdet/error.hpp"

namespace jamdet {

namespace {

using nlohmann::json;

json parse_object(std::string_view text, const char* what) {
    if (text.empty()) return json::object();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + ": malformed JSON: " + e.what());
    }
    if (j.is_null()) return json::object();
    if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
    return j;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(what + ": unknown key '" + key + "'");
    }
}

template <typename T>
void take(const json& j, const char* key, T& out, const std::string& what) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(what + "." + key + ": wrong type");
    }
}

// Non-negative integer that may be given as a JSON number.
template <typename T>
void take_count(const json& j, const char* key, T& out, const std::string& what) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_number_integer() || it->get<long long>() < 0)
        throw ConfigError(what + "." + key + ": must be a non-negative integer");
    out = static_cast<T>(it->get<unsigned long long>());
}

}  // namespace

DatasetSpec parse_dataset_spec(std::string_view text) {
    const json j = parse_object(text, "dataset spec");
    check_keys(j,
               {"preset", "total_blocks", "blocks_per_scenario", "fft_size", "good_snr", "bad_snr", "bs_distances_m",
                "jammer_distances_m", "power_ratios", "occupancy_min", "occupancy_max", "slot_occupancy",
                "uav_altitude_m", "seed", "allow_nonpaper", "channel"},
               "dataset spec");
    DatasetSpec s;
    if (auto it = j.find("preset"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>() != "paper")
            throw ConfigError("preset: unknown preset (expected \"paper\")");
        s = DatasetSpec::paper();
    }
    const std::string w = "dataset spec";
    take_count(j, "total_blocks", s.total_blocks, w);
    take_count(j, "blocks_per_scenario", s.blocks_per_scenario, w);
    take_count(j, "fft_size", s.fft_size, w);
    take(j, "good_snr", s.good_snr, w);
    take(j, "bad_snr", s.bad_snr, w);
    take(j, "bs_distances_m", s.bs_distances_m, w);
    take(j, "jammer_distances_m", s.jammer_distances_m, w);
    take(j, "power_ratios", s.power_ratios, w);
    take(j, "occupancy_min", s.occupancy_min, w);
    take(j, "occupancy_max", s.occupancy_max, w);
    take(j, "slot_occupancy", s.slot_occupancy, w);
    take(j, "uav_altitude_m", s.uav_altitude_m, w);
    take_count(j, "seed", s.seed, w);
    take(j, "allow_nonpaper", s.allow_nonpaper, w);
    if (auto it = j.find("channel"); it != j.end()) {
        if (!it->is_object()) throw ConfigError("channel: expected an object");
        const std::string cw = "channel";
        check_keys(*it,
                   {"n_rays", "rician_k_db", "path_loss_exponent", "ref_distance_m", "shadow_sigma_db",
                    "carrier_freq_hz", "bandwidth_hz", "max_delay_s"},
                   cw);
        auto& c = s.channel;
        take(*it, "n_rays", c.n_rays, cw);
        if (auto k = it->find("rician_k_db"); k != it->end() && k->is_null())
            c.rician_k_db = std::numeric_limits<double>::infinity();
        else
            take(*it, "rician_k_db", c.rician_k_db, cw);
        take(*it, "path_loss_exponent", c.path_loss_exponent, cw);
        take(*it, "ref_distance_m", c.ref_distance_m, cw);
        take(*it, "shadow_sigma_db", c.shadow_sigma_db, cw);
        take(*it, "carrier_freq_hz", c.carrier_freq_hz, cw);
        take(*it, "bandwidth_hz", c.bandwidth_hz, cw);
        take(*it, "max_delay_s", c.max_delay_s, cw);
    }
    validate(s);
    return s;
}

std::string dataset_spec_to_json(const DatasetSpec& s) {
    const auto& c = s.channel;
    json ch = {{"n_rays", c.n_rays},
               {"path_loss_exponent", c.path_loss_exponent},
               {"ref_distance_m", c.ref_distance_m},
               {"shadow_sigma_db", c.shadow_sigma_db},
               {"carrier_freq_hz", c.carrier_freq_hz},
               {"bandwidth_hz", c.bandwidth_hz},
               {"max_delay_s", c.max_delay_s}};
    ch["rician_k_db"] = std::isinf(c.rician_k_db) ? json(nullptr) : json(c.rician_k_db);
    json j = {{"total_blocks", s.total_blocks},
              {"blocks_per_scenario", s.blocks_per_scenario},
              {"fft_size", s.fft_size},
              {"good_snr", s.good_snr},
              {"bad_snr", s.bad_snr},
              {"bs_distances_m", s.bs_distances_m},
              {"jammer_distances_m", s.jammer_distances_m},
              {"power_ratios", s.power_ratios},
              {"occupancy_min", s.occupancy_min},
              {"occupancy_max", s.occupancy_max},
              {"slot_occupancy", s.slot_occupancy},
              {"uav_altitude_m", s.uav_altitude_m},
              {"seed", s.seed},
              {"allow_nonpaper", s.allow_nonpaper},
              {"channel", ch}};
    return j.dump(2);
}

StlParams parse_stl_params(std::string_view text, std::uint32_t fft_size) {
    const json j = parse_object(text, "stl params");
    const std::string w = "stl";
    check_keys(j,
               {"period", "seasonal_span", "trend_span", "lowpass_span", "seasonal_degree", "trend_degree",
                "lowpass_degree", "seasonal_jump", "trend_jump", "lowpass_jump", "inner_iterations",
                "outer_iterations"},
               w);
    StlParams p = triple_stl_params(fft_size);
    take_count(j, "period", p.period, w);
    take_count(j, "seasonal_span", p.seasonal_span, w);
    take_count(j, "trend_span", p.trend_span, w);
    take_count(j, "lowpass_span", p.lowpass_span, w);
    take(j, "seasonal_degree", p.seasonal_degree, w);
    take(j, "trend_degree", p.trend_degree, w);
    take(j, "lowpass_degree", p.lowpass_degree, w);
    take_count(j, "seasonal_jump", p.seasonal_jump, w);
    take_count(j, "trend_jump", p.trend_jump, w);
    take_count(j, "lowpass_jump", p.lowpass_jump, w);
    take(j, "inner_iterations", p.inner_iterations, w);
    take(j, "outer_iterations", p.outer_iterations, w);
    return p;
}

std::string stl_params_to_json(const StlParams& p) {
    json j = {{"period", p.period},
              {"seasonal_span", p.seasonal_span},
              {"trend_span", p.trend_span},
              {"lowpass_span", p.lowpass_span},
              {"seasonal_degree", p.seasonal_degree},
              {"trend_degree", p.trend_degree},
              {"lowpass_degree", p.lowpass_degree},
              {"seasonal_jump", p.seasonal_jump},
              {"trend_jump", p.trend_jump},
              {"lowpass_jump", p.lowpass_jump},
              {"inner_iterations", p.inner_iterations},
              {"outer_iterations", p.outer_iterations}};
    return j.dump(2);
}

ClassifierHyper parse_classifier_hyper(std::string_view text) {
    const json j = parse_object(text, "classifier hyperparameters");
    const std::string w = "hyper";
    check_keys(j, {"lr", "epochs", "l2", "c", "seed"}, w);
    ClassifierHyper h;
    take(j, "lr", h.logistic.lr, w);
    take(j, "epochs", h.logistic.epochs, w);
    take(j, "l2", h.logistic.l2, w);
    take(j, "lr", h.svm.lr, w);
    take(j, "epochs", h.svm.epochs, w);
    take(j, "c", h.svm.c, w);
    take_count(j, "seed", h.svm.seed, w);
    return h;
}

SweepConfig parse_sweep_config(std::string_view text) {
    const json j = parse_object(text, "sweep config");
    const std::string w = "sweep";
    check_keys(j, {"bs_distances_m", "jammer_distances_m", "power_ratios", "train_fraction", "seed", "fix"}, w);
    SweepConfig c;
    take(j, "bs_distances_m", c.axes.bs_distances_m, w);
    take(j, "jammer_distances_m", c.axes.jammer_distances_m, w);
    take(j, "power_ratios", c.axes.power_ratios, w);
    take(j, "train_fraction", c.train_fraction, w);
    take_count(j, "seed", c.seed, w);
    if (auto it = j.find("fix"); it != j.end()) {
        if (!it->is_object()) throw ConfigError("sweep.fix: expected an object");
        check_keys(*it, {"power_ratio", "jammer_distance_m", "bs_distance_m"}, "sweep.fix");
        double v = 0.0;
        if (it->contains("power_ratio")) take(*it, "power_ratio", v, w), c.fix_power_ratio = v;
        if (it->contains("jammer_distance_m")) take(*it, "jammer_distance_m", v, w), c.fix_jammer_distance_m = v;
        if (it->contains("bs_distance_m")) take(*it, "bs_distance_m", v, w), c.fix_bs_distance_m = v;
    }
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        throw ConfigError("sweep.train_fraction: must lie in (0, 1)");
    if (c.axes.bs_distances_m.empty() || c.axes.jammer_distances_m.empty() || c.axes.power_ratios.empty())
        throw ConfigError("sweep: axes must not be empty");
    return c;
}

std::string sweep_config_to_json(const SweepConfig& c) {
    json j = {{"bs_distances_m", c.axes.bs_distances_m},
              {"jammer_distances_m", c.axes.jammer_distances_m},
              {"power_ratios", c.axes.power_ratios},
              {"train_fraction", c.train_fraction},
              {"seed", c.seed}};
    json fix = json::object();
    if (c.fix_power_ratio) fix["power_ratio"] = *c.fix_power_ratio;
    if (c.fix_jammer_distance_m) fix["jammer_distance_m"] = *c.fix_jammer_distance_m;
    if (c.fix_bs_distance_m) fix["bs_distance_m"] = *c.fix_bs_distance_m;
    j["fix"] = fix;
    return j.dump(2);
}

}  // namespace jamdet
