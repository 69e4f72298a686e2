#include "jamdet/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jamdet/error.hpp"

namespace jamdet {

namespace {

bool finite(const Position3D& p) noexcept {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError(field + ": " + why);
}

bool is_power_of_two(std::uint32_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

// Point at 3D distance `dist` from `origin`, looking down at an elevation
// angle that keeps z >= 0.
Position3D place_below(const Position3D& origin, double dist, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double max_el = std::asin(std::min(1.0, origin.z / dist));
    const double el = max_el * unit(rng);
    const double az = 2.0 * std::numbers::pi * unit(rng);
    Position3D p{origin.x + dist * std::cos(el) * std::cos(az), origin.y + dist * std::cos(el) * std::sin(az),
                 origin.z - dist * std::sin(el)};
    p.z = std::max(0.0, p.z);
    return p;
}

}  // namespace

double distance(const Position3D& a, const Position3D& b) noexcept {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

const char* to_string(BlockLabel label) noexcept {
    switch (label) {
        case BlockLabel::GoodNormal: return "GoodNormal";
        case BlockLabel::BadNormal: return "BadNormal";
        case BlockLabel::GoodJamming: return "GoodJamming";
        case BlockLabel::BadJamming: return "BadJamming";
    }
    return "?";
}

const char* to_string(ChannelQuality quality) noexcept { return quality == ChannelQuality::Good ? "Good" : "Bad"; }

BlockLabel make_label(ChannelQuality quality, bool jammed) noexcept {
    const int q = quality == ChannelQuality::Good ? 0 : 1;
    return static_cast<BlockLabel>(q + (jammed ? 2 : 0));
}

ChannelQuality quality_of(BlockLabel label) noexcept {
    return (static_cast<int>(label) % 2 == 0) ? ChannelQuality::Good : ChannelQuality::Bad;
}

bool is_jamming(BlockLabel label) noexcept { return static_cast<int>(label) >= 2; }

void validate(const ScenarioConfig& s) {
    require(finite(s.uav_pos) && s.uav_pos.z >= 0.0, "uav_pos", "coordinates must be finite with z >= 0");
    require(finite(s.bs_pos) && s.bs_pos.z >= 0.0, "bs_pos", "coordinates must be finite with z >= 0");
    require(s.bs_distance_m() > 0.0, "bs_pos", "coincides with uav_pos");
    require(s.snr_linear > 0.0 && std::isfinite(s.snr_linear), "snr_linear", "must be positive");
    require(is_power_of_two(s.fft_size), "fft_size", "must be a power of two");

    const auto& c = s.channel;
    require(c.n_rays >= 1, "channel.n_rays", "must be >= 1");
    require(c.ref_distance_m > 0.0, "channel.ref_distance_m", "must be > 0");
    require(c.path_loss_exponent > 0.0, "channel.path_loss_exponent", "must be > 0");
    require(c.shadow_sigma_db >= 0.0, "channel.shadow_sigma_db", "must be >= 0");
    require(!std::isnan(c.rician_k_db), "channel.rician_k_db", "must not be NaN");
    require(c.max_delay_s >= 0.0 && c.bandwidth_hz > 0.0, "channel.max_delay_s", "delay/bandwidth must be non-negative");

    if (s.jammer.enabled) {
        const auto& j = s.jammer;
        require(finite(j.position) && j.position.z >= 0.0, "jammer.position", "coordinates must be finite with z >= 0");
        require(s.jammer_distance_m() > 0.0, "jammer.position", "coincides with uav_pos");
        require(j.power_ratio >= 0.0 && std::isfinite(j.power_ratio), "jammer.power_ratio", "must be >= 0");
        require(j.occupancy_fraction > 0.0 && j.occupancy_fraction < 1.0, "jammer.occupancy_fraction",
                "must lie in (0, 1)");
        require(j.slot_occupancy > 0.0 && j.slot_occupancy <= 1.0, "jammer.slot_occupancy", "must lie in (0, 1]");
        const auto nj = jammed_bin_count(j, s.fft_size);
        require(static_cast<std::uint64_t>(j.bin_offset) + nj <= s.fft_size, "jammer.bin_offset",
                "jammed band exceeds fft_size");
    }
}

std::vector<std::string> scenario_warnings(const ScenarioConfig& s) {
    std::vector<std::string> out;
    auto check = [&](double d, const char* what) {
        if (d < 10.0 || d > 350.0) {
            std::ostringstream os;
            os << what << " distance " << d << " m outside the 10-350 m range";
            out.push_back(os.str());
        }
    };
    check(s.bs_distance_m(), "uav-bs");
    if (s.jammer.enabled) check(s.jammer_distance_m(), "uav-jammer");
    return out;
}

double path_loss(double dist_m, const ChannelParams& params) {
    if (!(dist_m > 0.0)) throw DomainError("path_loss: distance must be positive");
    return std::pow(dist_m / params.ref_distance_m, params.path_loss_exponent);
}

double sample_shadowing_db(Rng& rng, double sigma_db) {
    if (sigma_db <= 0.0) return 0.0;
    std::normal_distribution<double> normal(0.0, sigma_db);
    return normal(rng);
}

double ChannelDraw::mean_power() const noexcept { return 1.0 / (path_loss * std::pow(10.0, shadowing_db / 10.0)); }

ChannelDraw sample_channel(const ScenarioConfig& s, Rng& rng) {
    const auto& c = s.channel;
    ChannelDraw draw;
    draw.path_loss = path_loss(s.bs_distance_m(), c);

    double los_amp = 1.0;
    double scatter_amp = 0.0;
    if (!(std::isinf(c.rician_k_db) && c.rician_k_db > 0.0)) {
        const double k = std::pow(10.0, c.rician_k_db / 10.0);
        los_amp = std::sqrt(k / (k + 1.0));
        scatter_amp = std::sqrt(1.0 / ((k + 1.0) * c.n_rays));
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const std::complex<double> los = std::polar(los_amp, 2.0 * std::numbers::pi * unit(rng));

    std::vector<std::complex<double>> alpha(c.n_rays);
    std::vector<double> tau(c.n_rays);
    for (int i = 0; i < c.n_rays; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        alpha[i] = {re, im};
        tau[i] = c.max_delay_s * unit(rng);
    }
    draw.shadowing_db = sample_shadowing_db(rng, c.shadow_sigma_db);
    const double norm = 1.0 / std::sqrt(draw.path_loss * std::pow(10.0, draw.shadowing_db / 10.0));

    const double bin_spacing = c.bandwidth_hz / s.fft_size;
    draw.gains.resize(s.fft_size);
    for (std::uint32_t k = 0; k < s.fft_size; ++k) {
        const double f = c.carrier_freq_hz + k * bin_spacing;
        std::complex<double> scatter{0.0, 0.0};
        if (scatter_amp > 0.0) {
            for (int i = 0; i < c.n_rays; ++i) {
                // exp(-j 2 pi f tau) with the phase reduced modulo 2 pi first
                const double cycles = f * tau[i];
                const double phase = -2.0 * std::numbers::pi * (cycles - std::floor(cycles));
                scatter += alpha[i] * std::polar(1.0, phase);
            }
        }
        draw.gains[k] = (los + scatter_amp * scatter) * norm;
    }
    return draw;
}

std::vector<std::complex<double>> sample_channel_gains(const ScenarioConfig& scenario, Rng& rng) {
    return sample_channel(scenario, rng).gains;
}

std::uint32_t jammed_bin_count(const JammerConfig& jammer, std::uint32_t fft_size) {
    const double raw = jammer.occupancy_fraction * fft_size;
    // guard against 0.1 * 1024 style products landing a hair above an integer
    const auto count = static_cast<std::uint32_t>(std::ceil(raw - 1e-9));
    return std::clamp<std::uint32_t>(count, 1, fft_size);
}

double jammer_noise_scale(const ScenarioConfig& s) {
    if (!s.jammer.enabled) return 0.0;
    const double f_ratio = static_cast<double>(s.fft_size) / jammed_bin_count(s.jammer, s.fft_size);
    const double link_ratio = path_loss(s.bs_distance_m(), s.channel) / path_loss(s.jammer_distance_m(), s.channel);
    return f_ratio * s.jammer.power_ratio * link_ratio * s.jammer.slot_occupancy;
}

ResourceBlock synthesize_block(const ScenarioConfig& s, Rng& rng, std::uint32_t block_index) {
    const ChannelDraw channel = sample_channel(s, rng);
    const double noise_var = channel.mean_power() / s.snr_linear;

    std::uint32_t jam_begin = 0;
    std::uint32_t jam_end = 0;
    double jam_var = 0.0;
    if (s.jammer.enabled) {
        jam_begin = s.jammer.bin_offset;
        jam_end = jam_begin + jammed_bin_count(s.jammer, s.fft_size);
        jam_var = jammer_noise_scale(s) * noise_var;
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    ResourceBlock block;
    block.label = s.label();
    block.scenario_id = s.scenario_id;
    block.block_index = block_index;
    block.power_dbm.resize(s.fft_size);
    for (std::uint32_t k = 0; k < s.fft_size; ++k) {
        const double var = noise_var + ((k >= jam_begin && k < jam_end) ? jam_var : 0.0);
        const double sd = std::sqrt(var / 2.0);
        const double re = normal(rng);
        const double im = normal(rng);
        // X_k = 1: unit-power constant-modulus symbol
        const std::complex<double> y = channel.gains[k] + std::complex<double>(re * sd, im * sd);
        const double p = std::max(std::norm(y), 1e-30);
        block.power_dbm[k] = static_cast<float>(10.0 * std::log10(p));
    }
    return block;
}

ResourceBlock synthesize_block(const ScenarioConfig& s, std::uint32_t block_index) {
    Rng rng = make_rng(s.seed, {stream::block, s.scenario_id, block_index});
    return synthesize_block(s, rng, block_index);
}

DatasetSpec DatasetSpec::paper() {
    DatasetSpec spec;
    spec.total_blocks = 483540;
    spec.bs_distances_m = {10.0, 30.0, 90.0, 200.0, 350.0};
    spec.jammer_distances_m = {10.0, 30.0, 90.0, 200.0, 350.0};
    spec.power_ratios = {1.0, 2.0, 5.0, 10.0, 20.0};
    return spec;
}

void validate(const DatasetSpec& spec) {
    require(spec.blocks_per_scenario >= 3, "blocks_per_scenario", "must be >= 3");
    require(is_power_of_two(spec.fft_size), "fft_size", "must be a power of two");
    require(spec.total_blocks >= 12, "total_blocks", "need at least 3 blocks per class (>= 12)");
    require(spec.good_snr > 0.0 && spec.bad_snr > 0.0, "snr", "must be positive");
    require(!spec.bs_distances_m.empty(), "bs_distances_m", "must not be empty");
    require(!spec.jammer_distances_m.empty(), "jammer_distances_m", "must not be empty");
    require(!spec.power_ratios.empty(), "power_ratios", "must not be empty");
    for (double d : spec.bs_distances_m) require(d > 0.0 && std::isfinite(d), "bs_distances_m", "must be positive");
    for (double d : spec.jammer_distances_m)
        require(d > 0.0 && std::isfinite(d), "jammer_distances_m", "must be positive");
    for (double p : spec.power_ratios) require(p >= 0.0 && std::isfinite(p), "power_ratios", "must be >= 0");
    require(spec.occupancy_min > 0.0 && spec.occupancy_max < 1.0 && spec.occupancy_min <= spec.occupancy_max,
            "occupancy", "range must satisfy 0 < min <= max < 1");
    if (!spec.allow_nonpaper) {
        require(spec.occupancy_min >= 0.08 - 1e-12 && spec.occupancy_max <= 0.10 + 1e-12, "occupancy",
                "outside the 0.08-0.10 band (use allow_nonpaper to override)");
        for (double p : spec.power_ratios)
            require(p >= 1.0 && p <= 20.0, "power_ratios", "outside 1-20 (use allow_nonpaper to override)");
    }
    require(spec.slot_occupancy > 0.0 && spec.slot_occupancy <= 1.0, "slot_occupancy", "must lie in (0, 1]");
    require(spec.uav_altitude_m >= 0.0, "uav_altitude_m", "must be >= 0");
}

std::vector<ScenarioConfig> plan_scenarios(const DatasetSpec& spec) {
    validate(spec);

    struct Cell {
        double bs;
        double jammer;
        double power;
    };
    std::vector<Cell> cells;
    for (double bs : spec.bs_distances_m)
        for (double jd : spec.jammer_distances_m)
            for (double pr : spec.power_ratios) cells.push_back({bs, jd, pr});

    // per-class block budgets, split into scenarios of >= blocks_per_scenario blocks
    std::vector<std::vector<std::uint32_t>> sizes(4);
    for (int c = 0; c < 4; ++c) {
        const std::uint64_t n = spec.total_blocks / 4 + (static_cast<std::uint64_t>(c) < spec.total_blocks % 4 ? 1 : 0);
        const std::uint64_t count = std::max<std::uint64_t>(1, n / spec.blocks_per_scenario);
        for (std::uint64_t i = 0; i < count; ++i)
            sizes[c].push_back(static_cast<std::uint32_t>(n / count + (i < n % count ? 1 : 0)));
    }

    std::vector<ScenarioConfig> out;
    std::size_t max_count = 0;
    for (const auto& s : sizes) max_count = std::max(max_count, s.size());

    const Position3D uav{0.0, 0.0, spec.uav_altitude_m};
    for (std::size_t i = 0; i < max_count; ++i) {
        for (int c = 0; c < 4; ++c) {
            if (i >= sizes[c].size()) continue;
            const auto label = static_cast<BlockLabel>(c);
            ScenarioConfig s;
            s.scenario_id = static_cast<std::uint32_t>(out.size());
            s.quality = quality_of(label);
            s.snr_linear = s.quality == ChannelQuality::Good ? spec.good_snr : spec.bad_snr;
            s.channel = spec.channel;
            s.fft_size = spec.fft_size;
            s.seed = spec.seed;
            s.block_count = sizes[c][i];
            s.uav_pos = uav;

            Rng geo = make_rng(spec.seed, {stream::geometry, s.scenario_id});
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const bool jammed = is_jamming(label);
            if (jammed) {
                const Cell& cell = cells[i % cells.size()];
                s.bs_pos = place_below(uav, cell.bs, geo);
                s.jammer.enabled = true;
                s.jammer.position = place_below(uav, cell.jammer, geo);
                s.jammer.power_ratio = cell.power;
                s.jammer.occupancy_fraction =
                    spec.occupancy_min + (spec.occupancy_max - spec.occupancy_min) * unit(geo);
                s.jammer.slot_occupancy = spec.slot_occupancy;
                const auto nj = jammed_bin_count(s.jammer, spec.fft_size);
                std::uniform_int_distribution<std::uint32_t> offset(0, spec.fft_size - nj);
                s.jammer.bin_offset = offset(geo);
            } else {
                s.bs_pos = place_below(uav, spec.bs_distances_m[i % spec.bs_distances_m.size()], geo);
                s.jammer.enabled = false;
                s.jammer.power_ratio = 0.0;
            }
            validate(s);
            out.push_back(s);
        }
    }
    return out;
}

std::vector<ScenarioConfig> generate_dataset(const DatasetSpec& spec, const BlockSink& sink) {
    auto scenarios = plan_scenarios(spec);
    for (const auto& s : scenarios)
        for (std::uint32_t b = 0; b < s.block_count; ++b) sink(synthesize_block(s, b));
    return scenarios;
}

const ScenarioConfig* Dataset::find_scenario(std::uint32_t id) const noexcept {
    if (id < scenarios.size() && scenarios[id].scenario_id == id) return &scenarios[id];
    for (const auto& s : scenarios)
        if (s.scenario_id == id) return &s;
    return nullptr;
}

Dataset generate_dataset(const DatasetSpec& spec) {
    Dataset ds;
    ds.fft_size = spec.fft_size;
    ds.scenarios = generate_dataset(spec, [&](const ResourceBlock& b) { ds.blocks.push_back(b); });
    return ds;
}

double mean_block_power_db(const ResourceBlock& block) noexcept {
    double sum = 0.0;
    for (float v : block.power_dbm) sum += v;
    return block.power_dbm.empty() ? 0.0 : sum / static_cast<double>(block.power_dbm.size());
}

MeanPowerDifference mean_power_difference(const std::vector<ResourceBlock>& blocks) {
    double sum[4] = {0, 0, 0, 0};
    std::size_t count[4] = {0, 0, 0, 0};
    for (const auto& b : blocks) {
        const int c = static_cast<int>(b.label);
        sum[c] += mean_block_power_db(b);
        ++count[c];
    }
    for (int c = 0; c < 4; ++c)
        if (count[c] == 0)
            throw DomainError(std::string("mean_power_difference: no blocks of class ") +
                              to_string(static_cast<BlockLabel>(c)));
    auto mean = [&](int c) { return sum[c] / static_cast<double>(count[c]); };
    MeanPowerDifference out;
    out.good_db = mean(2) - mean(0);
    out.bad_db = mean(3) - mean(1);
    out.good_pairs = std::min(count[0], count[2]);
    out.bad_pairs = std::min(count[1], count[3]);
    return out;
}

}  // namespace jamdet
