#pragma once

// Air-to-ground received-power synthesis with an optional narrowband jammer.
//
// Each resource block holds N per-bin received powers |Y_k|^2 (in dBm, 0 dBm
// at unit linear power) where Y_k = H_k X_k + N_k. H_k is a Rician multipath
// channel normalized by path loss and log-normal shadowing, X_k are unit-power
// symbols and N_k is complex Gaussian noise calibrated to the scenario SNR.
// An enabled jammer adds extra noise power on one contiguous band of bins
// whose position is fixed for the whole scenario.

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jamdet/rng.hpp"

namespace jamdet {

struct Position3D {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

double distance(const Position3D& a, const Position3D& b) noexcept;

struct ChannelParams {
    int n_rays = 10;
    double rician_k_db = 10.0;  // +inf gives a pure line-of-sight channel
    double path_loss_exponent = 2.5;
    double ref_distance_m = 10.0;
    double shadow_sigma_db = 2.0;
    double carrier_freq_hz = 2.4e9;
    double bandwidth_hz = 20e6;
    double max_delay_s = 1e-6;  // ray delays are uniform in [0, max_delay_s)
};

struct JammerConfig {
    bool enabled = false;
    Position3D position;
    double power_ratio = 1.0;          // P_j / P_s
    double occupancy_fraction = 0.10;  // fraction of bins jammed
    double slot_occupancy = 1.0;       // fraction of slot time jammed
    std::uint32_t bin_offset = 0;
};

enum class ChannelQuality : std::uint8_t { Good = 0, Bad = 1 };

enum class BlockLabel : std::uint8_t { GoodNormal = 0, BadNormal = 1, GoodJamming = 2, BadJamming = 3 };

const char* to_string(BlockLabel label) noexcept;
const char* to_string(ChannelQuality quality) noexcept;
BlockLabel make_label(ChannelQuality quality, bool jammed) noexcept;
ChannelQuality quality_of(BlockLabel label) noexcept;
bool is_jamming(BlockLabel label) noexcept;

struct ScenarioConfig {
    std::uint32_t scenario_id = 0;
    Position3D uav_pos{0.0, 0.0, 100.0};
    Position3D bs_pos{0.0, 0.0, 0.0};
    ChannelQuality quality = ChannelQuality::Good;
    double snr_linear = 20.0;
    JammerConfig jammer;
    ChannelParams channel;
    std::uint32_t fft_size = 1024;
    std::uint64_t seed = 0;
    std::uint32_t block_count = 0;

    BlockLabel label() const noexcept { return make_label(quality, jammer.enabled); }
    double bs_distance_m() const noexcept { return distance(uav_pos, bs_pos); }
    double jammer_distance_m() const noexcept { return distance(uav_pos, jammer.position); }
};

/// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& scenario);

/// Non-fatal deviations from the paper-faithful operating range.
std::vector<std::string> scenario_warnings(const ScenarioConfig& scenario);

struct ResourceBlock {
    std::vector<float> power_dbm;
    BlockLabel label = BlockLabel::GoodNormal;
    std::uint32_t scenario_id = 0;
    std::uint32_t block_index = 0;
};

/// (d / d0)^eta. Throws DomainError for d <= 0.
double path_loss(double dist_m, const ChannelParams& params);

/// One draw of S|dB ~ N(0, sigma_db^2).
double sample_shadowing_db(Rng& rng, double sigma_db);

struct ChannelDraw {
    std::vector<std::complex<double>> gains;
    double path_loss = 1.0;
    double shadowing_db = 0.0;

    /// Expected |H_k|^2 for this draw, i.e. 1 / (PL * S_linear).
    double mean_power() const noexcept;
};

ChannelDraw sample_channel(const ScenarioConfig& scenario, Rng& rng);

/// Per-bin complex gains H_k, normalized so that E[|H_k|^2 * PL * S] = 1.
std::vector<std::complex<double>> sample_channel_gains(const ScenarioConfig& scenario, Rng& rng);

/// Number of bins the jammer occupies, ceil(rho * N).
std::uint32_t jammed_bin_count(const JammerConfig& jammer, std::uint32_t fft_size);

/// Jammer noise power on each jammed bin relative to the thermal noise floor:
/// (F / F_kJ) * (P_j / P_s) * (PL_bs / PL_jammer) * I.
double jammer_noise_scale(const ScenarioConfig& scenario);

ResourceBlock synthesize_block(const ScenarioConfig& scenario, Rng& rng, std::uint32_t block_index = 0);

/// Block synthesized from its deterministic substream (seed, scenario_id, block_index).
ResourceBlock synthesize_block(const ScenarioConfig& scenario, std::uint32_t block_index);

struct DatasetSpec {
    std::uint64_t total_blocks = 4000;
    std::uint32_t blocks_per_scenario = 9;
    std::uint32_t fft_size = 1024;
    double good_snr = 20.0;
    double bad_snr = 1.0;
    std::vector<double> bs_distances_m{30.0, 90.0, 350.0};
    std::vector<double> jammer_distances_m{10.0, 30.0, 90.0, 200.0, 350.0};
    std::vector<double> power_ratios{1.0, 2.0, 5.0, 10.0, 20.0};
    double occupancy_min = 0.08;
    double occupancy_max = 0.10;
    double slot_occupancy = 1.0;
    double uav_altitude_m = 100.0;
    ChannelParams channel;
    std::uint64_t seed = 1;
    bool allow_nonpaper = false;

    /// 483,540 blocks over the full distance/power grid.
    static DatasetSpec paper();
};

/// Throws ConfigError naming the offending field.
void validate(const DatasetSpec& spec);

/// Expands a dataset spec into its scenario list. Classes are balanced to
/// within one block; every scenario has at least three blocks.
std::vector<ScenarioConfig> plan_scenarios(const DatasetSpec& spec);

using BlockSink = std::function<void(const ResourceBlock&)>;

/// Streams every block of every planned scenario to `sink`, scenario by
/// scenario in block order. Returns the scenario list.
std::vector<ScenarioConfig> generate_dataset(const DatasetSpec& spec, const BlockSink& sink);

struct Dataset {
    std::uint32_t fft_size = 1024;
    std::vector<ResourceBlock> blocks;
    std::vector<ScenarioConfig> scenarios;

    const ScenarioConfig* find_scenario(std::uint32_t id) const noexcept;
};

Dataset generate_dataset(const DatasetSpec& spec);

struct MeanPowerDifference {
    double good_db = 0.0;
    double bad_db = 0.0;
    std::size_t good_pairs = 0;
    std::size_t bad_pairs = 0;
};

/// Mean over blocks of the per-block mean dBm value.
double mean_block_power_db(const ResourceBlock& block) noexcept;

/// mean(block power | jamming) - mean(block power | no jamming) per channel
/// quality. Throws DomainError if any of the four classes is missing.
MeanPowerDifference mean_power_difference(const std::vector<ResourceBlock>& blocks);

}  // namespace jamdet
