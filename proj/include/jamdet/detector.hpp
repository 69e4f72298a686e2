#pragma once

// Triple-block samples and the STL reconstruction-error feature.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jamdet/channel_sim.hpp"
#include "jamdet/stl.hpp"

namespace jamdet {

enum class BinaryLabel : std::uint8_t { Normal = 0, Jamming = 1 };

const char* to_string(BinaryLabel label) noexcept;

struct SampleMeta {
    std::uint32_t scenario_id = 0;
    std::uint32_t triple_index = 0;
    ChannelQuality quality = ChannelQuality::Good;
    double jammer_distance_m = 0.0;  // 0 when no jammer
    double bs_distance_m = 0.0;
    double power_ratio = 0.0;  // 0 when no jammer
};

struct TripleSample {
    std::vector<double> values;  // 3 * fft_size, min-max normalized
    BinaryLabel label = BinaryLabel::Normal;
    SampleMeta meta;
};

struct TripleSet {
    std::vector<TripleSample> samples;
    std::size_t dropped_blocks = 0;  // leftovers after the last full triple
    std::vector<std::uint32_t> skipped_scenarios;  // fewer than three blocks
    std::size_t degenerate = 0;  // constant samples, excluded
};

/// Min-max scaling to [0, 1]. Throws DomainError for fewer than two points
/// or a constant sample.
std::vector<double> normalize(std::span<const double> sample);

/// Non-overlapping consecutive triples within each scenario, concatenated in
/// block order and normalized. Scenario metadata is looked up in `scenarios`
/// when present.
TripleSet make_triples(const std::vector<ResourceBlock>& blocks, const std::vector<ScenarioConfig>& scenarios = {});

/// Concatenated, normalized triple `triple_index` of one scenario.
TripleSample triple_for(const Dataset& dataset, std::uint32_t scenario_id, std::uint32_t triple_index);

/// STL settings used for triples: period = fft_size, periodic seasonal,
/// jumps of roughly a tenth of each span.
StlParams triple_stl_params(std::uint32_t fft_size);

struct FeatureRow {
    double rmse = 0.0;
    BinaryLabel label = BinaryLabel::Normal;
    SampleMeta meta;
};

struct FeatureBatch {
    std::vector<FeatureRow> rows;
    std::vector<std::string> failures;  // one message per sample that could not be scored
};

/// RMSE between a sample and its trend + seasonal reconstruction.
double triple_rmse(std::span<const double> values, const StlParams& params);

/// Scores every triple; per-sample failures are collected, not thrown.
/// `threads` == 0 uses the hardware concurrency.
FeatureBatch extract_features(std::span<const TripleSample> triples, const StlParams& params, unsigned threads = 1);

}  // namespace jamdet
