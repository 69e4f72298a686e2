#pragma once

// On-disk formats.
//
// Dataset file (little-endian):
//   "JAMD" | version u16 | fft_size u32 | block count u64
//   per block: label u8 | scenario_id u32 | block_index u32 | fft_size x float32 power_dbm
// Next to it, "<file>.meta.json" holds the scenario records.
//
// Feature file: CSV with header
//   rmse,label,channel_class,jammer_distance_m,bs_distance_m,power_ratio

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jamdet/channel_sim.hpp"
#include "jamdet/detector.hpp"

namespace jamdet {

inline constexpr std::uint16_t kDatasetFormatVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 4 + 2 + 4 + 8;

/// Writes `content` to a temporary sibling and renames it over `path`.
/// Throws IoError.
void atomic_write(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

/// Streams blocks into "<path>.tmp"; finish() patches the block count and
/// renames into place. Destroying an unfinished writer removes the temporary.
class DatasetWriter {
public:
    DatasetWriter(std::string path, std::uint32_t fft_size);
    ~DatasetWriter();
    DatasetWriter(const DatasetWriter&) = delete;
    DatasetWriter& operator=(const DatasetWriter&) = delete;

    void write(const ResourceBlock& block);
    void finish();
    std::uint64_t count() const noexcept { return count_; }

private:
    std::string path_;
    std::string tmp_path_;
    std::ofstream out_;
    std::uint32_t fft_size_;
    std::uint64_t count_ = 0;
    bool finished_ = false;
};

class DatasetReader {
public:
    /// Validates the header. Throws IoError for unreadable or truncated files
    /// and ConfigError for a bad magic or version mismatch.
    explicit DatasetReader(const std::string& path);

    std::uint32_t fft_size() const noexcept { return fft_size_; }
    std::uint64_t count() const noexcept { return count_; }
    /// Next block, or nullopt after the last one.
    std::optional<ResourceBlock> next();

private:
    std::string path_;
    std::ifstream in_;
    std::uint32_t fft_size_ = 0;
    std::uint64_t count_ = 0;
    std::uint64_t read_ = 0;
};

std::string metadata_path(const std::string& dataset_path);

std::string scenarios_to_json(const std::vector<ScenarioConfig>& scenarios);
std::vector<ScenarioConfig> scenarios_from_json(const std::string& text);

void write_dataset(const std::string& path, const Dataset& dataset);
/// Blocks plus the scenario sidecar when one exists.
Dataset read_dataset(const std::string& path);

/// One row per block: label,scenario_id,block_index,p0,...,p{N-1}.
void write_dataset_csv(const std::string& path, const std::vector<ResourceBlock>& blocks);
Dataset read_dataset_csv(const std::string& path);

std::string features_to_csv(const std::vector<FeatureRow>& rows);
void write_features_csv(const std::string& path, const std::vector<FeatureRow>& rows);
/// Throws ConfigError on a wrong header or malformed row, IoError if unreadable.
std::vector<FeatureRow> read_features_csv(const std::string& path);

}  // namespace jamdet
