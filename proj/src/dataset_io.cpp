#include "jamdet/dataset_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "jamdet/error.hpp"

namespace jamdet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kMagic[4] = {'J', 'A', 'M', 'D'};
const char* const kFeatureHeader = "rmse,label,channel_class,jammer_distance_m,bs_distance_m,power_ratio";

template <typename T>
void put_le(std::string& buf, T value) {
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf.push_back(static_cast<char>(u & 0xFF));
        u = static_cast<U>(u >> 8);
    }
}

template <typename T>
T get_le(const unsigned char* p) {
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<U>((u << 8) | p[i]);
    return static_cast<T>(u);
}

std::string unique_tmp(const std::string& path) { return path + ".tmp"; }

std::string fmt_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw DomainError("cannot format number");
    return std::string(buf, end);
}

double parse_double(std::string_view s, const std::string& what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(what + ": not a number: '" + std::string(s) + "'");
    return v;
}

std::uint64_t parse_uint(std::string_view s, const std::string& what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(what + ": not an integer: '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view chomp(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
    return line;
}

json position_json(const Position3D& p) { return json::array({p.x, p.y, p.z}); }

Position3D position_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = unique_tmp(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write failed for '" + tmp + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for '" + path + "'");
    return ss.str();
}

// --- binary dataset ---

DatasetWriter::DatasetWriter(std::string path, std::uint32_t fft_size)
    : path_(std::move(path)), tmp_path_(unique_tmp(path_)), fft_size_(fft_size) {
    if (fft_size_ == 0) throw ConfigError("fft_size: must be > 0");
    out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open '" + tmp_path_ + "' for writing");
    std::string header(kMagic, 4);
    put_le<std::uint16_t>(header, kDatasetFormatVersion);
    put_le<std::uint32_t>(header, fft_size_);
    put_le<std::uint64_t>(header, 0);  // patched by finish()
    out_.write(header.data(), static_cast<std::streamsize>(header.size()));
}

DatasetWriter::~DatasetWriter() {
    if (!finished_) {
        out_.close();
        std::error_code ec;
        fs::remove(tmp_path_, ec);
    }
}

void DatasetWriter::write(const ResourceBlock& block) {
    if (finished_) throw ConfigError("DatasetWriter: already finished");
    if (block.power_dbm.size() != fft_size_)
        throw ConfigError("block has " + std::to_string(block.power_dbm.size()) + " bins, expected " +
                          std::to_string(fft_size_));
    std::string buf;
    buf.reserve(9 + 4 * block.power_dbm.size());
    buf.push_back(static_cast<char>(block.label));
    put_le<std::uint32_t>(buf, block.scenario_id);
    put_le<std::uint32_t>(buf, block.block_index);
    for (float v : block.power_dbm) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));
    out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out_) throw IoError("write failed for '" + tmp_path_ + "'");
    ++count_;
}

void DatasetWriter::finish() {
    if (finished_) return;
    std::string count;
    put_le<std::uint64_t>(count, count_);
    out_.seekp(4 + 2 + 4);
    out_.write(count.data(), 8);
    out_.flush();
    if (!out_) throw IoError("write failed for '" + tmp_path_ + "'");
    out_.close();
    std::error_code ec;
    fs::rename(tmp_path_, path_, ec);
    if (ec) throw IoError("cannot rename '" + tmp_path_ + "' to '" + path_ + "'");
    finished_ = true;
}

DatasetReader::DatasetReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open dataset '" + path + "'");
    unsigned char header[kDatasetHeaderBytes];
    in_.read(reinterpret_cast<char*>(header), sizeof(header));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(header)))
        throw IoError("dataset '" + path + "': truncated header");
    if (std::memcmp(header, kMagic, 4) != 0) throw ConfigError("dataset '" + path + "': not a JAMD file");
    const auto version = get_le<std::uint16_t>(header + 4);
    if (version != kDatasetFormatVersion)
        throw ConfigError("dataset '" + path + "': format version mismatch (expected " +
                          std::to_string(kDatasetFormatVersion) + ", found " + std::to_string(version) + ")");
    fft_size_ = get_le<std::uint32_t>(header + 6);
    count_ = get_le<std::uint64_t>(header + 10);
    if (fft_size_ == 0) throw ConfigError("dataset '" + path + "': fft_size is 0");

    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    const std::uint64_t expected = kDatasetHeaderBytes + count_ * (9 + 4ull * fft_size_);
    if (!ec && size != expected)
        throw IoError("dataset '" + path + "': size " + std::to_string(size) + " bytes, header implies " +
                      std::to_string(expected));
}

std::optional<ResourceBlock> DatasetReader::next() {
    if (read_ >= count_) return std::nullopt;
    std::vector<unsigned char> buf(9 + 4ull * fft_size_);
    in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in_.gcount() != static_cast<std::streamsize>(buf.size()))
        throw IoError("dataset '" + path_ + "': truncated at block " + std::to_string(read_));
    ResourceBlock b;
    if (buf[0] > 3) throw ConfigError("dataset '" + path_ + "': invalid label " + std::to_string(buf[0]));
    b.label = static_cast<BlockLabel>(buf[0]);
    b.scenario_id = get_le<std::uint32_t>(buf.data() + 1);
    b.block_index = get_le<std::uint32_t>(buf.data() + 5);
    b.power_dbm.resize(fft_size_);
    for (std::uint32_t k = 0; k < fft_size_; ++k)
        b.power_dbm[k] = std::bit_cast<float>(get_le<std::uint32_t>(buf.data() + 9 + 4 * k));
    ++read_;
    return b;
}

// --- scenario sidecar ---

std::string metadata_path(const std::string& dataset_path) { return dataset_path + ".meta.json"; }

std::string scenarios_to_json(const std::vector<ScenarioConfig>& scenarios) {
    json arr = json::array();
    for (const auto& s : scenarios) {
        const auto& c = s.channel;
        json ch = {{"n_rays", c.n_rays},
                   {"path_loss_exponent", c.path_loss_exponent},
                   {"ref_distance_m", c.ref_distance_m},
                   {"shadow_sigma_db", c.shadow_sigma_db},
                   {"carrier_freq_hz", c.carrier_freq_hz},
                   {"bandwidth_hz", c.bandwidth_hz},
                   {"max_delay_s", c.max_delay_s}};
        // JSON has no infinity; null stands for a pure line-of-sight channel
        ch["rician_k_db"] = std::isinf(c.rician_k_db) ? json(nullptr) : json(c.rician_k_db);
        json rec = {{"scenario_id", s.scenario_id},
                    {"label", to_string(s.label())},
                    {"quality", to_string(s.quality)},
                    {"uav_pos", position_json(s.uav_pos)},
                    {"bs_pos", position_json(s.bs_pos)},
                    {"bs_distance_m", s.bs_distance_m()},
                    {"snr_linear", s.snr_linear},
                    {"fft_size", s.fft_size},
                    {"seed", s.seed},
                    {"block_count", s.block_count},
                    {"channel", ch}};
        rec["jammer"] = {{"enabled", s.jammer.enabled},
                         {"position", position_json(s.jammer.position)},
                         {"distance_m", s.jammer.enabled ? s.jammer_distance_m() : 0.0},
                         {"power_ratio", s.jammer.power_ratio},
                         {"occupancy_fraction", s.jammer.occupancy_fraction},
                         {"slot_occupancy", s.jammer.slot_occupancy},
                         {"bin_offset", s.jammer.bin_offset}};
        arr.push_back(std::move(rec));
    }
    return arr.dump(1);
}

std::vector<ScenarioConfig> scenarios_from_json(const std::string& text) {
    json arr;
    try {
        arr = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario metadata: malformed JSON: ") + e.what());
    }
    if (!arr.is_array()) throw ConfigError("scenario metadata: expected a JSON array");
    std::vector<ScenarioConfig> out;
    out.reserve(arr.size());
    try {
        for (const auto& rec : arr) {
            ScenarioConfig s;
            s.scenario_id = rec.at("scenario_id").get<std::uint32_t>();
            s.quality = rec.at("quality").get<std::string>() == "Bad" ? ChannelQuality::Bad : ChannelQuality::Good;
            s.uav_pos = position_from(rec.at("uav_pos"));
            s.bs_pos = position_from(rec.at("bs_pos"));
            s.snr_linear = rec.at("snr_linear").get<double>();
            s.fft_size = rec.at("fft_size").get<std::uint32_t>();
            s.seed = rec.at("seed").get<std::uint64_t>();
            s.block_count = rec.at("block_count").get<std::uint32_t>();
            const auto& ch = rec.at("channel");
            s.channel.n_rays = ch.at("n_rays").get<int>();
            s.channel.path_loss_exponent = ch.at("path_loss_exponent").get<double>();
            s.channel.ref_distance_m = ch.at("ref_distance_m").get<double>();
            s.channel.shadow_sigma_db = ch.at("shadow_sigma_db").get<double>();
            s.channel.carrier_freq_hz = ch.at("carrier_freq_hz").get<double>();
            s.channel.bandwidth_hz = ch.at("bandwidth_hz").get<double>();
            s.channel.max_delay_s = ch.at("max_delay_s").get<double>();
            const auto& k = ch.at("rician_k_db");
            s.channel.rician_k_db = k.is_null() ? std::numeric_limits<double>::infinity() : k.get<double>();
            const auto& j = rec.at("jammer");
            s.jammer.enabled = j.at("enabled").get<bool>();
            s.jammer.position = position_from(j.at("position"));
            s.jammer.power_ratio = j.at("power_ratio").get<double>();
            s.jammer.occupancy_fraction = j.at("occupancy_fraction").get<double>();
            s.jammer.slot_occupancy = j.at("slot_occupancy").get<double>();
            s.jammer.bin_offset = j.at("bin_offset").get<std::uint32_t>();
            out.push_back(s);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario metadata: ") + e.what());
    }
    return out;
}

void write_dataset(const std::string& path, const Dataset& dataset) {
    DatasetWriter w(path, dataset.fft_size);
    for (const auto& b : dataset.blocks) w.write(b);
    atomic_write(metadata_path(path), scenarios_to_json(dataset.scenarios));
    w.finish();
}

Dataset read_dataset(const std::string& path) {
    DatasetReader r(path);
    Dataset d;
    d.fft_size = r.fft_size();
    d.blocks.reserve(r.count());
    while (auto b = r.next()) d.blocks.push_back(std::move(*b));
    const std::string meta = metadata_path(path);
    if (fs::exists(meta)) d.scenarios = scenarios_from_json(read_text_file(meta));
    return d;
}

// --- CSV ---

void write_dataset_csv(const std::string& path, const std::vector<ResourceBlock>& blocks) {
    if (blocks.empty()) throw ConfigError("dataset CSV: no blocks");
    const std::size_t n = blocks.front().power_dbm.size();
    std::string out = "label,scenario_id,block_index";
    for (std::size_t k = 0; k < n; ++k) out += ",p" + std::to_string(k);
    out += '\n';
    char buf[32];
    for (const auto& b : blocks) {
        if (b.power_dbm.size() != n) throw ConfigError("dataset CSV: blocks differ in length");
        out += std::to_string(static_cast<int>(b.label)) + ',' + std::to_string(b.scenario_id) + ',' +
               std::to_string(b.block_index);
        for (float v : b.power_dbm) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
            out += ',';
            out.append(buf, end);
        }
        out += '\n';
    }
    atomic_write(path, out);
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("dataset CSV '" + path + "': empty file");
    const auto header = split_csv(chomp(line));
    if (header.size() < 4 || header[0] != "label" || header[1] != "scenario_id" || header[2] != "block_index")
        throw ConfigError("dataset CSV '" + path + "': unexpected header");
    const std::size_t n = header.size() - 3;
    Dataset d;
    d.fft_size = static_cast<std::uint32_t>(n);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = chomp(line);
        if (view.empty()) continue;
        const auto f = split_csv(view);
        const std::string where = "dataset CSV line " + std::to_string(line_no);
        if (f.size() != n + 3) throw ConfigError(where + ": expected " + std::to_string(n + 3) + " fields");
        ResourceBlock b;
        const auto label = parse_uint(f[0], where);
        if (label > 3) throw ConfigError(where + ": invalid label");
        b.label = static_cast<BlockLabel>(label);
        b.scenario_id = static_cast<std::uint32_t>(parse_uint(f[1], where));
        b.block_index = static_cast<std::uint32_t>(parse_uint(f[2], where));
        b.power_dbm.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            float v = 0.0f;
            auto [ptr, ec] = std::from_chars(f[k + 3].data(), f[k + 3].data() + f[k + 3].size(), v);
            if (ec != std::errc() || ptr != f[k + 3].data() + f[k + 3].size())
                throw ConfigError(where + ": not a number");
            b.power_dbm[k] = v;
        }
        d.blocks.push_back(std::move(b));
    }
    if (in.bad()) throw IoError("read failed for '" + path + "'");
    return d;
}

std::string features_to_csv(const std::vector<FeatureRow>& rows) {
    std::string out = kFeatureHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += fmt_double(r.rmse);
        out += ',';
        out += to_string(r.label);
        out += ',';
        out += to_string(r.meta.quality);
        out += ',' + fmt_double(r.meta.jammer_distance_m) + ',' + fmt_double(r.meta.bs_distance_m) + ',' +
               fmt_double(r.meta.power_ratio) + '\n';
    }
    return out;
}

void write_features_csv(const std::string& path, const std::vector<FeatureRow>& rows) {
    atomic_write(path, features_to_csv(rows));
}

std::vector<FeatureRow> read_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || chomp(line) != kFeatureHeader)
        throw ConfigError("feature CSV '" + path + "': header mismatch (expected '" + kFeatureHeader + "')");
    std::vector<FeatureRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = chomp(line);
        if (view.empty()) continue;
        const auto f = split_csv(view);
        const std::string where = "feature CSV line " + std::to_string(line_no);
        if (f.size() != 6) throw ConfigError(where + ": expected 6 fields");
        FeatureRow r;
        r.rmse = parse_double(f[0], where);
        if (f[1] == "Jamming")
            r.label = BinaryLabel::Jamming;
        else if (f[1] == "Normal")
            r.label = BinaryLabel::Normal;
        else
            throw ConfigError(where + ": label must be Normal or Jamming");
        if (f[2] == "Good")
            r.meta.quality = ChannelQuality::Good;
        else if (f[2] == "Bad")
            r.meta.quality = ChannelQuality::Bad;
        else
            throw ConfigError(where + ": channel_class must be Good or Bad");
        r.meta.jammer_distance_m = parse_double(f[3], where);
        r.meta.bs_distance_m = parse_double(f[4], where);
        r.meta.power_ratio = parse_double(f[5], where);
        rows.push_back(r);
    }
    if (in.bad()) throw IoError("read failed for '" + path + "'");
    return rows;
}

}  // namespace jamdet
