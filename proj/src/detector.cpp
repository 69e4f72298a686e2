#include "jamdet/detector.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <thread>

#include "jamdet/error.hpp"

namespace jamdet {

namespace {

SampleMeta meta_for(const ScenarioConfig* s, BlockLabel label, std::uint32_t scenario_id, std::uint32_t triple) {
    SampleMeta m;
    m.scenario_id = scenario_id;
    m.triple_index = triple;
    m.quality = quality_of(label);
    if (s != nullptr) {
        m.bs_distance_m = s->bs_distance_m();
        if (s->jammer.enabled) {
            m.jammer_distance_m = s->jammer_distance_m();
            m.power_ratio = s->jammer.power_ratio;
        }
    }
    return m;
}

std::size_t ceil_div10(std::size_t v) { return std::max<std::size_t>(1, (v + 9) / 10); }

}  // namespace

const char* to_string(BinaryLabel label) noexcept { return label == BinaryLabel::Jamming ? "Jamming" : "Normal"; }

std::vector<double> normalize(std::span<const double> sample) {
    if (sample.size() < 2) throw DomainError("normalize: need at least two points");
    const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw DomainError("normalize: constant sample");
    std::vector<double> out(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) out[i] = (sample[i] - *lo) / range;
    return out;
}

TripleSet make_triples(const std::vector<ResourceBlock>& blocks, const std::vector<ScenarioConfig>& scenarios) {
    std::map<std::uint32_t, const ScenarioConfig*> by_id;
    for (const auto& s : scenarios) by_id[s.scenario_id] = &s;

    // scenario groups in order of first appearance
    std::vector<std::uint32_t> order;
    std::map<std::uint32_t, std::vector<const ResourceBlock*>> groups;
    for (const auto& b : blocks) {
        auto [it, inserted] = groups.try_emplace(b.scenario_id);
        if (inserted) order.push_back(b.scenario_id);
        it->second.push_back(&b);
    }

    TripleSet out;
    for (std::uint32_t id : order) {
        auto& group = groups[id];
        if (group.size() < 3) {
            out.skipped_scenarios.push_back(id);
            out.dropped_blocks += group.size();
            continue;
        }
        std::stable_sort(group.begin(), group.end(),
                         [](const ResourceBlock* a, const ResourceBlock* b) { return a->block_index < b->block_index; });
        const auto it = by_id.find(id);
        const ScenarioConfig* scenario = it == by_id.end() ? nullptr : it->second;

        const std::size_t triples = group.size() / 3;
        out.dropped_blocks += group.size() - 3 * triples;
        for (std::size_t t = 0; t < triples; ++t) {
            std::vector<double> concat;
            for (std::size_t k = 0; k < 3; ++k) {
                const auto& p = group[3 * t + k]->power_dbm;
                concat.insert(concat.end(), p.begin(), p.end());
            }
            TripleSample sample;
            const BlockLabel label = group[3 * t]->label;
            sample.label = is_jamming(label) ? BinaryLabel::Jamming : BinaryLabel::Normal;
            sample.meta = meta_for(scenario, label, id, static_cast<std::uint32_t>(t));
            try {
                sample.values = normalize(concat);
            } catch (const DomainError&) {
                ++out.degenerate;
                continue;
            }
            out.samples.push_back(std::move(sample));
        }
    }
    return out;
}

TripleSample triple_for(const Dataset& dataset, std::uint32_t scenario_id, std::uint32_t triple_index) {
    std::vector<ResourceBlock> blocks;
    for (const auto& b : dataset.blocks)
        if (b.scenario_id == scenario_id) blocks.push_back(b);
    std::sort(blocks.begin(), blocks.end(),
              [](const ResourceBlock& a, const ResourceBlock& b) { return a.block_index < b.block_index; });
    if (blocks.size() < 3 * (static_cast<std::size_t>(triple_index) + 1))
        throw ConfigError("scenario " + std::to_string(scenario_id) + " has no triple " + std::to_string(triple_index));

    std::vector<double> concat;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& p = blocks[3 * triple_index + k].power_dbm;
        concat.insert(concat.end(), p.begin(), p.end());
    }
    TripleSample sample;
    const BlockLabel label = blocks[3 * triple_index].label;
    sample.label = is_jamming(label) ? BinaryLabel::Jamming : BinaryLabel::Normal;
    sample.meta = meta_for(dataset.find_scenario(scenario_id), label, scenario_id, triple_index);
    sample.values = normalize(concat);
    return sample;
}

StlParams triple_stl_params(std::uint32_t fft_size) {
    StlParams p;
    p.period = fft_size;
    const StlParams r = p.resolved(3 * static_cast<std::size_t>(fft_size));
    p.trend_jump = ceil_div10(r.trend_span);
    p.lowpass_jump = ceil_div10(r.lowpass_span);
    return p;
}

double triple_rmse(std::span<const double> values, const StlParams& params) {
    const StlDecomposition d = stl_decompose(values, params);
    return reconstruction_rmse(values, reconstruct(d));
}

FeatureBatch extract_features(std::span<const TripleSample> triples, const StlParams& params, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, triples.size())));

    std::vector<FeatureRow> rows(triples.size());
    std::vector<std::string> errors(triples.size());
    std::vector<char> ok(triples.size(), 0);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                rows[i].rmse = triple_rmse(triples[i].values, params);
                rows[i].label = triples[i].label;
                rows[i].meta = triples[i].meta;
                ok[i] = 1;
            } catch (const std::exception& e) {
                errors[i] = "scenario " + std::to_string(triples[i].meta.scenario_id) + " triple " +
                            std::to_string(triples[i].meta.triple_index) + ": " + e.what();
            }
        }
    };

    if (threads <= 1) {
        work(0, triples.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (triples.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(triples.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }

    FeatureBatch out;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        if (ok[i])
            out.rows.push_back(rows[i]);
        else
            out.failures.push_back(std::move(errors[i]));
    }
    return out;
}

}  // namespace jamdet
