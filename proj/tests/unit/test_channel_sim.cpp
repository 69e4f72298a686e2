#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "jamdet/channel_sim.hpp"
#include "jamdet/error.hpp"

using namespace jamdet;

namespace {

// UAV at 100 m, BS straight below at `bs` metres, jammer level with the UAV.
ScenarioConfig geometry(double bs, double jam, bool jammed, double snr = 20.0) {
    ScenarioConfig s;
    s.uav_pos = {0.0, 0.0, 100.0};
    s.bs_pos = {0.0, 0.0, 100.0 - bs};
    s.snr_linear = snr;
    s.quality = snr >= 10.0 ? ChannelQuality::Good : ChannelQuality::Bad;
    s.seed = 42;
    s.fft_size = 1024;
    if (jammed) {
        s.jammer.enabled = true;
        s.jammer.position = {jam, 0.0, 100.0};
        s.jammer.power_ratio = 1.0;
        s.jammer.occupancy_fraction = 0.10;
        s.jammer.bin_offset = 200;
    }
    return s;
}

std::vector<double> mean_linear_power(const ScenarioConfig& s, std::uint32_t blocks) {
    std::vector<double> acc(s.fft_size, 0.0);
    for (std::uint32_t b = 0; b < blocks; ++b) {
        const ResourceBlock blk = synthesize_block(s, b);
        for (std::uint32_t k = 0; k < s.fft_size; ++k) acc[k] += std::pow(10.0, blk.power_dbm[k] / 10.0);
    }
    for (double& v : acc) v /= blocks;
    return acc;
}

// Mean linear power on the jammed band minus the mean elsewhere.
double jammed_excess(const ScenarioConfig& s, std::uint32_t blocks) {
    const auto p = mean_linear_power(s, blocks);
    const std::uint32_t nj = jammed_bin_count(s.jammer, s.fft_size);
    double in = 0.0, out = 0.0;
    for (std::uint32_t k = 0; k < s.fft_size; ++k) {
        const bool jammed = k >= s.jammer.bin_offset && k < s.jammer.bin_offset + nj;
        (jammed ? in : out) += p[k];
    }
    return in / nj - out / (s.fft_size - nj);
}

}  // namespace

TEST_CASE("path loss at the reference distance and known points") {
    ChannelParams p;
    for (double eta : {1.7, 2.0, 2.5, 3.3}) {
        p.path_loss_exponent = eta;
        CHECK(path_loss(10.0, p) == doctest::Approx(1.0));
    }
    p.path_loss_exponent = 2.0;
    CHECK(path_loss(100.0, p) == doctest::Approx(100.0));
    // 35^2.5 from an arbitrary-precision evaluation
    p.path_loss_exponent = 2.5;
    CHECK(std::abs(path_loss(350.0, p) - 7247.19773429703) < 0.1);
    CHECK(path_loss(20.0, p) >= 1.0);
}

TEST_CASE("path loss rejects non-positive distances") {
    ChannelParams p;
    CHECK_THROWS_AS(path_loss(0.0, p), DomainError);
    CHECK_THROWS_AS(path_loss(-5.0, p), DomainError);
}

TEST_CASE("shadowing draws") {
    Rng rng(7);
    CHECK(sample_shadowing_db(rng, 0.0) == 0.0);

    Rng a(99), b(99);
    CHECK(sample_shadowing_db(a, 2.0) == sample_shadowing_db(b, 2.0));

    // law of large numbers: 1e6 draws, mean within 0.01, std within 0.02
    Rng r(2024);
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = sample_shadowing_db(r, 2.0);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(sd - 2.0) < 0.02);
}

TEST_CASE("pure line of sight at the reference distance has unit gain") {
    ScenarioConfig s = geometry(10.0, 0.0, false);
    s.channel.rician_k_db = std::numeric_limits<double>::infinity();
    s.channel.shadow_sigma_db = 0.0;
    Rng rng(3);
    const auto h = sample_channel_gains(s, rng);
    REQUIRE(h.size() == s.fft_size);
    for (const auto& g : h) CHECK(std::abs(g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Rician gains are unit power after removing path loss and shadowing") {
    // Monte-Carlo: E[|H|^2 * PL * S] over 1e5 draws
    ScenarioConfig s = geometry(90.0, 0.0, false);
    s.fft_size = 16;
    Rng rng(11);
    const int draws = 100000;
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) {
        const ChannelDraw d = sample_channel(s, rng);
        double m = 0.0;
        for (const auto& g : d.gains) m += std::norm(g);
        acc += m / d.gains.size() / d.mean_power();
    }
    CHECK(std::abs(acc / draws - 1.0) < 0.02);
}

TEST_CASE("doubling the distance with eta = 2 quarters the gain") {
    ScenarioConfig near = geometry(40.0, 0.0, false);
    near.channel.path_loss_exponent = 2.0;
    ScenarioConfig far = geometry(80.0, 0.0, false);
    far.channel.path_loss_exponent = 2.0;
    Rng a(5), b(5);
    const auto h1 = sample_channel_gains(near, a);
    const auto h2 = sample_channel_gains(far, b);
    for (std::size_t k = 0; k < h1.size(); k += 97) CHECK(std::norm(h2[k]) / std::norm(h1[k]) == doctest::Approx(0.25));
}

TEST_CASE("coincident UAV and BS positions are rejected") {
    ScenarioConfig s = geometry(30.0, 0.0, false);
    s.bs_pos = s.uav_pos;
    CHECK_THROWS_AS(validate(s), ConfigError);
    Rng rng(1);
    CHECK_THROWS(sample_channel(s, rng));
}

TEST_CASE("jammer at the UAV position is rejected") {
    ScenarioConfig s = geometry(30.0, 30.0, true);
    s.jammer.position = s.uav_pos;
    CHECK_THROWS_AS(validate(s), ConfigError);
}

TEST_CASE("scenario validation names the offending field") {
    ScenarioConfig s = geometry(30.0, 30.0, true);
    s.snr_linear = 0.0;
    try {
        validate(s);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("snr_linear") != std::string::npos);
    }
    s = geometry(30.0, 30.0, true);
    s.fft_size = 1000;
    CHECK_THROWS_WITH_AS(validate(s), doctest::Contains("fft_size"), ConfigError);
    s = geometry(30.0, 30.0, true);
    s.jammer.bin_offset = 1000;
    CHECK_THROWS_WITH_AS(validate(s), doctest::Contains("bin_offset"), ConfigError);
}

TEST_CASE("out-of-range distances produce warnings only") {
    ScenarioConfig s = geometry(5.0, 400.0, true);
    CHECK_NOTHROW(validate(s));
    CHECK(scenario_warnings(s).size() == 2);
    CHECK(scenario_warnings(geometry(30.0, 30.0, true)).empty());
}

TEST_CASE("jammed bin count and jammer noise scale") {
    JammerConfig j;
    j.occupancy_fraction = 0.10;
    CHECK(jammed_bin_count(j, 1024) == 103);
    j.occupancy_fraction = 0.08;
    CHECK(jammed_bin_count(j, 1024) == 82);
    j.occupancy_fraction = 0.0996;  // 102 bins
    CHECK(jammed_bin_count(j, 1024) == 102);

    // F = 1024, F_kJ = 102, P_j/P_s = 5, equal link distances, I = 1
    ScenarioConfig s = geometry(30.0, 30.0, true);
    s.jammer.occupancy_fraction = 0.0996;
    s.jammer.power_ratio = 5.0;
    CHECK(jammer_noise_scale(s) == doctest::Approx(50.1960784313725).epsilon(1e-9));

    s.jammer.slot_occupancy = 0.5;
    CHECK(jammer_noise_scale(s) == doctest::Approx(50.1960784313725 / 2).epsilon(1e-9));
    s.jammer.enabled = false;
    CHECK(jammer_noise_scale(s) == 0.0);
}

TEST_CASE("blocks are deterministic per (seed, scenario, index)") {
    const ScenarioConfig s = geometry(90.0, 30.0, true);
    const auto a = synthesize_block(s, 4);
    const auto b = synthesize_block(s, 4);
    const auto c = synthesize_block(s, 5);
    CHECK(a.power_dbm == b.power_dbm);
    CHECK(a.power_dbm != c.power_dbm);
    CHECK(a.block_index == 4);
    CHECK(a.power_dbm.size() == s.fft_size);
    for (float v : a.power_dbm) CHECK(std::isfinite(v));
}

TEST_CASE("without a jammer the noise is uniform and labels are Normal") {
    for (double snr : {20.0, 1.0}) {
        const ScenarioConfig s = geometry(30.0, 0.0, false, snr);
        const auto blk = synthesize_block(s, 0);
        CHECK(blk.label == (snr == 20.0 ? BlockLabel::GoodNormal : BlockLabel::BadNormal));
        CHECK_FALSE(is_jamming(blk.label));
    }
    // no band stands out: a random contiguous 103-bin window is within noise of the rest
    ScenarioConfig s = geometry(30.0, 0.0, false);
    s.channel.rician_k_db = std::numeric_limits<double>::infinity();
    s.channel.shadow_sigma_db = 0.0;
    s.jammer.bin_offset = 200;
    s.jammer.occupancy_fraction = 0.10;
    CHECK(std::abs(jammed_excess(s, 500)) < 0.2 * (1.0 / path_loss(30.0, s.channel)) / s.snr_linear);
}

TEST_CASE("noise calibration: empirical SNR matches the configured SNR within 5%") {
    // pure LoS without shadowing: |H|^2 = 1 / PL exactly, so noise = E|Y|^2 - |H|^2
    for (double snr : {20.0, 1.0}) {
        ScenarioConfig s = geometry(30.0, 0.0, false, snr);
        s.channel.rician_k_db = std::numeric_limits<double>::infinity();
        s.channel.shadow_sigma_db = 0.0;
        const auto p = mean_linear_power(s, 10000);
        const double total = std::accumulate(p.begin(), p.end(), 0.0) / p.size();
        const double signal = 1.0 / path_loss(30.0, s.channel);
        const double measured = signal / (total - signal);
        CHECK(measured == doctest::Approx(snr).epsilon(0.05));
    }
}

TEST_CASE("jammed band excess follows the analytic scale within 5%") {
    ScenarioConfig s = geometry(30.0, 30.0, true);
    s.channel.shadow_sigma_db = 0.0;
    const double sigma2 = (1.0 / path_loss(30.0, s.channel)) / s.snr_linear;
    // (F / F_kJ) * (P_j / P_s) * (PL_bs / PL_j) * I, written out independently
    const double expected = (1024.0 / 103.0) * 1.0 * 1.0 * 1.0 * sigma2;
    CHECK(jammed_excess(s, 10000) == doctest::Approx(expected).epsilon(0.05));

    ScenarioConfig far = geometry(90.0, 30.0, true);
    far.channel.shadow_sigma_db = 0.0;
    far.jammer.power_ratio = 5.0;
    const double sigma2_far = (1.0 / path_loss(90.0, far.channel)) / far.snr_linear;
    const double expected_far = (1024.0 / 103.0) * 5.0 * std::pow(3.0, 2.5) * sigma2_far;
    CHECK(jammed_excess(far, 10000) == doctest::Approx(expected_far).epsilon(0.05));
}

TEST_CASE("jammed band sits at the same bins in every block") {
    ScenarioConfig s = geometry(90.0, 10.0, true);
    s.jammer.power_ratio = 20.0;
    const std::uint32_t nj = jammed_bin_count(s.jammer, s.fft_size);
    for (std::uint32_t b = 0; b < 3; ++b) {
        const auto blk = synthesize_block(s, b);
        double in = 0.0, out = 0.0;
        for (std::uint32_t k = 0; k < s.fft_size; ++k)
            (k >= s.jammer.bin_offset && k < s.jammer.bin_offset + nj ? in : out) += blk.power_dbm[k];
        CHECK(in / nj > out / (s.fft_size - nj) + 10.0);
    }
}

TEST_CASE("jammed excess is monotone in distance and power") {
    double prev = std::numeric_limits<double>::infinity();
    for (double jd : {10.0, 30.0, 90.0, 200.0}) {
        ScenarioConfig s = geometry(90.0, jd, true);
        s.jammer.power_ratio = 5.0;
        const double e = jammed_excess(s, 300);
        CHECK(e <= prev);
        prev = e;
    }
    prev = -std::numeric_limits<double>::infinity();
    for (double pr : {1.0, 2.0, 5.0, 10.0, 20.0}) {
        ScenarioConfig s = geometry(90.0, 90.0, true);
        s.jammer.power_ratio = pr;
        const double e = jammed_excess(s, 300);
        CHECK(e >= prev);
        prev = e;
    }
}

TEST_CASE("dataset spec validation") {
    DatasetSpec spec;
    CHECK_NOTHROW(validate(spec));
    spec.occupancy_min = spec.occupancy_max = 0.5;
    CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("occupancy"), ConfigError);
    spec.allow_nonpaper = true;
    CHECK_NOTHROW(validate(spec));

    DatasetSpec p;
    p.power_ratios = {30.0};
    CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("power_ratios"), ConfigError);
    DatasetSpec t;
    t.total_blocks = 8;
    CHECK_THROWS_WITH_AS(validate(t), doctest::Contains("total_blocks"), ConfigError);
}

TEST_CASE("scenario plan balances classes and keeps scenarios tripleable") {
    DatasetSpec spec;
    spec.total_blocks = 4000;
    const auto plan = plan_scenarios(spec);
    std::uint64_t per_class[4] = {0, 0, 0, 0};
    for (const auto& s : plan) {
        CHECK(s.block_count >= 3);
        per_class[static_cast<int>(s.label())] += s.block_count;
    }
    for (auto c : per_class) CHECK(c == 1000);

    spec.total_blocks = 4003;
    std::uint64_t odd[4] = {0, 0, 0, 0};
    for (const auto& s : plan_scenarios(spec)) odd[static_cast<int>(s.label())] += s.block_count;
    CHECK(odd[0] + odd[1] + odd[2] + odd[3] == 4003);
    for (auto c : odd) CHECK((c == 1000 || c == 1001));
}

TEST_CASE("paper preset plans 483,540 blocks, 120,885 per class") {
    const auto plan = plan_scenarios(DatasetSpec::paper());
    std::uint64_t per_class[4] = {0, 0, 0, 0};
    for (const auto& s : plan) per_class[static_cast<int>(s.label())] += s.block_count;
    CHECK(per_class[0] + per_class[1] + per_class[2] + per_class[3] == 483540);
    for (auto c : per_class) CHECK(c == 120885);
}

TEST_CASE("planned geometry hits the requested distances") {
    DatasetSpec spec;
    spec.total_blocks = 2000;
    for (const auto& s : plan_scenarios(spec)) {
        bool bs_ok = false;
        for (double d : spec.bs_distances_m) bs_ok = bs_ok || std::abs(s.bs_distance_m() - d) < 1e-6;
        CHECK(bs_ok);
        CHECK(s.bs_pos.z >= 0.0);
        if (s.jammer.enabled) {
            bool jd_ok = false;
            for (double d : spec.jammer_distances_m) jd_ok = jd_ok || std::abs(s.jammer_distance_m() - d) < 1e-6;
            CHECK(jd_ok);
            CHECK(s.jammer.occupancy_fraction >= 0.08);
            CHECK(s.jammer.occupancy_fraction <= 0.10);
        }
    }
}

TEST_CASE("generated blocks carry labels consistent with their scenario") {
    DatasetSpec spec;
    spec.total_blocks = 240;
    const Dataset ds = generate_dataset(spec);
    CHECK(ds.blocks.size() == 240);
    for (const auto& b : ds.blocks) {
        const ScenarioConfig* s = ds.find_scenario(b.scenario_id);
        REQUIRE(s != nullptr);
        CHECK(b.label == s->label());
        CHECK(is_jamming(b.label) == s->jammer.enabled);
        CHECK((quality_of(b.label) == ChannelQuality::Good) == (s->snr_linear == spec.good_snr));
    }
}

TEST_CASE("generation is reproducible and seed-sensitive") {
    DatasetSpec spec;
    spec.total_blocks = 120;
    const Dataset a = generate_dataset(spec);
    const Dataset b = generate_dataset(spec);
    spec.seed = 2;
    const Dataset c = generate_dataset(spec);
    REQUIRE(a.blocks.size() == b.blocks.size());
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        same = same && a.blocks[i].power_dbm == b.blocks[i].power_dbm;
        differs = differs || a.blocks[i].power_dbm != c.blocks[i].power_dbm;
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("mean power difference") {
    DatasetSpec spec;
    spec.total_blocks = 120;
    const Dataset ds = generate_dataset(spec);

    // every class compared to itself gives zero
    std::vector<ResourceBlock> mirrored;
    for (const auto& b : ds.blocks) {
        if (is_jamming(b.label)) continue;
        mirrored.push_back(b);
        ResourceBlock twin = b;
        twin.label = make_label(quality_of(b.label), true);
        mirrored.push_back(twin);
    }
    const auto zero = mean_power_difference(mirrored);
    CHECK(zero.good_db == doctest::Approx(0.0));
    CHECK(zero.bad_db == doctest::Approx(0.0));

    std::vector<ResourceBlock> normal_only;
    for (const auto& b : ds.blocks)
        if (!is_jamming(b.label)) normal_only.push_back(b);
    CHECK_THROWS_AS(mean_power_difference(normal_only), DomainError);

    ResourceBlock blk;
    blk.power_dbm = {1.0f, 2.0f, 3.0f, 6.0f};
    CHECK(mean_block_power_db(blk) == doctest::Approx(3.0));
}
