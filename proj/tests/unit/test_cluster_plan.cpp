#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "bf/cluster_plan.hpp"
#include "bf/errors.hpp"
#include "packing_oracle.hpp"

using namespace bf;

namespace {

ClusterModel small_cluster(int n_psets) {
    ClusterModel c;
    c.n_psets = n_psets;
    return c;
}

} // namespace

TEST(BeamRate, Examples) {
    EXPECT_DOUBLE_EQ(beam_rate(OutputMode::ComplexVoltages, 1, 248), 6.2e9);
    EXPECT_DOUBLE_EQ(beam_rate(OutputMode::StokesIQUV, 1, 248), 6.2e9);
    EXPECT_DOUBLE_EQ(beam_rate(OutputMode::StokesI, 1, 248), 1.55e9);
    EXPECT_NEAR(beam_rate(OutputMode::StokesI, 1, 248) / kGbps, 1.5, 0.05 + 1e-12);
    EXPECT_DOUBLE_EQ(beam_rate(OutputMode::StokesI, 16, 248), 96.875e6);
    EXPECT_NEAR(450 * beam_rate(OutputMode::StokesI, 16, 248) / kGbps, 44, 0.5);
    EXPECT_THROW(beam_rate(OutputMode::StokesIQUV, 2, 248), ConfigError);
    EXPECT_THROW(beam_rate(OutputMode::StokesI, 0, 248), ConfigError);
}

TEST(StationInputRate, Examples) {
    EXPECT_NEAR(station_input_rate_total(64) / kGbps, 198, 0.5);
    EXPECT_NEAR(station_input_rate_total(24) / kGbps, 74, 0.5);
    EXPECT_NEAR(station_input_rate_total(4) / kGbps, 12, 0.5);
    EXPECT_DOUBLE_EQ(station_input_rate_total(1), 3.1e9);
    EXPECT_THROW(station_input_rate_total(0), RangeError);
    EXPECT_THROW(station_input_rate_total(65), RangeError);
    // 248 subbands x 195312.5 samples/s x 8 bytes is exactly 3.1 Gb/s.
    EXPECT_DOUBLE_EQ(248 * kSubbandRate * 8 * 8, 3.1e9);
}

TEST(TableRates, OutputRatesOfHighlightedCases) {
    struct Case {
        OutputMode mode;
        int integration, beams;
        double gbps;
    };
    const Case cases[] = {{OutputMode::StokesI, 16, 450, 44}, {OutputMode::StokesI, 16, 310, 30},
                          {OutputMode::StokesI, 8, 155, 30},  {OutputMode::StokesIQUV, 1, 13, 81},
                          {OutputMode::StokesIQUV, 1, 10, 62}, {OutputMode::StokesI, 1, 42, 65}};
    for (const auto& c : cases)
        EXPECT_NEAR(c.beams * beam_rate(c.mode, c.integration, 248) / kGbps, c.gbps, 0.5);
}

TEST(ClusterModel, Validation) {
    ClusterModel c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.input_cores_per_pset(), 48);
    EXPECT_TRUE(c.is_output_core(48));
    EXPECT_FALSE(c.is_output_core(47));
    EXPECT_TRUE(c.is_output_core(64 + 63));
    EXPECT_DOUBLE_EQ(c.ionode_cap(23, 24), 1.1e9);
    EXPECT_DOUBLE_EQ(c.ionode_cap(24, 24), 3.1e9);
    auto bad = [](auto&& mutate) {
        ClusterModel d;
        mutate(d);
        EXPECT_THROW(d.validate(), ConfigError);
    };
    bad([](auto& d) { d.ionode_output_cap_with_station = 4e9; });
    bad([](auto& d) { d.storage_cap = 0; });
    bad([](auto& d) { d.stations_per_ionode = 2; });
    bad([](auto& d) { d.output_cores_per_pset = 64; });
    bad([](auto& d) { d.n_psets = 0; });
}

TEST(PlanOutput, IquvTwentyFourStations) {
    const ClusterModel c;
    const auto p13 = plan_output(c, OutputMode::StokesIQUV, 1, 24, 13);
    EXPECT_TRUE(p13.feasible) << p13.reason;
    EXPECT_TRUE(validate_plan(c, p13).empty());
    EXPECT_NEAR(p13.total_rate / kGbps, 80.6, 1e-9);
    EXPECT_FALSE(plan_output(c, OutputMode::StokesIQUV, 1, 24, 14).feasible);
}

TEST(PlanOutput, IquvSixtyFourStations) {
    const ClusterModel c;
    const auto p = plan_output(c, OutputMode::StokesIQUV, 1, 64, 10);
    EXPECT_TRUE(p.feasible) << p.reason;
    EXPECT_TRUE(validate_plan(c, p).empty());
    EXPECT_NEAR(p.total_rate / kGbps, 62, 0.5);
    for (double cap : p.ionode_cap)
        EXPECT_DOUBLE_EQ(cap, 1.1e9);
    EXPECT_FALSE(plan_output(c, OutputMode::StokesIQUV, 1, 64, 11).feasible);
    const auto report = plan_report(p);
    EXPECT_NE(report.find("62"), std::string::npos) << report;
}

TEST(PlanOutput, ZeroBeamsIsEmptyAndFeasible) {
    const auto p = plan_output(ClusterModel{}, OutputMode::StokesIQUV, 1, 24, 0);
    EXPECT_TRUE(p.feasible);
    EXPECT_TRUE(p.parts.empty());
    EXPECT_EQ(p.total_rate, 0.0);
}

TEST(PlanOutput, PartsAreComponentSplitAndPsetLocal) {
    const ClusterModel c;
    const auto p = plan_output(c, OutputMode::ComplexVoltages, 1, 64, 5);
    ASSERT_TRUE(p.feasible) << p.reason;
    for (const auto& part : p.parts) {
        EXPECT_EQ(part.n_components, 2);
        EXPECT_EQ(part.output_core / c.cores_per_pset, part.pset);
        EXPECT_TRUE(c.is_output_core(part.output_core));
        EXPECT_LE(part.rate, c.ionode_cap(part.pset, 64) + 1e-3);
    }
    // 3.1 Gb/s per polarisation cannot fit a 1.1 Gb/s node in one piece.
    EXPECT_EQ(p.subband_split, 3);
}

TEST(PlanOutput, FromObservationConfigIncludesIncoherentBeam) {
    ObservationConfig cfg;
    cfg.n_stations = 4;
    cfg.n_subbands = 16;
    cfg.mode = OutputMode::StokesI;
    cfg.integration_factor = 4;
    cfg.beam_directions = {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}};
    cfg.include_incoherent = true;
    const ClusterModel c;
    const auto p = plan_output(c, cfg);
    ASSERT_TRUE(p.feasible);
    EXPECT_EQ(p.n_beams, 4);
    EXPECT_EQ(p.n_subbands, 16);
    int incoherent = 0;
    for (const auto& part : p.parts)
        incoherent += part.incoherent ? 1 : 0;
    EXPECT_EQ(incoherent, 1);
    EXPECT_TRUE(validate_plan(c, p).empty());
    EXPECT_DOUBLE_EQ(p.total_rate, 4 * beam_rate(OutputMode::StokesI, 4, 16));
}

TEST(MaxBeams, Endpoints) {
    const ClusterModel c;
    EXPECT_EQ(max_beams(c, OutputMode::StokesIQUV, 1, 24), 13);
    EXPECT_EQ(max_beams(c, OutputMode::StokesIQUV, 1, 64), 10);
    EXPECT_EQ(max_beams(c, OutputMode::StokesI, 1, 64), 42);
    EXPECT_FALSE(plan_output(c, OutputMode::StokesI, 1, 64, 43).feasible);
}

TEST(MaxBeams, MonotoneInRateAndCapacity) {
    const ClusterModel c;
    for (int st : {4, 24, 64}) {
        int prev = 0;
        for (int integ : {1, 2, 4, 8, 16}) {
            const int n = max_beams(c, OutputMode::StokesI, integ, st);
            EXPECT_GE(n, prev) << st << " " << integ;
            prev = n;
        }
        EXPECT_LE(max_beams(c, OutputMode::StokesIQUV, 1, st), max_beams(c, OutputMode::StokesI, 1, st));
        EXPECT_EQ(max_beams(c, OutputMode::StokesIQUV, 1, st),
                  max_beams(c, OutputMode::ComplexVoltages, 1, st));
    }
    // More capacity never hurts.
    for (OutputMode m : {OutputMode::StokesIQUV, OutputMode::StokesI}) {
        int prev = 0;
        for (double cap : {0.5e9, 1.1e9, 2.0e9, 3.1e9}) {
            ClusterModel d;
            d.ionode_output_cap_with_station = cap;
            const int n = max_beams(d, m, 1, 64);
            EXPECT_GE(n, prev);
            prev = n;
        }
        prev = 1 << 30;
        for (int st : {1, 8, 24, 48, 64}) {
            const int n = max_beams(c, m, 1, st);
            EXPECT_LE(n, prev);
            prev = n;
        }
        ClusterModel more = c;
        more.storage_cap = 200e9;
        EXPECT_GE(max_beams(more, m, 1, 24), max_beams(c, m, 1, 24));
    }
}

TEST(ValidatePlan, CatchesCorruptedPlans) {
    const ClusterModel c;
    const auto good = plan_output(c, OutputMode::StokesIQUV, 1, 24, 12);
    ASSERT_TRUE(good.feasible);
    ASSERT_TRUE(validate_plan(c, good).empty());

    auto input_core = good;
    input_core.parts[0].output_core = input_core.parts[0].pset * 64 + 3;
    EXPECT_FALSE(validate_plan(c, input_core).empty());

    auto other_pset = good;
    other_pset.parts[0].output_core = ((other_pset.parts[0].pset + 1) % 64) * 64 + 50;
    EXPECT_FALSE(validate_plan(c, other_pset).empty());

    auto overloaded = good;
    for (auto& p : overloaded.parts) {
        p.pset = 0;
        p.output_core = 48;
    }
    EXPECT_FALSE(validate_plan(c, overloaded).empty());

    auto missing = good;
    missing.parts.pop_back();
    EXPECT_FALSE(validate_plan(c, missing).empty());

    auto duplicated = good;
    duplicated.parts.push_back(duplicated.parts.front());
    EXPECT_FALSE(validate_plan(c, duplicated).empty());

    auto wrong_rate = good;
    wrong_rate.parts[0].rate *= 0.5;
    EXPECT_FALSE(validate_plan(c, wrong_rate).empty());

    auto under_reserved = good;
    under_reserved.parts[0].reserved = 0;
    EXPECT_FALSE(validate_plan(c, under_reserved).empty());

    ClusterModel small_storage = c;
    small_storage.storage_cap = 10e9;
    EXPECT_FALSE(validate_plan(small_storage, good).empty());
}

TEST(Packing, FirstFitDecreasingBasics) {
    // Sorted: 3, 2, 2, 1.  3 -> bin 0, 2 -> bin 1, 2 -> bin 1, 1 -> bin 0.
    const std::vector<double> sizes{1, 3, 2, 2};
    const auto r = pack_first_fit_decreasing(sizes, std::vector<double>{4, 4});
    ASSERT_TRUE(r);
    EXPECT_EQ(*r, (std::vector<int>{0, 0, 1, 1}));
    EXPECT_FALSE(pack_first_fit_decreasing(std::vector<double>{5}, std::vector<double>{4, 4}));
    EXPECT_TRUE(pack_first_fit_decreasing(std::vector<double>{}, std::vector<double>{}));
}

// On every instance the planner can generate on a desk-sized cluster (at most
// 8 I/O nodes, at most 20 pieces), first-fit-decreasing finds a packing
// exactly when one exists.
TEST(Packing, FirstFitDecreasingMatchesExhaustiveSearch) {
    std::mt19937_64 rng(2024);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const OutputMode modes[] = {OutputMode::ComplexVoltages, OutputMode::StokesIQUV, OutputMode::StokesI};
    int instances = 0, feasible = 0;
    while (instances < 3000) {
        const int nodes = pick(1, 8);
        const OutputMode mode = modes[pick(0, 2)];
        const int integ = mode == OutputMode::StokesI ? 1 << pick(0, 4) : 1;
        const int beams = pick(0, 6);
        const bool inc = pick(0, 1) == 1;
        const int subbands = pick(1, 248);
        const int k = pick(1, 3);
        const auto items = oracle::plan_pieces(mode, integ, beams, inc, subbands, k);
        if (items.empty() || items.size() > 20)
            continue;
        std::vector<double> caps;
        const int stations = pick(0, nodes);
        for (int n = 0; n < nodes; ++n)
            caps.push_back(n < stations ? 1.1e9 : 3.1e9);
        // Also irregular capacities.
        if (pick(0, 1))
            for (auto& cap : caps)
                cap = 1e8 * pick(1, 40);
        const bool want = oracle::brute_force_fits(items, caps);
        EXPECT_EQ(oracle::ffd_fits(items, caps), want) << "instance " << instances;
        feasible += want ? 1 : 0;
        ++instances;
    }
    // Both outcomes must be exercised.
    EXPECT_GT(feasible, 300);
    EXPECT_LT(feasible, 2700);
}

TEST(Packing, PlannerFeasibilityMatchesExhaustiveSearch) {
    std::mt19937_64 rng(77);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int trial = 0; trial < 300; ++trial) {
        ClusterModel c = small_cluster(pick(1, 8));
        c.storage_cap = 1e12;
        const OutputMode mode = pick(0, 1) ? OutputMode::StokesIQUV : OutputMode::StokesI;
        const int stations = pick(1, c.n_psets), subbands = pick(1, 248), beams = pick(1, 5);
        const auto plan = plan_output(c, mode, 1, stations, beams, subbands);
        bool any = false;
        for (int k = 1; k <= 3 && !any; ++k) {
            const auto items = oracle::plan_pieces(mode, 1, beams, false, subbands, k);
            if (items.size() > 20)
                break;
            std::vector<double> caps;
            for (int n = 0; n < c.n_psets; ++n)
                caps.push_back(c.ionode_cap(n, stations));
            any = oracle::brute_force_fits(items, caps);
        }
        if (oracle::plan_pieces(mode, 1, beams, false, subbands, 3).size() <= 20)
            EXPECT_EQ(plan.feasible, any) << trial;
        if (plan.feasible)
            EXPECT_TRUE(validate_plan(c, plan).empty());
    }
}

TEST(Exchange, RoundRobinLoads) {
    const auto all = plan_first_exchange(64, 248, 248);
    for (int n : all.subbands_per_core())
        EXPECT_EQ(n, 1);
    const auto m = plan_first_exchange(64, 248, 64);
    const auto loads = m.subbands_per_core();
    EXPECT_EQ(loads.size(), 64u);
    for (int n : loads)
        EXPECT_TRUE(n == 3 || n == 4) << n;
    EXPECT_EQ(std::accumulate(loads.begin(), loads.end(), 0), 248);
    const auto one = plan_first_exchange(1, 1, 1);
    EXPECT_EQ(one.subbands_per_core(), std::vector<int>{1});
    EXPECT_EQ(one.input_core(0, 0, 0), 0);
    EXPECT_THROW(plan_first_exchange(1, 1, std::vector<int>{}), RangeError);
}

TEST(Exchange, AllStationsOfASubbandMeet) {
    const auto m = plan_first_exchange(12, 30, 7);
    for (int sb = 0; sb < 30; ++sb)
        for (int block : {0, 5})
            for (int st = 1; st < 12; ++st)
                EXPECT_EQ(m.input_core(st, sb, block), m.input_core(0, sb, block));
}

TEST(Exchange, PlanExchangesUsesInputAndOutputCores) {
    const ClusterModel c;
    const auto plan = plan_output(c, OutputMode::StokesIQUV, 1, 24, 13);
    const auto ex = plan_exchanges(c, plan);
    EXPECT_EQ(int(ex.input_cores.size()), c.n_input_cores());
    for (int core : ex.input_cores)
        EXPECT_FALSE(c.is_output_core(core));
    ASSERT_EQ(ex.part_output_core.size(), plan.parts.size());
    for (std::size_t i = 0; i < plan.parts.size(); ++i) {
        EXPECT_EQ(ex.part_output_core[i], plan.parts[i].output_core);
        EXPECT_EQ(ex.output_core(int(i), 3, 9), plan.parts[i].output_core);
    }
    for (int n : ex.subbands_per_core())
        EXPECT_LE(n, 1);
}

TEST(PlanJson, RoundTrip) {
    const ClusterModel c;
    for (const auto& plan : {plan_output(c, OutputMode::StokesIQUV, 1, 24, 13),
                             plan_output(c, OutputMode::StokesI, 4, 64, 7, 100),
                             plan_output(c, OutputMode::StokesIQUV, 1, 24, 14)}) {
        const auto back = plan_from_json(plan_to_json(plan));
        EXPECT_EQ(back.feasible, plan.feasible);
        EXPECT_EQ(back.reason, plan.reason);
        EXPECT_EQ(back.mode, plan.mode);
        EXPECT_EQ(back.integration_factor, plan.integration_factor);
        EXPECT_EQ(back.n_beams, plan.n_beams);
        EXPECT_EQ(back.n_stations, plan.n_stations);
        EXPECT_EQ(back.n_subbands, plan.n_subbands);
        EXPECT_EQ(back.subband_split, plan.subband_split);
        EXPECT_DOUBLE_EQ(back.total_rate, plan.total_rate);
        ASSERT_EQ(back.parts.size(), plan.parts.size());
        for (std::size_t i = 0; i < plan.parts.size(); ++i) {
            const auto &a = back.parts[i], &b = plan.parts[i];
            EXPECT_EQ(a.beam, b.beam);
            EXPECT_EQ(a.incoherent, b.incoherent);
            EXPECT_EQ(a.first_component, b.first_component);
            EXPECT_EQ(a.n_components, b.n_components);
            EXPECT_EQ(a.first_subband, b.first_subband);
            EXPECT_EQ(a.n_subbands, b.n_subbands);
            EXPECT_DOUBLE_EQ(a.rate, b.rate);
            EXPECT_DOUBLE_EQ(a.reserved, b.reserved);
            EXPECT_EQ(a.pset, b.pset);
            EXPECT_EQ(a.output_core, b.output_core);
        }
        if (plan.feasible)
            EXPECT_TRUE(validate_plan(c, back).empty());
    }
}

TEST(PlanJson, MalformedInput) {
    EXPECT_THROW(plan_from_json("not json"), MalformedInputError);
    EXPECT_THROW(plan_from_json("{}"), MalformedInputError);
    EXPECT_THROW(plan_from_json(R"({"format": "something-else", "version": 1})"), MalformedInputError);
}
