#include "fvsim/error.hpp"
#include "fvsim/fv_engine.hpp"
#include "fvsim/oracle.hpp"
#include "fvsim/stats.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace fvsim;
using testing_support::single_state;
using testing_support::two_state;

TEST(RunFV, UniformLeftTerminatesAtMaxStart) {
    Rng rng(1);
    StopCriteria stop;
    const auto traj = run_fv(uniform_left(1.0), Initial<double>::point(0.3, 0.7), stop, rng,
                             {.record_skeleton = true});
    ASSERT_EQ(traj.branches(), 2u);
    EXPECT_EQ(traj.branch_times[0], 0.3);
    EXPECT_NEAR(traj.branch_positions[0], 0.4, 1e-15);
    EXPECT_EQ(traj.verdict, Verdict::ExtinctSimultaneous);
    EXPECT_EQ(*traj.extinction_time, 0.7);
    EXPECT_EQ(traj.skeleton.back().kind, EventKind::DeathBoth);
    EXPECT_FALSE(traj.skeleton.back().x.has_value());
}

TEST(RunFV, UniformLeftSupremumIsBitExact) {
    Rng pick(99);
    StopCriteria stop;
    for (int i = 0; i < 20000; ++i) {
        const double x = 1.0 - uniform01(pick);
        const double y = 1.0 - uniform01(pick);
        Rng rng(0);
        const auto traj = run_fv(uniform_left(1.0), Initial<double>::point(x, y), stop, rng);
        ASSERT_EQ(traj.verdict, Verdict::ExtinctSimultaneous);
        ASSERT_EQ(*traj.extinction_time, std::max(x, y)) << x << " " << y;
    }
}

TEST(RunFV, SingleStateNeverDies) {
    Rng rng(2);
    StopCriteria stop;
    stop.max_branches = 100000;
    const auto traj = run_fv(single_state(1.0), Initial<std::size_t>::delta(), stop, rng);
    EXPECT_EQ(traj.verdict, Verdict::SurvivedToCap);
    EXPECT_EQ(traj.branches(), 100000u);
    const auto r = stats::three_sigma_test(traj.gaps, 0.5, "gap", "");
    EXPECT_TRUE(r.pass) << r.estimate.value_or(0.0);
}

TEST(RunFV, TwoStateBranchRate) {
    Rng rng(3);
    StopCriteria stop;
    stop.max_branches = 100000;
    const auto chain = two_state(1, 1, 1);
    const auto traj = run_fv(chain, Initial<std::size_t>::delta(), stop, rng);
    EXPECT_EQ(traj.verdict, Verdict::SurvivedToCap);
    const double rate = traj.branch_times.back() / static_cast<double>(traj.branches());
    const double half_norm = 0.5 * oracle::g_norm(chain);
    EXPECT_NEAR(rate / half_norm, 1.0, 0.02);
}

TEST(RunFV, TrajectoryInvariants) {
    Rng build(4);
    const auto chain = random_symmetric_chain(4, build);
    Rng rng(5);
    StopCriteria stop;
    stop.max_branches = 2000;
    const auto traj =
        run_fv(chain, Initial<std::size_t>::product(), stop, rng, {.record_skeleton = true});
    double last = 0.0;
    for (std::size_t n = 0; n < traj.branches(); ++n) {
        EXPECT_GT(traj.branch_times[n], last);
        EXPECT_GT(traj.gaps[n], 0.0);
        EXPECT_TRUE(chain.contains(traj.branch_positions[n]));
        last = traj.branch_times[n];
    }
    std::vector<double> skeleton_branches;
    double prev = 0.0;
    for (const auto& e : traj.skeleton) {
        EXPECT_GE(e.time, prev);
        prev = e.time;
        if (e.kind == EventKind::Branch) {
            skeleton_branches.push_back(e.time);
            EXPECT_EQ(e.x, e.y);
        }
    }
    EXPECT_EQ(skeleton_branches, traj.branch_times);
    EXPECT_EQ(traj.skeleton.front().time, 0.0);
    EXPECT_EQ(traj.tie_count, 0u);
}

TEST(RunFV, Deterministic) {
    const auto chain = two_state(1, 1, 2);
    StopCriteria stop;
    stop.max_branches = 500;
    Rng a = make_rng(7, 3), b = make_rng(7, 3);
    const auto ta = run_fv(chain, Initial<std::size_t>::delta(), stop, a);
    const auto tb = run_fv(chain, Initial<std::size_t>::delta(), stop, b);
    EXPECT_EQ(ta.branch_times, tb.branch_times);
    EXPECT_EQ(ta.branch_positions, tb.branch_positions);
}

TEST(RunFV, ConservativeChainHitsHorizon) {
    const auto chain = two_state(1, 0, 0);
    Rng rng(6);
    StopCriteria stop;
    stop.time_horizon = 10.0;
    const auto traj = run_fv(chain, Initial<std::size_t>::point(0, 1), stop, rng,
                             {.record_skeleton = true});
    EXPECT_EQ(traj.verdict, Verdict::HorizonReached);
    EXPECT_EQ(traj.end_time, 10.0);
    EXPECT_EQ(traj.branches(), 0u);
    EXPECT_EQ(traj.skeleton.back().kind, EventKind::Censor);
}

TEST(RunFV, BadInitials) {
    Rng rng(1);
    StopCriteria stop;
    EXPECT_THROW(run_fv(bessel(-1.0), Initial<double>::delta(), stop, rng), InvalidInitial);
    EXPECT_THROW(run_fv(two_state(1, 1, 1), Initial<std::size_t>::point(0, 5), stop, rng),
                 InvalidInitial);
    StopCriteria bad;
    bad.extinction_window = 0;
    EXPECT_THROW(run_fv(two_state(1, 1, 1), Initial<std::size_t>::delta(), bad, rng),
                 InvalidArgument);
}

TEST(ExtinctionVerdict, Examples) {
    const std::vector<double> flat(40, 1.0);
    EXPECT_FALSE(extinction_verdict(flat, 0.01, 10));
    std::vector<double> geometric;
    for (int n = 1; n <= 40; ++n) geometric.push_back(std::ldexp(1.0, -n));
    EXPECT_TRUE(extinction_verdict(geometric, 0.01, 10));
    EXPECT_THROW(extinction_verdict(flat, 0.01, 41), WindowTooLarge);
}

TEST(ErgodicAverage, SingleStateConstant) {
    Rng rng(8);
    StopCriteria stop;
    stop.time_horizon = 50.0;
    stop.max_branches = 1000000;
    const auto traj = run_fv(single_state(1.0), Initial<std::size_t>::delta(), stop, rng,
                             {.record_skeleton = true});
    const std::function<double(std::size_t, std::size_t)> one = [](std::size_t, std::size_t) {
        return 1.0;
    };
    EXPECT_NEAR(ergodic_average(traj, one, 50.0), 1.0, 1e-14);
    EXPECT_NEAR(occupation_fractions(traj, 1, 50.0)(0, 0), 1.0, 1e-14);
    EXPECT_THROW(ergodic_average(traj, one, 60.0), HorizonExceedsTrajectory);
}

TEST(ErgodicAverage, TwoStateOccupation) {
    const auto chain = two_state(1, 1, 1);
    Rng rng(9);
    StopCriteria stop;
    stop.time_horizon = 1e5;
    stop.max_branches = 100000000;
    const auto traj =
        run_fv(chain, Initial<std::size_t>::delta(), stop, rng, {.record_skeleton = true});
    const std::function<double(std::size_t, std::size_t)> diag = [](std::size_t i, std::size_t j) {
        return i == j ? 1.0 : 0.0;
    };
    const std::function<double(std::size_t, std::size_t)> off = [](std::size_t i, std::size_t j) {
        return i == 0 && j == 1 ? 1.0 : 0.0;
    };
    EXPECT_NEAR(ergodic_average(traj, diag, 1e5), 2.0 / 3.0, 0.01);
    EXPECT_NEAR(ergodic_average(traj, off, 1e5), 1.0 / 6.0, 0.01);
    const auto occ = occupation_fractions(traj, 2, 1e5);
    EXPECT_NEAR(occ.sum(), 1.0, 1e-12);
    const std::vector<FVTrajectory<std::size_t>> runs{traj};
    EXPECT_TRUE(stats::occupation_measure_test(runs, chain, 1e5).pass);
}

TEST(EmbeddedChain, SingleState) {
    Rng rng(10);
    const auto step = embedded_chain_sample(single_state(1.0), 0, rng);
    EXPECT_EQ(step.next, std::optional<std::size_t>(0));
    EXPECT_GT(step.sigma, 0.0);
}

TEST(EmbeddedChain, StationaryUnderM) {
    const auto chain = two_state(1, 1, 2);
    Rng rng(11);
    std::vector<std::uint64_t> counts(2, 0);
    for (int i = 0; i < 100000; ++i) {
        const auto step = embedded_chain_sample(chain, chain.sample_reference(rng), rng);
        ++counts[*step.next];
    }
    const auto z = oracle::z_distribution_exact(chain, oracle::delta_law(chain));
    const std::vector<double> p{z.states(0), z.states(1)};
    EXPECT_TRUE(stats::chi_square_gof(counts, p).pass);
}

TEST(EmbeddedChain, BrownianDeltaStartIsUniform) {
    const auto model = brownian_interval(0.0, 1.0);
    Rng rng(12);
    std::vector<double> z;
    for (int i = 0; i < 1000; ++i) {
        const auto step = embedded_chain_sample(model, model.sample_reference(rng), rng);
        z.push_back(*step.next);
    }
    EXPECT_TRUE(stats::ks_uniform_test(z).pass);
}

TEST(EmbeddedChain, ConservativeStateIsCensored) {
    Rng rng(1);
    EXPECT_THROW(embedded_chain_sample(two_state(0, 1, 0), 1, rng), CensoredStep);
    EXPECT_THROW(embedded_chain_sample(two_state(1, 1, 1), 2, rng), InvalidStart);
}

TEST(EmbeddedChain, RestartIsMarkov) {
    // From a delta start the law of (Z_n, sigma_n) does not depend on n.
    const auto chain = two_state(1, 1, 2);
    StopCriteria stop;
    stop.max_branches = 50;
    std::vector<std::uint64_t> first(2, 0), later(2, 0);
    std::vector<double> s1, s50;
    for (std::uint64_t r = 0; r < 5000; ++r) {
        Rng rng = make_rng(13, r);
        const auto traj = run_fv(chain, Initial<std::size_t>::delta(), stop, rng);
        ++first[traj.branch_positions[0]];
        ++later[traj.branch_positions[49]];
        s1.push_back(traj.gaps[0]);
        s50.push_back(traj.gaps[49]);
    }
    EXPECT_TRUE(stats::chi_square_homogeneity(first, later).pass);
    EXPECT_TRUE(stats::ks_two_sample(s1, s50).pass);
}
