#include "fvsim/diffusion.hpp"
#include "fvsim/error.hpp"
#include "fvsim/stats.hpp"

#include <gtest/gtest.h>

using namespace fvsim;

TEST(UniformLeft, ExcursionArithmetic) {
    const auto model = uniform_left(1.0);
    Rng rng(1);
    const auto ex = sample_excursion(model, 0.3, 0.7, kInfinity, rng);
    EXPECT_EQ(ex.sigma, 0.3);
    EXPECT_EQ(ex.died, Died::X);
    ASSERT_TRUE(ex.survivor.has_value());
    EXPECT_NEAR(*ex.survivor, 0.4, 1e-15);
    // the residual is the exact rounding error of the survivor position
    const long double exact = static_cast<long double>(0.7) - static_cast<long double>(0.3);
    EXPECT_EQ(static_cast<long double>(*ex.survivor) + ex.survivor_residual, exact);
    EXPECT_FALSE(ex.tie);
}

TEST(UniformLeft, ResidualOfInexactDifference) {
    const double x = 0.23853617806159969, y = 0.11172563292205863;
    Rng rng(1);
    const auto ex = sample_excursion(uniform_left(1.0), x, y, kInfinity, rng);
    EXPECT_EQ(ex.died, Died::Y);
    EXPECT_NE(ex.survivor_residual, 0.0);
    const long double exact = static_cast<long double>(x) - static_cast<long double>(y);
    EXPECT_EQ(static_cast<long double>(*ex.survivor) + ex.survivor_residual, exact);
}

TEST(UniformLeft, EqualStartsDieTogether) {
    Rng rng(1);
    const auto ex = sample_excursion(uniform_left(1.0), 0.25, 0.25, kInfinity, rng);
    EXPECT_EQ(ex.died, Died::Both);
    EXPECT_FALSE(ex.survivor.has_value());
    EXPECT_EQ(ex.sigma, 0.25);
}

TEST(UniformLeft, LifetimeIsStart) {
    Rng rng(1);
    EXPECT_EQ(sample_lifetime(uniform_left(1.0), 0.42, rng), 0.42);
}

TEST(UniformLeft, CensoredBeforeDeath) {
    Rng rng(1);
    const auto ex = sample_excursion(uniform_left(1.0), 0.5, 0.8, 0.2, rng);
    EXPECT_TRUE(ex.censored());
    EXPECT_EQ(ex.died, Died::None);
    EXPECT_NEAR(*ex.x_end, 0.3, 1e-15);
    EXPECT_NEAR(*ex.y_end, 0.6, 1e-15);
}

TEST(Diffusion, Validation) {
    EXPECT_THROW(brownian_interval(1.0, 0.0), ModelValidationError);
    EXPECT_THROW(brownian_interval(0.0, 1.0, 0.0), ModelValidationError);
    EXPECT_THROW(bessel(-1.0, -1e-4), ModelValidationError);
    EXPECT_THROW(bessel(-1.0, 1e-4, true, 0.0), ModelValidationError);
    EXPECT_THROW(uniform_left(-1.0), ModelValidationError);
    EXPECT_NO_THROW(bessel(-1.0));
}

TEST(Diffusion, StartOutsideDomainThrows) {
    Rng rng(1);
    EXPECT_THROW(sample_excursion(brownian_interval(0, 1), 1.5, 0.5, 1.0, rng), InvalidStart);
    EXPECT_THROW(sample_excursion(brownian_interval(0, 1), 0.0, 0.5, 1.0, rng), InvalidStart);
}

TEST(Diffusion, BesselHasNoReferenceSample) {
    const auto model = bessel(-1.0);
    EXPECT_FALSE(model.has_finite_reference());
    Rng rng(1);
    EXPECT_THROW(model.sample_reference(rng), InvalidInitial);
    EXPECT_DOUBLE_EQ(model.drift(2.0), -0.5);
    EXPECT_DOUBLE_EQ(model.kill_level(), 1e-2 * 1e-2);
}

TEST(Diffusion, BridgeCrossingProbability) {
    EXPECT_DOUBLE_EQ(bridge_crossing_probability(0.0, 0.1, 1e-4), 1.0);
    EXPECT_DOUBLE_EQ(bridge_crossing_probability(0.1, -0.1, 1e-4), 1.0);
    EXPECT_DOUBLE_EQ(bridge_crossing_probability(0.01, 0.02, 1e-4), std::exp(-4.0));
}

TEST(Diffusion, BrownianMeanLifetime) {
    const auto model = brownian_interval(0.0, 1.0);
    Rng rng(21);
    std::vector<double> life;
    for (int i = 0; i < 4000; ++i) life.push_back(sample_lifetime(model, 0.3, rng));
    const auto r = stats::three_sigma_test(life, 0.21, "lifetime", "");
    EXPECT_TRUE(r.pass) << r.estimate.value_or(0.0);
}

TEST(Diffusion, SameSeedSameExcursion) {
    const auto model = brownian_interval(0.0, 1.0);
    Rng a(5), b(5);
    const auto ea = sample_excursion(model, 0.4, 0.6, kInfinity, a);
    const auto eb = sample_excursion(model, 0.4, 0.6, kInfinity, b);
    EXPECT_EQ(ea.sigma, eb.sigma);
    EXPECT_EQ(ea.survivor, eb.survivor);
}

TEST(Diffusion, TiesKeepPreStepPosition) {
    // A coarse step makes simultaneous exits common.
    const auto model = brownian_interval(0.0, 1.0, 0.5, false);
    Rng rng(3);
    int ties = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto ex = sample_excursion(model, 0.5, 0.5, kInfinity, rng);
        ASSERT_NE(ex.died, Died::Both);
        ASSERT_TRUE(ex.survivor.has_value());
        if (ex.tie) {
            ++ties;
            // the first step starts from the initial position
            if (ex.sigma == 0.5) EXPECT_EQ(*ex.survivor, 0.5);
        }
        EXPECT_TRUE(model.contains(*ex.survivor));
    }
    EXPECT_GT(ties, 0);
}

TEST(Diffusion, HorizonTruncatesLastStep) {
    const auto model = brownian_interval(0.0, 100.0);
    Rng rng(2);
    const auto ex = sample_excursion(model, 50.0, 50.0, 0.01234, rng);
    ASSERT_TRUE(ex.censored());
    EXPECT_EQ(ex.sigma, 0.01234);
}

TEST(Diffusion, PathIsRecorded) {
    const auto model = brownian_interval(0.0, 1.0);
    Rng rng(4);
    Path<double> path;
    const auto ex = sample_excursion(model, 0.5, 0.5, kInfinity, rng, &path);
    ASSERT_FALSE(path.empty());
    for (std::size_t i = 1; i < path.size(); ++i) EXPECT_GT(path[i].time, path[i - 1].time);
    EXPECT_LE(path.back().time, ex.sigma);
}

namespace {

double simpson(const std::function<double(double)>& fn, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = fn(a) + fn(b);
    for (int i = 1; i < n; ++i) s += fn(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace

TEST(IntervalClosedForm, GreenIntegratesToMeanLifetime) {
    const double lo = -1.0, hi = 2.0;
    for (double x : {-0.5, 0.0, 1.3}) {
        const double row =
            simpson([&](double y) { return interval_closed_form::green(lo, hi, x, y); }, lo, x, 2000) +
            simpson([&](double y) { return interval_closed_form::green(lo, hi, x, y); }, x, hi, 2000);
        EXPECT_NEAR(row, interval_closed_form::mean_lifetime(lo, hi, x), 1e-9);
    }
    const double norm = simpson([&](double x) { return interval_closed_form::mean_lifetime(lo, hi, x); },
                                lo, hi, 2000) / (hi - lo);
    EXPECT_NEAR(norm, interval_closed_form::g_norm(lo, hi), 1e-9);
    EXPECT_NEAR(interval_closed_form::g_norm(0, 1) / 2.0, 1.0 / 12.0, 1e-15);
}

TEST(IntervalClosedForm, LaplaceSolvesBoundaryProblem) {
    // 1/2 u'' = lambda u inside, u = 1 on the boundary.
    const double lo = 0.0, hi = 1.0, lambda = 0.8, h = 1e-4;
    auto u = [&](double x) { return interval_closed_form::laplace_lifetime(lo, hi, x, lambda); };
    EXPECT_NEAR(u(lo), 1.0, 1e-14);
    EXPECT_NEAR(u(hi), 1.0, 1e-14);
    for (double x : {0.1, 0.5, 0.77}) {
        const double second = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
        EXPECT_NEAR(0.5 * second, lambda * u(x), 1e-5);
    }
    const double mean = simpson(u, lo, hi, 2000);
    EXPECT_NEAR(interval_closed_form::mean_laplace_lifetime(lo, hi, lambda), mean, 1e-10);
}
