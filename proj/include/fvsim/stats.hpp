#pragma once

#include "fvsim/error.hpp"
#include "fvsim/excursion.hpp"
#include "fvsim/fv_engine.hpp"
#include "fvsim/finite_chain.hpp"
#include "fvsim/test_function.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fvsim::stats {

/// Per-test p-value threshold.
inline constexpr double kPValueThreshold = 1e-3;
/// Two-sided normal tail at 3 standard errors, erfc(3 / sqrt 2).
inline constexpr double kThreeSigmaPValue = 0.0026997960632601866;

/// How a report decides pass/fail.
enum class Gate {
    PValue,      ///< pass iff p_value >= threshold
    ThreeSigma,  ///< pass iff |estimate - target| <= 3 standard errors
    AbsError,    ///< pass iff statistic <= tolerance; p_value is 1 or 0
    AtLeast,     ///< pass iff statistic >= threshold; p_value is 1 or 0
};

std::string_view to_string(Gate gate);

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    std::uint64_t n_samples = 0;
    bool pass = true;
    Gate gate = Gate::PValue;
    /// p-value threshold for PValue and ThreeSigma gates, tolerance for AbsError.
    double threshold = kPValueThreshold;
    std::string target_ref;
    /// Filled by estimator-versus-target tests.
    std::optional<double> estimate;
    std::optional<double> std_error;
    std::optional<double> target;
};

/// AtLeast report: pass iff value >= minimum.
TestReport minimum_report(std::string name, double value, double minimum,
                          std::uint64_t n_samples, std::string target_ref);

/// AbsError report: pass iff deviation <= tolerance.
TestReport tolerance_report(std::string name, double deviation, double tolerance,
                            std::uint64_t n_samples, std::string target_ref);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

/// Sample mean and sample-std / sqrt(n), compensated and order-stable.
Estimate estimate(std::span<const double> samples);

/// Pearson goodness of fit. Adjacent bins are merged until each expected
/// count is at least 5; throws DegenerateBins if fewer than two remain.
TestReport chi_square_gof(std::span<const std::uint64_t> counts,
                          std::span<const double> expected_probs,
                          std::string name = "chi_square_gof");

/// Chi-square test that two count vectors share one distribution.
TestReport chi_square_homogeneity(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b,
                                  std::string name = "chi_square_homogeneity");

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

/// One-sample KS against Uniform(0, 1). Needs at least 100 samples.
TestReport ks_uniform_test(std::span<const double> samples, std::string name = "ks_uniform");

/// Two-sample KS, asymptotic p-value.
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b,
                         std::string name = "ks_two_sample");

/// Upper tail of the chi-square distribution.
double chi_square_survival(double statistic, double dof);

/// Mean of exp(-2 lambda sigma) f(Z) against `target`, three-standard-error
/// gate. Censored runs and Z at the cemetery contribute 0.
template <typename Point>
TestReport laplace_functional_test(std::span<const Excursion<Point>> samples, double lambda,
                                   const TestFunction& f, double target,
                                   std::string name = "laplace_functional",
                                   std::string target_ref = {});

/// Same gate on precomputed per-sample values.
TestReport three_sigma_test(std::span<const double> values, double target, std::string name,
                            std::string target_ref);

/// Time-occupation of the n^2 product states against the invariant measure
/// of the pair chain; AbsError gate on the max deviation.
TestReport occupation_measure_test(std::span<const FVTrajectory<std::size_t>> trajectories,
                                   const FiniteChainModel& chain, double horizon,
                                   double tolerance = 0.01);

template <typename Point>
TestReport laplace_functional_test(std::span<const Excursion<Point>> samples, double lambda,
                                   const TestFunction& f, double target, std::string name,
                                   std::string target_ref) {
    if (samples.empty()) throw EmptySample("laplace functional test on no samples");
    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& ex : samples) {
        if (ex.censored() || !ex.survivor) {
            values.push_back(0.0);
            continue;
        }
        values.push_back(std::exp(-2.0 * lambda * ex.sigma) * f(*ex.survivor));
    }
    return three_sigma_test(values, target, std::move(name), std::move(target_ref));
}

} // namespace fvsim::stats
