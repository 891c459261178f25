#include "fvsim/stats.hpp"

#include "fvsim/oracle.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <numbers>

namespace fvsim::stats {

std::string_view to_string(Gate gate) {
    switch (gate) {
    case Gate::PValue: return "p_value";
    case Gate::ThreeSigma: return "three_sigma";
    case Gate::AbsError: return "abs_error";
    case Gate::AtLeast: return "at_least";
    }
    return "?";
}

TestReport tolerance_report(std::string name, double deviation, double tolerance,
                            std::uint64_t n_samples, std::string target_ref) {
    TestReport r;
    r.name = std::move(name);
    r.statistic = deviation;
    r.pass = deviation <= tolerance; // NaN fails
    r.p_value = r.pass ? 1.0 : 0.0;
    r.n_samples = n_samples;
    r.gate = Gate::AbsError;
    r.threshold = tolerance;
    r.target_ref = std::move(target_ref);
    return r;
}

TestReport minimum_report(std::string name, double value, double minimum,
                          std::uint64_t n_samples, std::string target_ref) {
    TestReport r = tolerance_report(std::move(name), value, minimum, n_samples,
                                    std::move(target_ref));
    r.gate = Gate::AtLeast;
    r.pass = value >= minimum;
    r.p_value = r.pass ? 1.0 : 0.0;
    return r;
}

Estimate estimate(std::span<const double> samples) {
    if (samples.empty()) throw EmptySample("estimate of an empty sample");
    detail::CompensatedSum sum;
    for (double v : samples) sum.add(v);
    const double n = static_cast<double>(samples.size());
    const double mean = sum.value() / n;
    Estimate e;
    e.value = mean;
    e.n = samples.size();
    if (samples.size() > 1) {
        detail::CompensatedSum sq;
        for (double v : samples) sq.add((v - mean) * (v - mean));
        e.std_error = std::sqrt(sq.value() / (n - 1.0)) / std::sqrt(n);
    }
    return e;
}

double chi_square_survival(double statistic, double dof) {
    if (!(dof > 0.0)) throw InvalidArgument("chi-square needs positive degrees of freedom");
    if (statistic <= 0.0) return 1.0;
    if (std::isinf(statistic)) return 0.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

namespace {

TestReport p_value_report(std::string name, double statistic, double p, std::uint64_t n) {
    TestReport r;
    r.name = std::move(name);
    r.statistic = statistic;
    r.p_value = std::clamp(p, 0.0, 1.0);
    r.n_samples = n;
    r.gate = Gate::PValue;
    r.threshold = kPValueThreshold;
    r.pass = r.p_value >= r.threshold;
    return r;
}

} // namespace

TestReport chi_square_gof(std::span<const std::uint64_t> counts,
                          std::span<const double> expected_probs, std::string name) {
    if (counts.size() != expected_probs.size())
        throw InvalidArgument("counts and probabilities differ in length");
    double psum = 0.0;
    for (double p : expected_probs) {
        if (!(p >= 0.0)) throw InvalidArgument("negative expected probability");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-9) throw InvalidArgument("expected probabilities must sum to 1");
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw EmptySample("chi-square on zero counts");
    const double nt = static_cast<double>(total);

    std::vector<std::pair<double, double>> groups; // (observed, expected)
    double obs = 0.0, exp = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        obs += static_cast<double>(counts[i]);
        exp += nt * expected_probs[i];
        if (exp >= 5.0) {
            groups.emplace_back(obs, exp);
            obs = exp = 0.0;
        }
    }
    if (obs > 0.0 || exp > 0.0) {
        if (groups.empty()) throw DegenerateBins("all expected counts below 5");
        groups.back().first += obs;
        groups.back().second += exp;
    }
    if (groups.size() < 2) throw DegenerateBins("fewer than two bins with expected count >= 5");

    double stat = 0.0;
    for (const auto& [o, e] : groups) stat += (o - e) * (o - e) / e;
    const double dof = static_cast<double>(groups.size() - 1);
    return p_value_report(std::move(name), stat, chi_square_survival(stat, dof), total);
}

TestReport chi_square_homogeneity(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b, std::string name) {
    if (a.size() != b.size()) throw InvalidArgument("count vectors differ in length");
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) throw EmptySample("homogeneity test on an empty sample");
    const double n = na + nb;

    std::vector<std::pair<double, double>> groups; // (count a, count b)
    double ca = 0.0, cb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca += static_cast<double>(a[i]);
        cb += static_cast<double>(b[i]);
        const double col = ca + cb;
        if (col * std::min(na, nb) / n >= 5.0) {
            groups.emplace_back(ca, cb);
            ca = cb = 0.0;
        }
    }
    if (ca > 0.0 || cb > 0.0) {
        if (groups.empty()) throw DegenerateBins("all expected counts below 5");
        groups.back().first += ca;
        groups.back().second += cb;
    }
    if (groups.size() < 2) throw DegenerateBins("fewer than two usable bins");

    double stat = 0.0;
    for (const auto& [oa, ob] : groups) {
        const double col = oa + ob;
        const double ea = col * na / n;
        const double eb = col * nb / n;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    const double dof = static_cast<double>(groups.size() - 1);
    return p_value_report(std::move(name), stat, chi_square_survival(stat, dof),
                          static_cast<std::uint64_t>(n));
}

double kolmogorov_survival(double x) {
    if (!(x > 0.0)) return 1.0;
    if (x < 1.0) {
        // P(K <= x) = sqrt(2 pi)/x sum_k exp(-(2k-1)^2 pi^2 / (8 x^2))
        const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
        double cdf = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double term = std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * c);
            cdf += term;
            if (term < 1e-18) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * cdf, 0.0, 1.0);
    }
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        q += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * q, 0.0, 1.0);
}

TestReport ks_uniform_test(std::span<const double> samples, std::string name) {
    if (samples.empty()) throw EmptySample("KS test on an empty sample");
    if (samples.size() < 100)
        throw InvalidArgument("KS asymptotic p-value needs at least 100 samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    for (double v : sorted)
        if (!(v > 0.0 && v < 1.0)) throw InvalidArgument("KS uniform samples must lie in (0, 1)");
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double di = static_cast<double>(i);
        d = std::max({d, (di + 1.0) / n - sorted[i], sorted[i] - di / n});
    }
    return p_value_report(std::move(name), d, kolmogorov_survival(std::sqrt(n) * d),
                          sorted.size());
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, std::string name) {
    if (a.empty() || b.empty()) throw EmptySample("KS two-sample test on an empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return p_value_report(std::move(name), d, kolmogorov_survival(ne * d),
                          sa.size() + sb.size());
}

TestReport three_sigma_test(std::span<const double> values, double target, std::string name,
                            std::string target_ref) {
    const Estimate e = estimate(values);
    const double dev = std::abs(e.value - target);
    TestReport r;
    r.name = std::move(name);
    r.n_samples = e.n;
    r.gate = Gate::ThreeSigma;
    r.threshold = kThreeSigmaPValue;
    r.target_ref = std::move(target_ref);
    r.estimate = e.value;
    r.std_error = e.std_error;
    r.target = target;
    if (e.std_error > 0.0) {
        r.statistic = dev / e.std_error;
        r.p_value = std::erfc(r.statistic / std::numbers::sqrt2);
        r.pass = dev <= 3.0 * e.std_error;
    } else {
        r.pass = dev <= 1e-12 * std::max(1.0, std::abs(target));
        r.statistic = r.pass ? 0.0 : kInfinity;
        r.p_value = r.pass ? 1.0 : 0.0;
    }
    return r;
}

TestReport occupation_measure_test(std::span<const FVTrajectory<std::size_t>> trajectories,
                                   const FiniteChainModel& chain, double horizon,
                                   double tolerance) {
    if (trajectories.empty()) throw EmptySample("occupation test without trajectories");
    const std::size_t n = chain.size();
    const auto sn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd occ = Eigen::MatrixXd::Zero(sn, sn);
    for (const auto& t : trajectories) occ += occupation_fractions(t, n, horizon);
    occ /= static_cast<double>(trajectories.size());
    const auto mu = oracle::invariant_measure(chain);
    const double dev = (occ - mu.weights).cwiseAbs().maxCoeff();
    return tolerance_report("occupation_measure", dev, tolerance, trajectories.size(),
                            "ergodic averages converge to G(x,dy)m(dx)/||G||");
}

} // namespace fvsim::stats
