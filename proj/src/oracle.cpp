#include "fvsim/oracle.hpp"

#include "fvsim/error.hpp"

#include <algorithm>
#include <cmath>

namespace fvsim::oracle {

namespace {

using Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_values(const FiniteChainModel& chain, const Eigen::VectorXd& v, const char* what) {
    if (static_cast<std::size_t>(v.size()) != chain.size())
        throw InvalidArgument(std::string(what) + " must have one value per state");
}

void require_finite_potential(const FiniteChainModel& chain) {
    for (std::size_t i = 0; i < chain.size(); ++i)
        if (!chain.can_die(i))
            throw SingularSystem("potential kernel is infinite: state " + std::to_string(i) +
                                 " belongs to a conservative class");
}

Eigen::VectorXd kron(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
    const auto n = f.size();
    Eigen::VectorXd out(n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) out(i * n + j) = f(i) * g(j);
    return out;
}

// H(s, z) = E^s[exp(-discount sigma); Z = z] on product states s.
Eigen::MatrixXd survivor_kernel(const FiniteChainModel& chain, double discount) {
    const std::size_t n = chain.size();
    const std::size_t nn = n * n;
    if (chain.kill_rates().maxCoeff() <= 0.0)
        throw SingularSystem("no state has killing: the absorption system is degenerate");

    // Product states from which a kill is reachable. The set is closed under
    // jumps because components of a symmetric chain are closed.
    std::vector<std::size_t> live;
    std::vector<Index> slot(nn, -1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (chain.can_die(i) || chain.can_die(j)) {
                slot[product_index(i, j, n)] = static_cast<Index>(live.size());
                live.push_back(product_index(i, j, n));
            }

    const auto nl = static_cast<Index>(live.size());
    const Eigen::MatrixXd b = product_generator(chain);
    Eigen::MatrixXd system(nl, nl);
    for (Index r = 0; r < nl; ++r)
        for (Index c = 0; c < nl; ++c)
            system(r, c) = -b(idx(live[r]), idx(live[c])) + (r == c ? discount : 0.0);

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nl, idx(n));
    for (Index r = 0; r < nl; ++r) {
        const std::size_t i = live[r] / n;
        const std::size_t j = live[r] % n;
        rhs(r, idx(i)) += chain.kill_rate(j); // Y killed, X survives at i
        rhs(r, idx(j)) += chain.kill_rate(i); // X killed, Y survives at j
    }
    const Eigen::MatrixXd solved = system.partialPivLu().solve(rhs);

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(idx(nn), idx(n));
    for (Index r = 0; r < nl; ++r) h.row(idx(live[r])) = solved.row(r);
    return h;
}

} // namespace

Eigen::MatrixXd generator(const FiniteChainModel& chain) {
    Eigen::MatrixXd a = chain.jump_rates();
    for (std::size_t i = 0; i < chain.size(); ++i)
        a(idx(i), idx(i)) = -chain.out_rate(i) - chain.kill_rate(i);
    return a;
}

Eigen::MatrixXd product_generator(const FiniteChainModel& chain) {
    const Index n = idx(chain.size());
    const Eigen::MatrixXd a = generator(chain);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const Index s = i * n + j;
            for (Index k = 0; k < n; ++k) {
                b(s, k * n + j) += a(i, k); // first coordinate moves
                b(s, i * n + k) += a(j, k); // second coordinate moves
            }
        }
    }
    return b;
}

SurvivalClassification survival_classification(const FiniteChainModel& chain) {
    const std::size_t n = chain.size();
    SurvivalClassification out;
    out.component = chain.components();
    out.absorption = Eigen::VectorXd::Zero(idx(n));

    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < n; ++i) {
        if (chain.can_die(i))
            live.push_back(i);
        else
            out.conservative_states.push_back(i);
    }
    if (!live.empty()) {
        const Eigen::MatrixXd a = generator(chain);
        const auto nl = static_cast<Index>(live.size());
        Eigen::MatrixXd system(nl, nl);
        Eigen::VectorXd rhs(nl);
        for (Index r = 0; r < nl; ++r) {
            rhs(r) = chain.kill_rate(live[r]);
            for (Index c = 0; c < nl; ++c) system(r, c) = -a(idx(live[r]), idx(live[c]));
        }
        const Eigen::VectorXd h = system.partialPivLu().solve(rhs);
        for (Index r = 0; r < nl; ++r) out.absorption(idx(live[r])) = h(r);
    }
    for (Index i = 0; i < idx(n); ++i) {
        const double p = out.absorption(i);
        if (std::min(std::abs(p), std::abs(1.0 - p)) > kExactTolerance) out.zero_one = false;
    }
    return out;
}

bool irreducibility_check(const FiniteChainModel& chain) {
    const std::size_t n = chain.size();
    auto reaches_all = [&](bool forward) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                const double q = forward ? chain.jump_rate(i, j) : chain.jump_rate(j, i);
                if (!seen[j] && q > 0.0) {
                    seen[j] = true;
                    ++count;
                    stack.push_back(j);
                }
            }
        }
        return count == n;
    };
    return reaches_all(true) && reaches_all(false);
}

KernelMatrix resolvent(const FiniteChainModel& chain, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("resolvent parameter must be finite and >= 0");
    if (lambda == 0.0) require_finite_potential(chain);
    const Index n = idx(chain.size());
    const Eigen::MatrixXd system = lambda * Eigen::MatrixXd::Identity(n, n) - generator(chain);
    return {lambda, system.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n))};
}

double g_norm(const FiniteChainModel& chain) {
    const KernelMatrix g = potential_kernel(chain);
    return chain.ref_measure().dot(g.entries.rowwise().sum());
}

double verify_resolvent_equation(const FiniteChainModel& chain, double lambda, double mu) {
    if (!(lambda > 0.0) || !(mu > 0.0) || lambda == mu)
        throw InvalidArgument("resolvent equation needs distinct positive parameters");
    const Eigen::MatrixXd ul = resolvent(chain, lambda).entries;
    const Eigen::MatrixXd um = resolvent(chain, mu).entries;
    return (ul - um - (mu - lambda) * ul * um).cwiseAbs().maxCoeff();
}

double kernel_asymmetry(const FiniteChainModel& chain, const KernelMatrix& kernel) {
    const Eigen::VectorXd& m = chain.ref_measure();
    const Eigen::MatrixXd weighted = m.asDiagonal() * kernel.entries;
    return (weighted - weighted.transpose()).cwiseAbs().maxCoeff();
}

IdentityCheck reduction_identity_check(const FiniteChainModel& chain, const Eigen::VectorXd& f,
                                       const Eigen::VectorXd& g, double lambda) {
    require_values(chain, f, "f");
    require_values(chain, g, "g");
    const Index n = idx(chain.size());
    const KernelMatrix u = resolvent(chain, lambda);

    const Eigen::MatrixXd system =
        2.0 * lambda * Eigen::MatrixXd::Identity(n * n, n * n) - product_generator(chain);
    const Eigen::VectorXd h = system.partialPivLu().solve(kron(f, g));

    const Eigen::VectorXd& m = chain.ref_measure();
    IdentityCheck out;
    for (Index x = 0; x < n; ++x) out.lhs += m(x) * h(x * n + x);
    out.rhs = 0.5 * m.cwiseProduct(f).dot(u.entries * g);
    out.deviation = std::abs(out.lhs - out.rhs);
    return out;
}

Eigen::VectorXd delta_law(const FiniteChainModel& chain) {
    const Index n = idx(chain.size());
    Eigen::VectorXd law = Eigen::VectorXd::Zero(n * n);
    for (Index x = 0; x < n; ++x) law(x * n + x) = chain.ref_measure()(x);
    return law;
}

Eigen::VectorXd product_law(const FiniteChainModel& chain) {
    return kron(chain.ref_measure(), chain.ref_measure());
}

Eigen::VectorXd point_law(const FiniteChainModel& chain, std::size_t x, std::size_t y) {
    if (!chain.contains(x) || !chain.contains(y)) throw InvalidStart("point outside the chain");
    const std::size_t n = chain.size();
    Eigen::VectorXd law = Eigen::VectorXd::Zero(idx(n * n));
    law(idx(product_index(x, y, n))) = 1.0;
    return law;
}

ZDistribution z_distribution_exact(const FiniteChainModel& chain, const Eigen::VectorXd& initial) {
    const std::size_t n = chain.size();
    if (static_cast<std::size_t>(initial.size()) != n * n)
        throw InvalidArgument("initial law must live on the n^2 product states");
    const Eigen::MatrixXd h = survivor_kernel(chain, 0.0);
    ZDistribution out;
    out.states = h.transpose() * initial;
    out.cemetery = std::max(0.0, initial.sum() - out.states.sum());
    return out;
}

Eigen::VectorXd discounted_survivor_functional(const FiniteChainModel& chain,
                                               const Eigen::VectorXd& f, double discount) {
    require_values(chain, f, "f");
    if (!(discount >= 0.0)) throw InvalidArgument("discount must be >= 0");
    return survivor_kernel(chain, discount) * f;
}

IdentityCheck key_identity_exact(const FiniteChainModel& chain, const Eigen::VectorXd& f,
                                 double lambda) {
    require_values(chain, f, "f");
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    IdentityCheck out;
    out.lhs = delta_law(chain).dot(discounted_survivor_functional(chain, f, 2.0 * lambda));

    const Eigen::VectorXd& m = chain.ref_measure();
    Eigen::VectorXd laplace;
    if (lambda > 0.0) {
        const Index n = idx(chain.size());
        const Eigen::VectorXd u_one = resolvent(chain, lambda).entries * Eigen::VectorXd::Ones(n);
        laplace = Eigen::VectorXd::Ones(n) - lambda * u_one;
    } else {
        laplace = survival_classification(chain).absorption;
    }
    out.rhs = m.cwiseProduct(f).dot(laplace);
    out.deviation = std::abs(out.lhs - out.rhs);
    return out;
}

FVPairGenerator fv_pair_generator(const FiniteChainModel& chain) {
    const std::size_t n = chain.size();
    const Index nn = idx(n * n);
    FVPairGenerator out;
    out.n = n;
    out.rates = Eigen::MatrixXd::Zero(nn, nn);
    auto add = [&](std::size_t from, std::size_t to, double rate) {
        if (from != to && rate > 0.0) out.rates(idx(from), idx(to)) += rate;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t s = product_index(i, j, n);
            for (std::size_t k = 0; k < n; ++k) {
                add(s, product_index(k, j, n), chain.jump_rate(i, k));
                add(s, product_index(i, k, n), chain.jump_rate(j, k));
            }
            add(s, product_index(j, j, n), chain.kill_rate(i)); // X dies, restarts at Y
            add(s, product_index(i, i, n), chain.kill_rate(j)); // Y dies, restarts at X
        }
    }
    for (Index s = 0; s < nn; ++s) out.rates(s, s) = -out.rates.row(s).sum();
    return out;
}

InvariantMeasure invariant_measure(const FiniteChainModel& chain) {
    const KernelMatrix g = potential_kernel(chain);
    InvariantMeasure out;
    out.g_norm = chain.ref_measure().dot(g.entries.rowwise().sum());
    out.weights = chain.ref_measure().asDiagonal() * g.entries / out.g_norm;
    return out;
}

InvariantMeasureCheck invariant_measure_check(const FiniteChainModel& chain,
                                              const StationaryProbe& probe) {
    if (!(probe.lambda > 0.0)) throw InvalidArgument("stationary probe needs lambda > 0");
    const Index n = idx(chain.size());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd& f = probe.f.size() ? probe.f : ones;
    const Eigen::VectorXd& g = probe.g.size() ? probe.g : ones;
    require_values(chain, f, "f");
    require_values(chain, g, "g");

    InvariantMeasureCheck out;
    out.measure = invariant_measure(chain);

    const FVPairGenerator fv = fv_pair_generator(chain);
    Eigen::VectorXd mu(n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) mu(i * n + j) = out.measure.weights(i, j);
    out.stationarity_deviation = (fv.rates.transpose() * mu).cwiseAbs().maxCoeff();

    // G(x, y) m_x as a product-state vector is ||G|| mu.
    const Eigen::VectorXd gm = out.measure.g_norm * mu;
    const Eigen::MatrixXd system =
        probe.lambda * Eigen::MatrixXd::Identity(n * n, n * n) - fv.rates;
    const Eigen::VectorXd fg = kron(f, g);
    const Eigen::VectorXd phi = system.partialPivLu().solve(fg);
    out.resolvent_identity.lhs = 0.5 * phi.dot(gm);
    out.resolvent_identity.rhs = fg.dot(gm) / (2.0 * probe.lambda);
    out.resolvent_identity.deviation =
        std::abs(out.resolvent_identity.lhs - out.resolvent_identity.rhs);
    return out;
}

} // namespace fvsim::oracle
