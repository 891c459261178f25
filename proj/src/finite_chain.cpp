#include "fvsim/finite_chain.hpp"

#include "fvsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fvsim {

DetailedBalanceViolation::DetailedBalanceViolation(std::size_t i, std::size_t j, double lhs,
                                                   double rhs)
    : ModelValidationError([&] {
          std::ostringstream os;
          os.precision(17);
          os << "detailed balance violated at pair (" << i << ", " << j << "): m_i*q_ij = " << lhs
             << " but m_j*q_ji = " << rhs;
          return os.str();
      }()),
      i_(i), j_(j) {}

std::string_view to_string(Died d) {
    switch (d) {
    case Died::X: return "X";
    case Died::Y: return "Y";
    case Died::Both: return "both";
    case Died::None: return "none";
    }
    return "?";
}

namespace {

std::vector<std::size_t> label_components(const Eigen::MatrixXd& jump) {
    const auto n = static_cast<std::size_t>(jump.rows());
    std::vector<std::size_t> label(n, n);
    std::size_t next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (label[s] != n) continue;
        label[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                if (label[j] == n && (jump(i, j) > 0.0 || jump(j, i) > 0.0)) {
                    label[j] = next;
                    stack.push_back(j);
                }
            }
        }
        ++next;
    }
    return label;
}

} // namespace

FiniteChainModel build_finite_chain(Eigen::MatrixXd jump_rates, Eigen::VectorXd kill_rates,
                                    Eigen::VectorXd ref_measure) {
    const auto n = kill_rates.size();
    if (n == 0) throw ModelValidationError("finite chain needs at least one state");
    if (jump_rates.rows() != n || jump_rates.cols() != n || ref_measure.size() != n)
        throw ModelValidationError("inconsistent dimensions: jump_rates must be n x n and "
                                   "kill_rates, ref_measure of length n");

    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(kill_rates(i))) throw ModelValidationError("non-finite kill rate");
        if (kill_rates(i) < 0.0)
            throw NegativeRate("negative kill rate at state " + std::to_string(i));
        if (!std::isfinite(ref_measure(i)) || ref_measure(i) <= 0.0)
            throw NonpositiveMeasure("reference measure must be positive at state " +
                                     std::to_string(i));
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(jump_rates(i, j)))
                throw ModelValidationError("non-finite jump rate");
            if (jump_rates(i, j) < 0.0)
                throw NegativeRate("negative jump rate at (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")");
        }
        if (jump_rates(i, i) != 0.0)
            throw ModelValidationError("jump_rates diagonal must be zero");
    }

    ref_measure /= ref_measure.sum();

    double worst = 0.0;
    Eigen::Index wi = 0, wj = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = ref_measure(i) * jump_rates(i, j);
            const double b = ref_measure(j) * jump_rates(j, i);
            const double scale = std::max(a, b);
            if (scale == 0.0) continue;
            const double rel = std::abs(a - b) / scale;
            if (rel > worst) {
                worst = rel;
                wi = i;
                wj = j;
            }
        }
    }
    if (worst > kDetailedBalanceTolerance)
        throw DetailedBalanceViolation(static_cast<std::size_t>(wi), static_cast<std::size_t>(wj),
                                       ref_measure(wi) * jump_rates(wi, wj),
                                       ref_measure(wj) * jump_rates(wj, wi));

    FiniteChainModel chain;
    chain.jump_ = std::move(jump_rates);
    chain.kill_ = std::move(kill_rates);
    chain.m_ = std::move(ref_measure);

    const auto un = static_cast<std::size_t>(n);
    chain.out_.resize(un);
    for (std::size_t i = 0; i < un; ++i) chain.out_[i] = chain.jump_.row(i).sum();

    chain.m_cdf_.resize(un);
    std::partial_sum(chain.m_.data(), chain.m_.data() + n, chain.m_cdf_.begin());
    chain.m_cdf_.back() = 1.0;

    chain.component_ = label_components(chain.jump_);
    std::vector<bool> kills(un, false);
    for (std::size_t i = 0; i < un; ++i)
        if (chain.kill_(i) > 0.0) kills[chain.component_[i]] = true;
    chain.can_die_.resize(un);
    for (std::size_t i = 0; i < un; ++i) chain.can_die_[i] = kills[chain.component_[i]];
    return chain;
}

std::size_t FiniteChainModel::sample_reference(Rng& rng) const {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(m_cdf_.begin(), m_cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - m_cdf_.begin()), size() - 1);
}

std::size_t FiniteChainModel::pick_jump_target(std::size_t i, double u) const {
    const auto n = size();
    std::size_t last = i;
    for (std::size_t j = 0; j < n; ++j) {
        const double q = jump_(i, j);
        if (q <= 0.0) continue;
        last = j;
        if (u < q) return j;
        u -= q;
    }
    // u landed on the right edge through round-off.
    return last;
}

Excursion<std::size_t> sample_excursion(const FiniteChainModel& chain, std::size_t x,
                                        std::size_t y, double horizon, Rng& rng,
                                        Path<std::size_t>* path) {
    if (!chain.contains(x) || !chain.contains(y))
        throw InvalidStart("excursion start outside the state space");
    if (!(horizon > 0.0)) throw InvalidStart("excursion horizon must be positive");

    Excursion<std::size_t> ex;
    auto censor = [&](double at) {
        ex.sigma = at;
        ex.died = Died::None;
        ex.censored_at = at;
        ex.x_end = x;
        ex.y_end = y;
        return ex;
    };

    // Neither copy can ever be killed: nothing to simulate.
    if (!chain.can_die(x) && !chain.can_die(y) && (path == nullptr || std::isinf(horizon)))
        return censor(horizon);

    double t = 0.0;
    for (;;) {
        const double rx_jump = chain.out_rate(x);
        const double rx = rx_jump + chain.kill_rate(x);
        const double ry_jump = chain.out_rate(y);
        const double ry = ry_jump + chain.kill_rate(y);
        const double total = rx + ry;
        if (total <= 0.0) return censor(horizon);

        t += exponential(rng, total);
        if (t >= horizon) return censor(horizon);

        double u = uniform01(rng) * total;
        if (u < rx_jump) {
            x = chain.pick_jump_target(x, u);
        } else if ((u -= rx_jump) < chain.kill_rate(x)) {
            ex.sigma = t;
            ex.died = Died::X;
            ex.survivor = y;
            ex.y_end = y;
            return ex;
        } else if ((u -= chain.kill_rate(x)) < ry_jump) {
            y = chain.pick_jump_target(y, u);
        } else {
            ex.sigma = t;
            ex.died = Died::Y;
            ex.survivor = x;
            ex.x_end = x;
            return ex;
        }
        if (path) path->push_back({t, x, y});
    }
}

double sample_lifetime(const FiniteChainModel& chain, std::size_t x, Rng& rng) {
    if (!chain.contains(x)) throw InvalidStart("lifetime start outside the state space");
    if (!chain.can_die(x)) return kInfinity;
    double t = 0.0;
    for (;;) {
        const double jump = chain.out_rate(x);
        const double total = jump + chain.kill_rate(x);
        t += exponential(rng, total);
        const double u = uniform01(rng) * total;
        if (u >= jump) return t;
        x = chain.pick_jump_target(x, u);
    }
}

FiniteChainModel random_symmetric_chain(std::size_t n, Rng& rng) {
    if (n == 0) throw InvalidArgument("random chain needs n >= 1");
    const auto sn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd m(sn);
    for (Eigen::Index i = 0; i < sn; ++i) m(i) = 0.5 + uniform01(rng);
    m /= m.sum();

    // Symmetric conductances c_ij; q_ij = c_ij / m_i gives m_i q_ij = c_ij.
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(sn, sn);
    for (Eigen::Index i = 0; i < sn; ++i) {
        for (Eigen::Index j = i + 1; j < sn; ++j) {
            const bool ring = (j == i + 1);
            if (ring || uniform01(rng) < 0.5) c(i, j) = c(j, i) = 0.1 + 1.9 * uniform01(rng);
        }
    }
    Eigen::MatrixXd q(sn, sn);
    for (Eigen::Index i = 0; i < sn; ++i)
        for (Eigen::Index j = 0; j < sn; ++j) q(i, j) = (i == j) ? 0.0 : c(i, j) / m(i);

    Eigen::VectorXd k(sn);
    for (Eigen::Index i = 0; i < sn; ++i) k(i) = uniform01(rng) < 0.7 ? 0.05 + 2.0 * uniform01(rng) : 0.0;
    if (k.maxCoeff() <= 0.0) k(static_cast<Eigen::Index>(rng() % n)) = 0.05 + 2.0 * uniform01(rng);

    return build_finite_chain(std::move(q), std::move(k), std::move(m));
}

} // namespace fvsim
