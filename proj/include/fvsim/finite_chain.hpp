#pragma once

#include "fvsim/excursion.hpp"
#include "fvsim/random.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace fvsim {

/// Default censoring horizon (time units) for lifetimes and excursions on
/// models that may be conservative.
inline constexpr double kDefaultHorizon = 1e6;

/// Relative tolerance of the detailed-balance check m_i q_ij = m_j q_ji.
inline constexpr double kDetailedBalanceTolerance = 1e-12;

/// A symmetric killed continuous-time Markov chain on states 0..n-1.
///
/// Immutable once built; share freely across threads. Construct through
/// build_finite_chain(), which validates detailed balance and normalizes
/// the reference measure to a probability vector.
class FiniteChainModel {
public:
    using point_type = std::size_t;

    std::size_t size() const { return static_cast<std::size_t>(kill_.size()); }
    bool contains(std::size_t state) const { return state < size(); }

    const Eigen::MatrixXd& jump_rates() const { return jump_; }
    const Eigen::VectorXd& kill_rates() const { return kill_; }
    const Eigen::VectorXd& ref_measure() const { return m_; }

    double jump_rate(std::size_t i, std::size_t j) const { return jump_(i, j); }
    double kill_rate(std::size_t i) const { return kill_(i); }
    /// Total jump rate out of state i, killing excluded.
    double out_rate(std::size_t i) const { return out_[i]; }

    /// Whether killing is reachable from state i, i.e. P^i(zeta < inf) = 1.
    bool can_die(std::size_t i) const { return can_die_[i]; }
    /// Component label of each state in the (undirected) jump graph.
    const std::vector<std::size_t>& components() const { return component_; }

    /// Draw a state from the reference measure by inverse CDF.
    std::size_t sample_reference(Rng& rng) const;

    /// Next state after a jump out of i; u is uniform on [0, out_rate(i)).
    std::size_t pick_jump_target(std::size_t i, double u) const;

private:
    friend FiniteChainModel build_finite_chain(Eigen::MatrixXd, Eigen::VectorXd,
                                               Eigen::VectorXd);
    FiniteChainModel() = default;

    Eigen::MatrixXd jump_;
    Eigen::VectorXd kill_;
    Eigen::VectorXd m_;
    std::vector<double> out_;
    std::vector<double> m_cdf_;
    std::vector<bool> can_die_;
    std::vector<std::size_t> component_;
};

/// Validate rates and measure and build the model.
///
/// Throws NegativeRate, NonpositiveMeasure, DetailedBalanceViolation (worst
/// offending pair), or ModelValidationError for shape problems.
FiniteChainModel build_finite_chain(Eigen::MatrixXd jump_rates, Eigen::VectorXd kill_rates,
                                    Eigen::VectorXd ref_measure);

/// Exact event-driven run of two independent copies from (x, y) until the
/// first kill, or until `horizon`. If `path` is non-null every jump is
/// appended to it (the starting point is not).
Excursion<std::size_t> sample_excursion(const FiniteChainModel& chain, std::size_t x,
                                        std::size_t y, double horizon, Rng& rng,
                                        Path<std::size_t>* path = nullptr);

/// One draw of the lifetime from x. Returns +inf exactly when x sits in a
/// component without killing.
double sample_lifetime(const FiniteChainModel& chain, std::size_t x, Rng& rng);

/// Seeded random symmetric chain: connected jump graph, positive reference
/// measure, and killing in at least one state (so every state dies a.s.).
FiniteChainModel random_symmetric_chain(std::size_t n, Rng& rng);

} // namespace fvsim
