#pragma once

#include "fvsim/finite_chain.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

/// Exact linear algebra on finite symmetric chains.
///
/// Product states (i, j) are indexed row-major as i * n + j throughout.
/// All solves are dense LU with partial pivoting.
namespace fvsim::oracle {

inline constexpr double kExactTolerance = 1e-10;
inline constexpr const char* kProductOrdering = "row-major:i*n+j";

inline std::size_t product_index(std::size_t i, std::size_t j, std::size_t n) { return i * n + j; }

/// Sub-Markov generator: jump rates off the diagonal, minus total jump rate
/// and killing on the diagonal.
Eigen::MatrixXd generator(const FiniteChainModel& chain);

/// Generator of two independent copies, A (+) A = A x I + I x A.
Eigen::MatrixXd product_generator(const FiniteChainModel& chain);

/// Kernel of the resolvent U_lambda = (lambda I - A)^-1. For lambda = 0 this
/// is the potential kernel G.
struct KernelMatrix {
    double lambda = 0.0;
    Eigen::MatrixXd entries;
};

struct SurvivalClassification {
    /// P^x(zeta < inf) from the absorption solve.
    Eigen::VectorXd absorption;
    /// Component label of each state.
    std::vector<std::size_t> component;
    /// States whose component has no killing.
    std::vector<std::size_t> conservative_states;
    /// Every entry within 1e-10 of 0 or 1.
    bool zero_one = true;

    bool all_die() const { return conservative_states.empty(); }
};

SurvivalClassification survival_classification(const FiniteChainModel& chain);

/// True iff the jump graph is strongly connected.
bool irreducibility_check(const FiniteChainModel& chain);

/// Throws SingularSystem when lambda == 0 and some state never dies.
KernelMatrix resolvent(const FiniteChainModel& chain, double lambda);

inline KernelMatrix potential_kernel(const FiniteChainModel& chain) { return resolvent(chain, 0.0); }

/// sum_i m_i sum_j G(i, j), which is E^m zeta.
double g_norm(const FiniteChainModel& chain);

/// max |U_lambda - U_mu - (mu - lambda) U_lambda U_mu|.
double verify_resolvent_equation(const FiniteChainModel& chain, double lambda, double mu);

/// Largest |m_i U(i, j) - m_j U(j, i)|.
double kernel_asymmetry(const FiniteChainModel& chain, const KernelMatrix& kernel);

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double deviation = 0.0;
};

/// Discounted occupation of the independent pair from the diagonal start
/// against half the resolvent pairing:
///   lhs = sum_x m_x [(2 lambda - A (+) A)^-1 (f x g)](x, x)
///   rhs = 1/2 sum_x m_x f(x) (U_lambda g)(x).
IdentityCheck reduction_identity_check(const FiniteChainModel& chain, const Eigen::VectorXd& f,
                                       const Eigen::VectorXd& g, double lambda);

/// Initial laws on product states (length n^2).
Eigen::VectorXd delta_law(const FiniteChainModel& chain);
Eigen::VectorXd product_law(const FiniteChainModel& chain);
Eigen::VectorXd point_law(const FiniteChainModel& chain, std::size_t x, std::size_t y);

/// Law of the survivor position Z at the first kill.
struct ZDistribution {
    Eigen::VectorXd states;
    /// Mass at the cemetery: probability that no kill ever happens.
    double cemetery = 0.0;
};

/// Throws SingularSystem when no state has killing.
ZDistribution z_distribution_exact(const FiniteChainModel& chain, const Eigen::VectorXd& initial);

/// E^{x,y}[exp(-discount sigma) f(Z)] for every product state.
Eigen::VectorXd discounted_survivor_functional(const FiniteChainModel& chain,
                                               const Eigen::VectorXd& f, double discount);

/// lhs = E^delta[exp(-2 lambda sigma) f(Z)] by the absorption solve;
/// rhs = sum_x f(x) E^x exp(-lambda zeta) m_x, with E^x exp(-lambda zeta)
/// = 1 - lambda U_lambda 1(x) for lambda > 0 and P^x(zeta < inf) at 0.
IdentityCheck key_identity_exact(const FiniteChainModel& chain, const Eigen::VectorXd& f,
                                 double lambda);

/// Conservative generator of the two-particle Fleming-Viot chain on n^2
/// states. Kills at diagonal states are self-loops and are dropped.
struct FVPairGenerator {
    std::size_t n = 0;
    Eigen::MatrixXd rates;
};

FVPairGenerator fv_pair_generator(const FiniteChainModel& chain);

/// mu(i, j) = G(i, j) m_i / ||G||.
struct InvariantMeasure {
    Eigen::MatrixXd weights;
    double g_norm = 0.0;

    double at(std::size_t i, std::size_t j) const {
        return weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

InvariantMeasure invariant_measure(const FiniteChainModel& chain);

/// Inputs of the resolvent identity for the pair chain.
struct StationaryProbe {
    double lambda = 1.0;
    Eigen::VectorXd f; ///< empty means the constant one
    Eigen::VectorXd g;
};

struct InvariantMeasureCheck {
    InvariantMeasure measure;
    /// max |(mu^T A_FV)_k|.
    double stationarity_deviation = 0.0;
    /// phi = (lambda - A_FV)^-1 (f x g);
    /// lhs = 1/2 sum phi(x,y) G(x,y) m_x, rhs = 1/(2 lambda) sum f(x) g(y) G(x,y) m_x.
    IdentityCheck resolvent_identity;

    double max_abs_deviation() const {
        return std::max(stationarity_deviation, resolvent_identity.deviation);
    }
};

InvariantMeasureCheck invariant_measure_check(const FiniteChainModel& chain,
                                              const StationaryProbe& probe = {});

} // namespace fvsim::oracle
