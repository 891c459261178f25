#pragma once

#include "fvsim/finite_chain.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace testing_support {

using Matrix = std::vector<std::vector<double>>;

// Plain Gauss-Jordan with partial pivoting. Kept separate from the library
// solver so that the two can check each other.
inline Matrix invert(Matrix a) {
    const std::size_t n = a.size();
    Matrix inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (a[p][c] == 0.0) throw std::runtime_error("singular");
        std::swap(a[p], a[c]);
        std::swap(inv[p], inv[c]);
        const double d = a[c][c];
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0.0) continue;
            const double f = a[r][c];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    return inv;
}

// lambda I - A written out entry by entry from the rates.
inline Matrix shifted_generator(const fvsim::FiniteChainModel& chain, double lambda) {
    const std::size_t n = chain.size();
    Matrix a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        double out = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            a[i][j] = -chain.jump_rate(i, j);
            out += chain.jump_rate(i, j);
        }
        a[i][i] = lambda + out + chain.kill_rate(i);
    }
    return a;
}

inline fvsim::FiniteChainModel two_state(double q, double k0, double k1) {
    Eigen::MatrixXd rates(2, 2);
    rates << 0.0, q, q, 0.0;
    return fvsim::build_finite_chain(rates, Eigen::Vector2d(k0, k1), Eigen::Vector2d(1.0, 1.0));
}

inline fvsim::FiniteChainModel single_state(double k) {
    return fvsim::build_finite_chain(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, k),
                                     Eigen::VectorXd::Ones(1));
}

} // namespace testing_support
