#pragma once

#include "fvsim/excursion.hpp"
#include "fvsim/random.hpp"

#include <string_view>

namespace fvsim {

enum class DiffusionKind { BrownianInterval, Bessel, UniformLeft };

std::string_view to_string(DiffusionKind kind);
DiffusionKind diffusion_kind_from_string(std::string_view name);

/// One-dimensional killed diffusion on an interval.
///
/// - BrownianInterval: standard Brownian motion (generator 1/2 d^2/dx^2)
///   on (lo, hi), killed on leaving.
/// - Bessel: dX = dW + (nu - 1)/(2X) dt on (0, inf), killed when X drops to
///   sqrt(dt) * kill_epsilon.
/// - UniformLeft: X(t) = X(0) - t on (0, hi), lifetime X(0). Deterministic.
struct DiffusionModel {
    using point_type = double;

    DiffusionKind kind = DiffusionKind::BrownianInterval;
    double lo = 0.0;
    double hi = 1.0;
    double nu = 0.0;
    double dt = 1e-4;
    bool bridge_correction = true;
    double kill_epsilon = 1e-2;
    /// Bessel steps are min(dt, (step_scale * x)^2) so that the singular
    /// drift stays resolved near the origin.
    double step_scale = 0.1;
    /// Keep every `path_stride`-th step when recording paths.
    std::size_t path_stride = 10;

    bool operator==(const DiffusionModel&) const = default;

    bool contains(double x) const { return x > lo && x < hi; }
    /// Whether the reference measure is finite (so delta and m x m starts
    /// are defined). False for Bessel, whose measure r^(nu-1) dr has
    /// infinite mass.
    bool has_finite_reference() const { return kind != DiffusionKind::Bessel; }
    double drift(double x) const;
    /// Position below which a Bessel particle counts as dead.
    double kill_level() const;
    double sample_reference(Rng& rng) const;
};

/// Validated constructors.
DiffusionModel brownian_interval(double lo, double hi, double dt = 1e-4,
                                 bool bridge_correction = true);
DiffusionModel bessel(double nu, double dt = 1e-4, bool bridge_correction = true,
                      double kill_epsilon = 1e-2);
DiffusionModel uniform_left(double hi = 1.0);

/// Throws ModelValidationError if the fields are inconsistent.
void validate(const DiffusionModel& model);

/// Probability that a Brownian bridge over a step of length h, from
/// distance d_old to distance d_new of a boundary, touches the boundary.
double bridge_crossing_probability(double d_old, double d_new, double h);

/// Euler run of two independent copies (exact for UniformLeft). Death is
/// detected by leaving the domain and, with bridge correction, by a
/// per-step crossing coin. If both copies die in the same step a fair coin
/// picks the survivor, which keeps its pre-step position, and tie is set.
Excursion<double> sample_excursion(const DiffusionModel& model, double x, double y,
                                   double horizon, Rng& rng, Path<double>* path = nullptr);

/// One draw of the lifetime from x; +inf when the run reaches `horizon`.
double sample_lifetime(const DiffusionModel& model, double x, Rng& rng,
                       double horizon = 1e6);

/// Closed forms for standard Brownian motion killed on leaving (lo, hi).
namespace interval_closed_form {
/// E^x zeta = (x - lo)(hi - x).
double mean_lifetime(double lo, double hi, double x);
/// Green function of 1/2 d^2/dx^2: 2 (min - lo)(hi - max) / (hi - lo).
double green(double lo, double hi, double x, double y);
/// ||G|| with m the normalized Lebesgue measure: (hi - lo)^2 / 6.
double g_norm(double lo, double hi);
/// E^x exp(-lambda zeta).
double laplace_lifetime(double lo, double hi, double x, double lambda);
/// Average of E^x exp(-lambda zeta) over x uniform on (lo, hi).
double mean_laplace_lifetime(double lo, double hi, double lambda);
} // namespace interval_closed_form

} // namespace fvsim
