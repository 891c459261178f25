#include "fvsim/diffusion.hpp"

#include "fvsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>
#include <string>

namespace fvsim {

std::string_view to_string(DiffusionKind kind) {
    switch (kind) {
    case DiffusionKind::BrownianInterval: return "brownian_interval";
    case DiffusionKind::Bessel: return "bessel";
    case DiffusionKind::UniformLeft: return "uniform_left";
    }
    return "?";
}

DiffusionKind diffusion_kind_from_string(std::string_view name) {
    if (name == "brownian_interval") return DiffusionKind::BrownianInterval;
    if (name == "bessel") return DiffusionKind::Bessel;
    if (name == "uniform_left") return DiffusionKind::UniformLeft;
    throw ModelValidationError("unknown diffusion kind '" + std::string(name) + "'");
}

void validate(const DiffusionModel& model) {
    if (!(model.dt > 0.0) || !std::isfinite(model.dt))
        throw ModelValidationError("dt must be positive and finite");
    if (!(model.lo < model.hi)) throw ModelValidationError("domain must be nonempty");
    if (model.path_stride == 0) throw ModelValidationError("path_stride must be >= 1");
    switch (model.kind) {
    case DiffusionKind::BrownianInterval:
        if (!std::isfinite(model.lo) || !std::isfinite(model.hi))
            throw ModelValidationError("brownian_interval needs a bounded domain");
        break;
    case DiffusionKind::Bessel:
        if (model.lo != 0.0 || !std::isinf(model.hi))
            throw ModelValidationError("bessel lives on (0, inf)");
        if (!std::isfinite(model.nu)) throw ModelValidationError("bessel nu must be finite");
        if (!(model.kill_epsilon > 0.0)) throw ModelValidationError("kill_epsilon must be positive");
        if (!(model.step_scale > 0.0)) throw ModelValidationError("step_scale must be positive");
        break;
    case DiffusionKind::UniformLeft:
        if (model.lo != 0.0 || !std::isfinite(model.hi))
            throw ModelValidationError("uniform_left lives on (0, hi) with finite hi");
        break;
    }
}

DiffusionModel brownian_interval(double lo, double hi, double dt, bool bridge_correction) {
    DiffusionModel m;
    m.kind = DiffusionKind::BrownianInterval;
    m.lo = lo;
    m.hi = hi;
    m.dt = dt;
    m.bridge_correction = bridge_correction;
    validate(m);
    return m;
}

DiffusionModel bessel(double nu, double dt, bool bridge_correction, double kill_epsilon) {
    DiffusionModel m;
    m.kind = DiffusionKind::Bessel;
    m.lo = 0.0;
    m.hi = kInfinity;
    m.nu = nu;
    m.dt = dt;
    m.bridge_correction = bridge_correction;
    m.kill_epsilon = kill_epsilon;
    validate(m);
    return m;
}

DiffusionModel uniform_left(double hi) {
    DiffusionModel m;
    m.kind = DiffusionKind::UniformLeft;
    m.lo = 0.0;
    m.hi = hi;
    m.bridge_correction = false;
    validate(m);
    return m;
}

double DiffusionModel::drift(double x) const {
    switch (kind) {
    case DiffusionKind::BrownianInterval: return 0.0;
    case DiffusionKind::Bessel: return (nu - 1.0) / (2.0 * x);
    case DiffusionKind::UniformLeft: return -1.0;
    }
    return 0.0;
}

double DiffusionModel::kill_level() const {
    return kind == DiffusionKind::Bessel ? std::sqrt(dt) * kill_epsilon : lo;
}

double DiffusionModel::sample_reference(Rng& rng) const {
    if (!has_finite_reference())
        throw InvalidInitial("reference measure is infinite; no delta or product start");
    for (;;) {
        const double x = lo + (hi - lo) * uniform01(rng);
        if (contains(x)) return x;
    }
}

double bridge_crossing_probability(double d_old, double d_new, double h) {
    if (d_old <= 0.0 || d_new <= 0.0) return 1.0;
    return std::exp(-2.0 * d_old * d_new / h);
}

namespace {

bool is_alive(const DiffusionModel& model, double x) {
    if (model.kind == DiffusionKind::Bessel) return x > model.kill_level();
    return model.contains(x);
}

double step_size(const DiffusionModel& model, double x, double y) {
    if (model.kind != DiffusionKind::Bessel) return model.dt;
    const double s = model.step_scale * std::min(x, y);
    return std::min(model.dt, s * s);
}

// Probability of an undetected boundary visit over a step that stayed
// inside the domain.
double missed_crossing(const DiffusionModel& model, double from, double to, double h) {
    if (model.kind == DiffusionKind::Bessel) {
        const double level = model.kill_level();
        return bridge_crossing_probability(from - level, to - level, h);
    }
    const double low = bridge_crossing_probability(from - model.lo, to - model.lo, h);
    const double high = bridge_crossing_probability(model.hi - from, model.hi - to, h);
    return 1.0 - (1.0 - low) * (1.0 - high);
}

bool step_kills(const DiffusionModel& model, double from, double to, double h, Rng& rng) {
    if (!is_alive(model, to)) return true;
    if (!model.bridge_correction) return false;
    return uniform01(rng) < missed_crossing(model, from, to, h);
}

bool start_ok(const DiffusionModel& model, double x) {
    return model.contains(x) && is_alive(model, x);
}

// Survivor position for the deterministic model, nudged by at most a few
// ulps so that its own lifetime ends exactly when its parent's would have:
// sigma + z == y in floating point.
// y - sigma rounded, plus the exact rounding error (Knuth two-sum).
std::pair<double, double> exact_difference(double y, double sigma) {
    const double z = y - sigma;
    const double b = z - y;
    const double err = (y - (z - b)) + (-sigma - b);
    return {z, err};
}

Excursion<double> uniform_left_excursion(double x, double y, double horizon,
                                         Path<double>* path) {
    Excursion<double> ex;
    const double sigma = std::min(x, y);
    if (sigma > horizon) {
        ex.sigma = horizon;
        ex.censored_at = horizon;
        ex.x_end = x - horizon;
        ex.y_end = y - horizon;
        return ex;
    }
    ex.sigma = sigma;
    if (path) path->push_back({sigma, x - sigma, y - sigma});
    if (x == y) {
        ex.died = Died::Both;
    } else if (x < y) {
        ex.died = Died::X;
        std::tie(ex.survivor, ex.survivor_residual) = exact_difference(y, x);
        ex.y_end = ex.survivor;
    } else {
        ex.died = Died::Y;
        std::tie(ex.survivor, ex.survivor_residual) = exact_difference(x, y);
        ex.x_end = ex.survivor;
    }
    return ex;
}

} // namespace

Excursion<double> sample_excursion(const DiffusionModel& model, double x, double y,
                                   double horizon, Rng& rng, Path<double>* path) {
    if (!start_ok(model, x) || !start_ok(model, y))
        throw InvalidStart("excursion start outside the domain");
    if (!(horizon > 0.0)) throw InvalidStart("excursion horizon must be positive");
    if (model.kind == DiffusionKind::UniformLeft) return uniform_left_excursion(x, y, horizon, path);

    Excursion<double> ex;
    double t = 0.0;
    std::size_t step = 0;
    for (;;) {
        double h = step_size(model, x, y);
        bool last = false;
        if (t + h >= horizon) {
            h = horizon - t;
            last = true;
        }
        if (h > 0.0) {
            const double sh = std::sqrt(h);
            const double xn = x + model.drift(x) * h + sh * standard_normal(rng);
            const double yn = y + model.drift(y) * h + sh * standard_normal(rng);
            const bool x_dead = step_kills(model, x, xn, h, rng);
            const bool y_dead = step_kills(model, y, yn, h, rng);
            t += h;
            if (x_dead || y_dead) {
                ex.sigma = last ? horizon : t;
                if (x_dead && y_dead) {
                    ex.tie = true;
                    if (uniform01(rng) < 0.5) {
                        ex.died = Died::Y;
                        ex.survivor = x;
                    } else {
                        ex.died = Died::X;
                        ex.survivor = y;
                    }
                } else if (x_dead) {
                    ex.died = Died::X;
                    ex.survivor = yn;
                } else {
                    ex.died = Died::Y;
                    ex.survivor = xn;
                }
                (ex.died == Died::X ? ex.y_end : ex.x_end) = ex.survivor;
                return ex;
            }
            x = xn;
            y = yn;
            if (path && ++step % model.path_stride == 0) path->push_back({t, x, y});
        }
        if (last || h <= 0.0) {
            ex.sigma = horizon;
            ex.censored_at = horizon;
            ex.x_end = x;
            ex.y_end = y;
            return ex;
        }
    }
}

double sample_lifetime(const DiffusionModel& model, double x, Rng& rng, double horizon) {
    if (!start_ok(model, x)) throw InvalidStart("lifetime start outside the domain");
    if (model.kind == DiffusionKind::UniformLeft) return x <= horizon ? x : kInfinity;
    double t = 0.0;
    while (t < horizon) {
        const double h = step_size(model, x, x);
        const double xn = x + model.drift(x) * h + std::sqrt(h) * standard_normal(rng);
        t += h;
        if (step_kills(model, x, xn, h, rng)) return t;
        x = xn;
    }
    return kInfinity;
}

namespace interval_closed_form {

double mean_lifetime(double lo, double hi, double x) { return (x - lo) * (hi - x); }

double green(double lo, double hi, double x, double y) {
    const double a = std::min(x, y);
    const double b = std::max(x, y);
    return 2.0 * (a - lo) * (hi - b) / (hi - lo);
}

double g_norm(double lo, double hi) { return (hi - lo) * (hi - lo) / 6.0; }

double laplace_lifetime(double lo, double hi, double x, double lambda) {
    if (lambda == 0.0) return 1.0;
    const double s = std::sqrt(2.0 * lambda);
    const double c = 0.5 * (lo + hi);
    return std::cosh(s * (x - c)) / std::cosh(s * 0.5 * (hi - lo));
}

double mean_laplace_lifetime(double lo, double hi, double lambda) {
    if (lambda == 0.0) return 1.0;
    const double a = std::sqrt(2.0 * lambda) * 0.5 * (hi - lo);
    return std::tanh(a) / a;
}

} // namespace interval_closed_form

} // namespace fvsim
