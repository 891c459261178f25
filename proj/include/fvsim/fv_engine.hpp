#pragma once

#include "fvsim/error.hpp"
#include "fvsim/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace fvsim {

enum class Verdict { SurvivedToCap, ExtinctSimultaneous, ExtinctDetected, HorizonReached };
std::string_view to_string(Verdict v);

enum class EventKind { Jump, Branch, DeathBoth, Censor };
std::string_view to_string(EventKind k);

/// The pair sits at (x, y) from `time` until the next event. The first
/// event of a skeleton is the initial placement, recorded as a Jump at 0.
template <typename Point> struct SkeletonEvent {
    double time;
    EventKind kind;
    std::optional<Point> x;
    std::optional<Point> y;
};

template <typename Point> struct FVTrajectory {
    Point start_x{};
    Point start_y{};
    std::vector<double> branch_times;  ///< tau_1 < tau_2 < ...
    std::vector<double> gaps;          ///< sigma_n = tau_n - tau_{n-1}
    std::vector<Point> branch_positions; ///< Z_n
    std::vector<SkeletonEvent<Point>> skeleton;
    Verdict verdict = Verdict::SurvivedToCap;
    std::size_t tie_count = 0;
    /// Time up to which the run is defined.
    double end_time = 0.0;
    /// Last branching time, set only for extinct verdicts.
    std::optional<double> extinction_time;

    std::size_t branches() const { return branch_times.size(); }
    bool extinct() const {
        return verdict == Verdict::ExtinctSimultaneous || verdict == Verdict::ExtinctDetected;
    }
};

struct StopCriteria {
    std::size_t max_branches = 10000;
    std::optional<double> time_horizon;
    double extinction_epsilon = 1e-6;
    std::size_t extinction_window = 50;

    bool operator==(const StopCriteria&) const = default;
    void validate() const;
};

struct RunOptions {
    bool record_skeleton = false;
};

template <typename Point> struct Initial {
    enum class Kind { Fixed, Delta, Product };
    Kind kind = Kind::Delta;
    Point x{};
    Point y{};

    static Initial point(Point a, Point b) { return {Kind::Fixed, a, b}; }
    static Initial delta() { return {Kind::Delta, {}, {}}; }
    static Initial product() { return {Kind::Product, {}, {}}; }
};

namespace detail {

// Neumaier compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

} // namespace detail

/// True iff the last `window` gaps sum to less than `epsilon`.
bool extinction_verdict(std::span<const double> gaps, double epsilon, std::size_t window);

template <KilledProcess M>
std::pair<point_t<M>, point_t<M>> draw_initial(const M& model, const Initial<point_t<M>>& init,
                                               Rng& rng) {
    using Kind = typename Initial<point_t<M>>::Kind;
    if (init.kind == Kind::Fixed) {
        if (!model.contains(init.x) || !model.contains(init.y))
            throw InvalidInitial("initial point outside the state space");
        return {init.x, init.y};
    }
    if (!has_finite_reference(model))
        throw InvalidInitial("delta and product starts need a finite reference measure");
    const auto a = model.sample_reference(rng);
    const auto b = init.kind == Kind::Delta ? a : model.sample_reference(rng);
    return {a, b};
}

/// Two-particle Fleming-Viot system built by concatenating excursions:
/// after each death both coordinates restart at the survivor position.
template <KilledProcess M>
FVTrajectory<point_t<M>> run_fv(const M& model, const Initial<point_t<M>>& init,
                                const StopCriteria& stop, Rng& rng, const RunOptions& options = {}) {
    using P = point_t<M>;
    stop.validate();
    FVTrajectory<P> traj;
    auto [x, y] = draw_initial(model, init, rng);
    traj.start_x = x;
    traj.start_y = y;
    if (options.record_skeleton) traj.skeleton.push_back({0.0, EventKind::Jump, x, y});

    Path<P> path;
    Path<P>* sink = options.record_skeleton ? &path : nullptr;
    // Branch times are running sums of gaps; compensated so that exact
    // models (uniform_left) land on their exact supremum.
    detail::CompensatedSum clock;
    double residual = 0.0;
    double tau = 0.0;
    for (;;) {
        const double horizon = stop.time_horizon ? *stop.time_horizon - tau : kDefaultHorizon;
        if (!(horizon > 0.0)) {
            traj.verdict = Verdict::HorizonReached;
            tau = *stop.time_horizon;
            break;
        }
        path.clear();
        const Excursion<P> ex = sample_excursion(model, x, y, horizon, rng, sink);
        for (const auto& p : path) traj.skeleton.push_back({tau + p.time, EventKind::Jump, p.x, p.y});
        if (ex.tie) ++traj.tie_count;

        if (ex.censored()) {
            traj.verdict = Verdict::HorizonReached;
            tau = stop.time_horizon ? *stop.time_horizon : tau + ex.sigma;
            if (options.record_skeleton)
                traj.skeleton.push_back({tau, EventKind::Censor, ex.x_end, ex.y_end});
            break;
        }

        clock.add(ex.sigma);
        clock.add(residual);
        residual = ex.survivor_residual;
        tau = clock.value();
        traj.branch_times.push_back(tau);
        traj.gaps.push_back(ex.sigma);

        if (ex.died == Died::Both) {
            traj.verdict = Verdict::ExtinctSimultaneous;
            traj.extinction_time = tau;
            if (options.record_skeleton)
                traj.skeleton.push_back({tau, EventKind::DeathBoth, std::nullopt, std::nullopt});
            break;
        }

        const P z = *ex.survivor;
        traj.branch_positions.push_back(z);
        if (options.record_skeleton) traj.skeleton.push_back({tau, EventKind::Branch, z, z});
        x = z;
        y = z;

        if (traj.gaps.size() >= stop.extinction_window &&
            extinction_verdict(traj.gaps, stop.extinction_epsilon, stop.extinction_window)) {
            traj.verdict = Verdict::ExtinctDetected;
            traj.extinction_time = tau;
            break;
        }
        if (traj.branches() >= stop.max_branches) {
            traj.verdict = Verdict::SurvivedToCap;
            break;
        }
    }
    traj.end_time = tau;
    return traj;
}

template <typename Point> struct EmbeddedStep {
    std::optional<Point> next; ///< empty if both copies died together
    double sigma = 0.0;
    bool tie = false;
};

/// One step of the chain of branching positions: an excursion from (z, z).
/// Throws CensoredStep if the excursion hits the default horizon.
template <KilledProcess M>
EmbeddedStep<point_t<M>> embedded_chain_sample(const M& model, point_t<M> z, Rng& rng) {
    if (!model.contains(z)) throw InvalidStart("embedded chain state outside the state space");
    const auto ex = sample_excursion(model, z, z, kDefaultHorizon, rng);
    if (ex.censored()) throw CensoredStep("excursion reached the censoring horizon");
    return {ex.survivor, ex.sigma, ex.tie};
}

namespace detail {

template <typename Point>
void require_skeleton(const FVTrajectory<Point>& traj, double horizon) {
    if (!(horizon > 0.0)) throw InvalidArgument("averaging horizon must be positive");
    if (traj.skeleton.empty())
        throw HorizonExceedsTrajectory("trajectory was run without a skeleton");
    if (horizon > traj.end_time)
        throw HorizonExceedsTrajectory("averaging horizon exceeds the trajectory");
}

} // namespace detail

/// (1/T) integral_0^T phi(x(t), y(t)) dt from the skeleton. Exact for chains
/// (piecewise constant paths), trapezoidal on stored steps for diffusions.
template <typename Point>
double ergodic_average(const FVTrajectory<Point>& traj,
                       const std::function<double(Point, Point)>& phi, double horizon) {
    detail::require_skeleton(traj, horizon);
    detail::CompensatedSum acc;
    const auto& ev = traj.skeleton;
    for (std::size_t k = 0; k + 1 < ev.size() && ev[k].time < horizon; ++k) {
        if (!ev[k].x || !ev[k].y) break;
        const double t0 = ev[k].time;
        const double t1 = std::min(ev[k + 1].time, horizon);
        const double v0 = phi(*ev[k].x, *ev[k].y);
        if constexpr (std::is_integral_v<Point>) {
            acc.add(v0 * (t1 - t0));
        } else {
            double v1 = v0;
            if (ev[k + 1].x && ev[k + 1].y && ev[k + 1].kind != EventKind::Branch) {
                v1 = phi(*ev[k + 1].x, *ev[k + 1].y);
                // Linear interpolation when the horizon cuts the segment.
                if (ev[k + 1].time > t1 && ev[k + 1].time > t0)
                    v1 = v0 + (v1 - v0) * (t1 - t0) / (ev[k + 1].time - t0);
            }
            acc.add(0.5 * (v0 + v1) * (t1 - t0));
        }
    }
    return acc.value() / horizon;
}

/// Fraction of [0, T] spent in each product state (i, j) of an n-state chain.
Eigen::MatrixXd occupation_fractions(const FVTrajectory<std::size_t>& traj, std::size_t n,
                                     double horizon);

} // namespace fvsim
