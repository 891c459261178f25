#include "fvsim/fv_engine.hpp"

namespace fvsim {

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::SurvivedToCap: return "survived_to_cap";
    case Verdict::ExtinctSimultaneous: return "extinct_simultaneous";
    case Verdict::ExtinctDetected: return "extinct_detected";
    case Verdict::HorizonReached: return "horizon_reached";
    }
    return "?";
}

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::Jump: return "jump";
    case EventKind::Branch: return "branch";
    case EventKind::DeathBoth: return "death_both";
    case EventKind::Censor: return "censor";
    }
    return "?";
}

void StopCriteria::validate() const {
    if (max_branches < 1) throw InvalidArgument("max_branches must be >= 1");
    if (!(extinction_epsilon > 0.0)) throw InvalidArgument("extinction_epsilon must be > 0");
    if (extinction_window < 2) throw InvalidArgument("extinction_window must be >= 2");
    if (time_horizon && !(*time_horizon > 0.0))
        throw InvalidArgument("time_horizon must be > 0");
}

bool extinction_verdict(std::span<const double> gaps, double epsilon, std::size_t window) {
    if (window > gaps.size())
        throw WindowTooLarge("window of " + std::to_string(window) + " exceeds " +
                             std::to_string(gaps.size()) + " recorded gaps");
    double tail = 0.0;
    for (double g : gaps.last(window)) tail += g;
    return tail < epsilon;
}

Eigen::MatrixXd occupation_fractions(const FVTrajectory<std::size_t>& traj, std::size_t n,
                                     double horizon) {
    detail::require_skeleton(traj, horizon);
    std::vector<detail::CompensatedSum> acc(n * n);
    const auto& ev = traj.skeleton;
    for (std::size_t k = 0; k + 1 < ev.size() && ev[k].time < horizon; ++k) {
        if (!ev[k].x || !ev[k].y) break;
        const std::size_t i = *ev[k].x;
        const std::size_t j = *ev[k].y;
        if (i >= n || j >= n) throw InvalidArgument("skeleton state outside the chain");
        acc[i * n + j].add(std::min(ev[k + 1].time, horizon) - ev[k].time);
    }
    const auto sn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd out(sn, sn);
    for (Eigen::Index i = 0; i < sn; ++i)
        for (Eigen::Index j = 0; j < sn; ++j)
            out(i, j) = acc[static_cast<std::size_t>(i * sn + j)].value() / horizon;
    return out;
}

} // namespace fvsim
