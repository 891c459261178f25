#pragma once

#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace fvsim {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Which of the two independent copies reached its lifetime first.
enum class Died { X, Y, Both, None };

std::string_view to_string(Died d);

/// One point of a sampled path of the pair, time measured from the start
/// of the excursion.
template <typename Point> struct PathPoint {
    double time;
    Point x;
    Point y;
};

/// One joint run of two independent copies until the first death.
///
/// - died == Both  <=> survivor is empty and the run is not censored;
/// - died == None  <=> censored_at is set, and then sigma <= *censored_at.
template <typename Point> struct Excursion {
    double sigma = 0.0;
    std::optional<Point> survivor; ///< Z; empty encodes the cemetery.
    Died died = Died::None;
    std::optional<double> censored_at;
    /// The step had both copies crossing the boundary; the survivor was
    /// picked by a fair coin. Only discretized diffusions set this.
    bool tie = false;
    /// Positions at time sigma of the copies that are still alive.
    std::optional<Point> x_end;
    std::optional<Point> y_end;
    /// Exact survivor position minus the stored *survivor, when the model
    /// knows it (uniform_left, where position and remaining lifetime are the
    /// same number). The next gap from the survivor is short by this much.
    double survivor_residual = 0.0;

    bool censored() const { return censored_at.has_value(); }
};

template <typename Point> using Path = std::vector<PathPoint<Point>>;

} // namespace fvsim
