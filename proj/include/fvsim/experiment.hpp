#pragma once

#include "fvsim/config.hpp"
#include "fvsim/stats.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fvsim {

inline constexpr int kReportSchemaVersion = 1;

/// Everything an experiment produces, held in memory until written.
struct ExperimentResult {
    json report;
    /// Additional files, path relative to the output directory -> content.
    std::map<std::string, std::string> files;
    bool pass = true;
};

/// Run `fn(i)` for i in [0, count) on `threads` workers. Each index is
/// handled exactly once; results must go to per-index slots. The first
/// exception thrown by any worker is rethrown.
template <typename Fn> void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

/// Worker count: explicit request, else the config, else FVSIM_THREADS,
/// else the hardware concurrency.
unsigned resolve_threads(std::optional<unsigned> requested, const ExperimentConfig& config);

/// Executes the configured experiment. The result does not depend on
/// `threads`. Throws ConfigParseError / ModelValidationError on bad input.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads);

json to_json(const stats::TestReport& report);

/// CSV dump of a trajectory skeleton:
/// event_index,time,kind,x,y with 17 significant digits.
template <typename Point> std::string trajectory_csv(const FVTrajectory<Point>& traj);

/// Writes the report, timing and extra files into `out_dir`. Files are
/// staged under temporary names and renamed only once all were written.
void write_result(const ExperimentResult& result, const std::filesystem::path& out_dir,
                  double wall_seconds);

/// 17-significant-digit rendering used for CSV and JSON output.
std::string format_double(double v);

/// Pretty JSON (two-space indent) with every float written by format_double.
/// Non-finite floats become null.
std::string dump_json(const json& doc);

} // namespace fvsim
