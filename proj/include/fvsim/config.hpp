#pragma once

#include "fvsim/fv_engine.hpp"
#include "fvsim/model.hpp"
#include "fvsim/test_function.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fvsim {

using json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

/// Model description as written in a config file.
struct ModelSpec {
    std::string kind = "finite_chain";
    // finite_chain
    std::size_t states = 0;
    std::vector<double> jump_rates; ///< row-major n x n
    std::vector<double> kill_rates;
    std::vector<double> ref_measure;
    // diffusions
    double lo = 0.0;
    double hi = 1.0;
    double dt = 1e-4;
    bool bridge_correction = true;
    double nu = 0.0;
    double kill_epsilon = 1e-2;
    double step_scale = 0.1;
    std::size_t path_stride = 10;

    bool operator==(const ModelSpec&) const = default;
};

/// A test function by name ("one", "indicator:<state>") or by value table.
struct FunctionSpec {
    std::string name = "one";
    std::vector<double> table;

    bool operator==(const FunctionSpec&) const = default;
};

struct InitialSpec {
    std::string kind = "delta"; ///< delta | product | point
    double x = 0.0;
    double y = 0.0;

    bool operator==(const InitialSpec&) const = default;
};

enum class ExperimentKind { Oracle, Simulate, Verify, Extinction };
std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

struct ExperimentParams {
    std::vector<double> lambdas{0.0, 0.5, 2.0};
    FunctionSpec f;
    FunctionSpec g;
    std::size_t replicates = 1;
    InitialSpec initial;
    /// One run per row, overriding `initial` and `replicates` (simulate).
    std::vector<std::pair<double, double>> starts;
    StopCriteria stop;
    bool dump_trajectories = false;
    double occupation_tolerance = 0.01;
    std::optional<double> min_extinct_fraction;
    std::optional<double> max_extinct_fraction;

    bool operator==(const ExperimentParams&) const = default;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Verify;
    ModelSpec model;
    ExperimentParams params;
    std::uint64_t master_seed = 0;
    /// Empty means automatic.
    std::optional<unsigned> threads;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigParseError on unknown keys, wrong types, or bad values.
ExperimentConfig parse_config(const json& doc);
/// Reads JSON; a `starts_file` key (CSV of x,y rows, relative to the config)
/// is loaded into `starts`.
ExperimentConfig load_config(const std::filesystem::path& path);
json to_json(const ExperimentConfig& config);
json to_json(const ModelSpec& model);

ModelSpec parse_model_spec(const json& doc);
/// Validated model; throws ModelValidationError.
AnyModel build_model(const ModelSpec& spec);

/// Resolve a function spec on a finite chain of n states.
TestFunction resolve_function(const FunctionSpec& spec, std::size_t n);

/// FNV-1a of the canonical JSON text, as 16 hex digits.
std::string content_hash(const json& doc);
/// Hash of the config with `threads` removed, so the scheduling choice
/// never shows up in reports.
std::string config_hash(const ExperimentConfig& config);

} // namespace fvsim
