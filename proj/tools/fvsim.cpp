#include "fvsim/error.hpp"
#include "fvsim/experiment.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitBadInput = 2;

void print_summary(const fvsim::ExperimentResult& result) {
    for (const auto& t : result.report["tests"]) {
        std::cout << (t["pass"].get<bool>() ? "PASS " : "FAIL ") << t["name"].get<std::string>()
                  << "  statistic=" << t["statistic"].dump() << " p=" << t["p_value"].dump()
                  << "\n";
    }
    std::cout << (result.pass ? "overall: pass" : "overall: fail") << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-particle Fleming-Viot simulator and exact oracle"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;

    for (const char* name : {"oracle", "simulate", "verify", "extinction"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--threads", threads, "worker threads (0 = automatic)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitPass : kExitBadInput;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        auto config = fvsim::load_config(config_path);
        const auto requested = fvsim::experiment_kind_from_string(command);
        if (config.experiment != requested)
            throw fvsim::ConfigParseError("config is for '" +
                                          std::string(fvsim::to_string(config.experiment)) +
                                          "', not '" + command + "'");
        if (seed) config.master_seed = *seed;

        const unsigned workers = fvsim::resolve_threads(threads, config);
        const auto start = std::chrono::steady_clock::now();
        const auto result = fvsim::run_experiment(config, workers);
        const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;

        fvsim::write_result(result, out_dir, wall.count());
        print_summary(result);
        return result.pass ? kExitPass : kExitFail;
    } catch (const fvsim::ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const fvsim::ModelValidationError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const fvsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
}
