#include "fvsim/error.hpp"
#include "fvsim/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fvsim;

namespace {

const std::filesystem::path kConfigs = FVSIM_CONFIG_DIR;
const std::filesystem::path kGolden = FVSIM_GOLDEN_DIR;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("fvsim_experiment_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST(Experiment, OracleMatchesGolden) {
    const auto result = run_experiment(load_config(kConfigs / "two_state_oracle.json"), 1);
    EXPECT_TRUE(result.pass);
    EXPECT_EQ(dump_json(result.report), slurp(kGolden / "two_state_oracle" / "report.json"));
    EXPECT_EQ(result.files.at("oracle.json"), slurp(kGolden / "two_state_oracle" / "oracle.json"));

    const auto doc = json::parse(result.files.at("oracle.json"));
    EXPECT_EQ(doc["ordering"], "row-major:i*n+j");
    EXPECT_NEAR(doc["g_norm"].get<double>(), 0.7, 1e-14);
    EXPECT_NEAR(doc["potential_kernel"]["entries"][0][0].get<double>(), 0.6, 1e-14);
    EXPECT_NEAR(doc["potential_kernel"]["entries"][1][1].get<double>(), 0.4, 1e-14);
}

TEST(Experiment, UniformLeftSimulateMatchesGolden) {
    const auto result = run_experiment(load_config(kConfigs / "uniform_left_simulate.json"), 1);
    EXPECT_TRUE(result.pass);
    EXPECT_EQ(dump_json(result.report), slurp(kGolden / "uniform_left_simulate" / "report.json"));
    EXPECT_EQ(result.files.at("runs.json"), slurp(kGolden / "uniform_left_simulate" / "runs.json"));
    EXPECT_EQ(result.files.at("trajectories/replicate_000000.csv"),
              slurp(kGolden / "uniform_left_simulate" / "replicate_000000.csv"));
}

TEST(Experiment, ReportSchema) {
    const auto result = run_experiment(load_config(kConfigs / "two_state_oracle.json"), 1);
    const auto& r = result.report;
    for (const char* key : {"schema", "schema_version", "experiment", "config_hash", "model_hash",
                            "master_seed", "estimates", "tests", "verdicts", "tie_counts", "pass"})
        EXPECT_TRUE(r.contains(key)) << key;
    EXPECT_EQ(r["schema_version"], kReportSchemaVersion);
    for (const auto& t : r["tests"])
        for (const char* key : {"name", "statistic", "p_value", "n_samples", "pass", "target_ref"})
            EXPECT_TRUE(t.contains(key)) << key;
}

TEST(Experiment, ThreadCountDoesNotChangeReport) {
    auto config = load_config(kConfigs / "two_state_verify.json");
    config.params.replicates = 2000;
    const auto one = run_experiment(config, 1);
    const auto four = run_experiment(config, 4);
    EXPECT_EQ(dump_json(one.report), dump_json(four.report));

    auto sim = load_config(kConfigs / "brownian_control.json");
    sim.params.replicates = 6;
    sim.params.stop.max_branches = 20;
    const auto a = run_experiment(sim, 1);
    const auto b = run_experiment(sim, 3);
    EXPECT_EQ(dump_json(a.report), dump_json(b.report));
    EXPECT_EQ(a.files, b.files);
}

TEST(Experiment, PassFlagFollowsTests) {
    auto config = load_config(kConfigs / "brownian_control.json");
    config.params.replicates = 3;
    config.params.stop.max_branches = 60;
    config.params.stop.extinction_epsilon = 1e3; // everything looks extinct
    const auto result = run_experiment(config, 1);
    EXPECT_FALSE(result.pass);
    EXPECT_FALSE(result.report["pass"].get<bool>());
}

TEST(Experiment, WriteResultStagesFiles) {
    const auto dir = scratch("write");
    const auto result = run_experiment(load_config(kConfigs / "two_state_oracle.json"), 1);
    write_result(result, dir, 1.5);
    EXPECT_EQ(slurp(dir / "report.json"), dump_json(result.report));
    EXPECT_TRUE(std::filesystem::exists(dir / "oracle.json"));
    EXPECT_NEAR(json::parse(slurp(dir / "timing.json"))["wall_time_seconds"].get<double>(), 1.5,
                0.0);
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        EXPECT_EQ(e.path().string().find(".partial"), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(Experiment, BadModelThrowsBeforeAnythingIsWritten) {
    auto config = load_config(kConfigs / "two_state_oracle.json");
    config.model.jump_rates = {0, 1, 2, 0};
    EXPECT_THROW(run_experiment(config, 1), ModelValidationError);

    auto diffusion = load_config(kConfigs / "bessel_extinction.json");
    diffusion.experiment = ExperimentKind::Oracle;
    EXPECT_THROW(run_experiment(diffusion, 1), ConfigParseError);
}

TEST(Experiment, ResolveThreads) {
    ExperimentConfig c;
    EXPECT_EQ(resolve_threads(3u, c), 3u);
    c.threads = 2;
    EXPECT_EQ(resolve_threads(std::nullopt, c), 2u);
    EXPECT_EQ(resolve_threads(5u, c), 5u);
    c.threads.reset();
    EXPECT_GE(resolve_threads(std::nullopt, c), 1u);
}

TEST(Experiment, DumpJsonUsesSeventeenDigits) {
    const json doc = {{"a", 0.1}, {"b", 1}, {"c", json::array({1.0 / 3.0})}, {"d", "x"}};
    const std::string text = dump_json(doc);
    EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
    EXPECT_NE(text.find("0.33333333333333331"), std::string::npos);
    EXPECT_EQ(json::parse(text)["a"].get<double>(), 0.1);
}

TEST(ParallelFor, RethrowsWorkerFailure) {
    std::vector<int> seen(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { seen[i] = 1; });
    EXPECT_EQ(std::count(seen.begin(), seen.end(), 1), 100);
    EXPECT_THROW(parallel_for(100, 4,
                              [](std::size_t i) {
                                  if (i == 37) throw InvalidArgument("boom");
                              }),
                 InvalidArgument);
}
