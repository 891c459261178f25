#include "fvsim/config.hpp"
#include "fvsim/error.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace fvsim;

namespace {

const std::filesystem::path kConfigs = FVSIM_CONFIG_DIR;

json two_state_doc() {
    return json::parse(R"({
      "experiment": "verify",
      "master_seed": 42,
      "model": {"kind": "finite_chain", "states": 2, "jump_rates": [0, 1, 1, 0],
                "kill_rates": [1, 2], "ref_measure": [1, 1]},
      "params": {"lambdas": [0, 0.5], "f": "indicator:0", "replicates": 10}
    })");
}

} // namespace

TEST(Config, RoundTripsBundledConfigs) {
    for (const auto& entry : std::filesystem::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".json") continue;
        const auto c = load_config(entry.path());
        const auto again = parse_config(to_json(c));
        EXPECT_EQ(c, again) << entry.path();
        EXPECT_EQ(to_json(again), to_json(c));
    }
}

TEST(Config, ParsesFields) {
    const auto c = parse_config(two_state_doc());
    EXPECT_EQ(c.experiment, ExperimentKind::Verify);
    EXPECT_EQ(c.master_seed, 42u);
    EXPECT_EQ(c.params.lambdas, (std::vector<double>{0, 0.5}));
    EXPECT_EQ(c.params.f.name, "indicator:0");
    EXPECT_EQ(c.params.g.name, "one");
    EXPECT_FALSE(c.threads.has_value());
}

TEST(Config, Errors) {
    auto doc = two_state_doc();
    doc["bogus"] = 1;
    EXPECT_THROW(parse_config(doc), ConfigParseError);

    doc = two_state_doc();
    doc.erase("master_seed");
    EXPECT_THROW(parse_config(doc), ConfigParseError);

    doc = two_state_doc();
    doc["params"]["replicates"] = 0;
    EXPECT_THROW(parse_config(doc), ConfigParseError);

    doc = two_state_doc();
    doc["params"]["f"] = "cosine";
    EXPECT_THROW(parse_config(doc), ConfigParseError);

    doc = two_state_doc();
    doc["experiment"] = "plot";
    EXPECT_THROW(parse_config(doc), ConfigParseError);

    doc = two_state_doc();
    doc["threads"] = 0;
    EXPECT_THROW(parse_config(doc), ConfigParseError);

    doc = two_state_doc();
    doc["params"]["stop"] = {{"extinction_window", 1}};
    EXPECT_THROW(parse_config(doc), ConfigParseError);
}

TEST(Config, ModelErrorsSurfaceOnBuild) {
    auto doc = two_state_doc();
    doc["model"]["jump_rates"] = {0, 1, 2, 0};
    const auto c = parse_config(doc);
    EXPECT_THROW(build_model(c.model), ModelValidationError);
}

TEST(Config, ResolveFunction) {
    EXPECT_TRUE(resolve_function({"one", {}}, 3).is_one());
    const auto ind = resolve_function({"indicator:2", {}}, 3);
    EXPECT_EQ(ind.values(3), (std::vector<double>{0, 0, 1}));
    EXPECT_THROW(resolve_function({"indicator:3", {}}, 3), ConfigParseError);
    EXPECT_THROW(resolve_function({"indicator:x", {}}, 3), ConfigParseError);
    EXPECT_THROW(resolve_function({"table", {1, 2}}, 3), ConfigParseError);
}

TEST(Config, HashIgnoresThreads) {
    auto a = parse_config(two_state_doc());
    auto b = a;
    b.threads = 8;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.master_seed = 43;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, StartsFileIsResolvedNextToConfig) {
    const auto dir = std::filesystem::temp_directory_path() / "fvsim_config_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "starts.csv") << "x,y\n0.25,0.5\n0.75,0.125\n";
    std::ofstream(dir / "c.json") << R"({"experiment": "simulate", "master_seed": 1,
        "model": {"kind": "uniform_left", "domain": [0, 1]},
        "params": {"starts_file": "starts.csv"}})";
    const auto c = load_config(dir / "c.json");
    ASSERT_EQ(c.params.starts.size(), 2u);
    EXPECT_EQ(c.params.starts[1], (std::pair<double, double>{0.75, 0.125}));
    std::ofstream(dir / "bad.csv") << "0.25;0.5\n";
    std::ofstream(dir / "d.json") << R"({"experiment": "simulate", "master_seed": 1,
        "model": {"kind": "uniform_left", "domain": [0, 1]},
        "params": {"starts_file": "bad.csv"}})";
    EXPECT_THROW(load_config(dir / "d.json"), ConfigParseError);
    std::filesystem::remove_all(dir);
}

TEST(Seeds, DistinctAndStable) {
    EXPECT_NE(derive_replicate_seed(7, 0), derive_replicate_seed(7, 1));
    EXPECT_EQ(derive_replicate_seed(7, 5), derive_replicate_seed(7, 5));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100000; ++i) seen.insert(derive_replicate_seed(12345, i));
    EXPECT_EQ(seen.size(), 100000u);
    Rng a = make_rng(3, 9), b = make_rng(3, 9);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}
