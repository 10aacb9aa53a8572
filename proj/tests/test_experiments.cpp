#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chemdist/csv.hpp"
#include "chemdist/experiments.hpp"

using namespace chemdist;

TEST_SUITE_BEGIN("experiments");

namespace {

const char* kConfigText = R"(
# long-edge scaling at toy size
experiment = longedge-scaling
grid = 4, 8
replicates = 120
seed = 99
out = OUTSTEM

[model]
model = boolean
dim = 2
gamma = 0.5
intensity = 1
window = 8
pad = 0
)";

std::string temp_stem(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "chemdist_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

ExperimentConfig toy_config(const std::string& stem) {
    std::string text = kConfigText;
    text.replace(text.find("OUTSTEM"), 7, stem);
    return parse_config(text);
}

}  // namespace

TEST_CASE("config parsing") {
    const auto config = toy_config("x");
    CHECK(config.kind == ExperimentKind::LongedgeScaling);
    CHECK(config.grid == std::vector<double>{4.0, 8.0});
    CHECK(config.replicates == 120);
    CHECK(config.seed == 99);
    CHECK(config.model.kind == ModelKind::Boolean);
    CHECK(config.model.gamma == 0.5);
    CHECK(config.model.pad == 0.0);
    CHECK(config.model.seed == 99);
    config.validate();
}

TEST_CASE("config diagnostics name the offending key") {
    CHECK_THROWS_WITH_AS(parse_config("bogus = 1\n"), doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[model]\nshape = 1\n"), doctest::Contains("shape"),
                         ConfigError);
    CHECK_THROWS_AS(parse_config("[weird]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("experiment espresso\n"), ConfigError);

    auto config = toy_config("x");
    config.grid.clear();
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = toy_config("x");
    config.grid = {8.0, 4.0};
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = toy_config("x");
    config.replicates = 50;  // probability estimates need >= 100
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("experiment reruns are byte-identical modulo the timestamp line") {
    const auto stem_a = temp_stem("repro_a");
    const auto stem_b = temp_stem("repro_b");
    auto config = toy_config(stem_a);
    run_experiment(config);
    config.out = stem_b;
    run_experiment(config);

    CHECK(csv::read_without_comments(stem_a + ".rows.csv") ==
          csv::read_without_comments(stem_b + ".rows.csv"));
    CHECK(csv::read_without_comments(stem_a + ".summary.csv") ==
          csv::read_without_comments(stem_b + ".summary.csv"));
}

TEST_CASE("resuming a truncated run reproduces the uninterrupted output") {
    const auto stem_full = temp_stem("resume_full");
    const auto stem_part = temp_stem("resume_part");
    auto config = toy_config(stem_full);
    const auto full = run_experiment(config);

    // Keep the comment, header and the first 57 data rows.
    {
        std::ifstream in(stem_full + ".rows.csv");
        std::ofstream out(stem_part + ".rows.csv");
        std::string line;
        int data_rows = 0;
        while (std::getline(in, line)) {
            const bool is_data = !line.empty() && line[0] != '#' && line.find("m,n") != 0;
            if (is_data && ++data_rows > 57) break;
            out << line << "\n";
        }
    }
    config.out = stem_part;
    config.resume = true;
    const auto resumed = run_experiment(config);

    CHECK(csv::read_without_comments(stem_full + ".rows.csv") ==
          csv::read_without_comments(stem_part + ".rows.csv"));
    CHECK(csv::read_without_comments(stem_full + ".summary.csv") ==
          csv::read_without_comments(stem_part + ".summary.csv"));
    REQUIRE(full.scales.size() == resumed.scales.size());
    for (std::size_t s = 0; s < full.scales.size(); ++s)
        CHECK(full.scales[s].successes == resumed.scales[s].successes);
}

TEST_CASE("replicate seeds are pairwise distinct") {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 5000; ++i) seeds.push_back(replicate_seed(7, i));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("degree-check experiment pipeline") {
    ExperimentConfig config;
    config.kind = ExperimentKind::DegreeCheck;
    config.replicates = 30;
    config.seed = 5;
    config.out = temp_stem("degree");
    config.model.kind = ModelKind::Gilbert;
    config.model.dim = 2;
    config.model.window_side = 16.0;
    config.model.pad = 1.5;
    const auto result = run_experiment(config);
    CHECK(result.expected == doctest::Approx(3.14159).epsilon(1e-3));
    CHECK(std::abs(result.mean_degree - result.expected) < 4.0 * result.mean_stderr + 0.05);

    config.model.kind = ModelKind::Lrp;
    CHECK_THROWS_AS(run_experiment(config), ConfigError);
}

TEST_CASE("D-event experiment: edge-free model never defeats linearity") {
    ExperimentConfig config;
    config.kind = ExperimentKind::DEventDecay;
    config.grid = {4.0, 8.0};
    config.replicates = 100;
    config.seed = 3;
    config.inner_L = 2.0;
    config.out = temp_stem("devent_none");
    config.model.kind = ModelKind::Lrp;
    config.model.dim = 1;
    config.model.delta = 3.0;
    config.model.amplitude = 0.0;
    config.model.window_side = 32.0;
    config.model.pad = 0.0;
    const auto result = run_experiment(config);
    for (const auto& s : result.scales) CHECK(s.estimate == 0.0);

    // A huge eta is impossible to satisfy on a connected graph.
    config.eta = 1e6;
    config.model.amplitude = 1.0;
    config.out = temp_stem("devent_all");
    const auto dense = run_experiment(config);
    for (const auto& s : dense.scales) CHECK(s.estimate > 0.9);
}

TEST_CASE("window validation for D-event experiments") {
    ExperimentConfig config;
    config.kind = ExperimentKind::DEventDecay;
    config.grid = {16.0};
    config.replicates = 100;
    config.model.kind = ModelKind::Gilbert;
    config.model.dim = 2;
    config.model.window_side = 32.0;  // < 4 * 16
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("worker count respects the environment cap") {
    // The build environment may or may not define it; only sanity-check.
    CHECK(worker_count() >= 1);
}

TEST_SUITE_END();
