#ifndef CHEMDIST_EXPERIMENTS_HPP
#define CHEMDIST_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chemdist/graph_core.hpp"
#include "chemdist/long_edges.hpp"
#include "chemdist/mixing.hpp"
#include "chemdist/model_spec.hpp"

namespace chemdist {

enum class ExperimentKind {
    LongedgeScaling,
    PsiCurve,
    DistanceProfile,
    DEventDecay,
    MixingDecay,
    BracketOracle,
    DegreeCheck,
};

ExperimentKind experiment_kind_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

// One experiment = one config. Flat `key = value` text with a `[model]`
// section; see parse_config.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::DegreeCheck;
    ModelSpec model;
    std::vector<double> grid;        // scales: m, radius, r or stage per kind
    std::uint64_t replicates = 100;
    std::uint64_t seed = 1;
    std::string out = "experiment";  // output path stem

    double n_factor = 1.0;           // longedge-scaling: n = n_factor * m
    std::int64_t ladder_K = 4;       // psi-curve
    std::string event = "stage0-bad";        // mixing-decay
    Vec displacement;                // mixing-decay: x (defaults to (4,0,..))
    double inner_L = 2.0;            // D-event
    double eta = -1.0;               // D-event; < 0 picks 0.05/sqrt(d)
    std::size_t samples = 16;        // profile samples per replicate/radius
    bool resume = false;

    void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Summary row of one scale (fields unused by a kind stay zero).
struct ScaleSummary {
    double scale = 0.0;
    std::uint64_t replicates = 0;
    std::uint64_t successes = 0;
    double estimate = 0.0;
    Interval ci;
    Quartiles ratio;       // distance-profile
    std::size_t count = 0; // distance-profile sample count
    double covariance = 0.0, stderr_ = 0.0;  // mixing
    double value = 0.0;    // bracket integral
};

struct ExperimentResult {
    std::string rows_path;
    std::string summary_path;
    std::vector<ScaleSummary> scales;
    std::optional<ExponentFit> fit;
    double prediction = std::numeric_limits<double>::quiet_NaN();
    // degree-check
    double mean_degree = 0.0, mean_stderr = 0.0, expected = 0.0;
};

// Executes the experiment, streaming per-replicate rows to `<out>.rows.csv`
// and scale summaries (with fit columns where a fit applies) to
// `<out>.summary.csv`. With config.resume, rows already on disk are kept
// and only missing replicates are computed; aggregates equal an
// uninterrupted run's.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Worker cap: CHEMDIST_THREADS, else hardware concurrency.
unsigned worker_count();

// Theoretical long-edge scaling exponent d*zeta of the model's kernel, when
// defined and negative; NaN otherwise.
double dzeta_prediction(const ModelSpec& model);

}  // namespace chemdist

#endif
