#ifndef CHEMDIST_MIXING_HPP
#define CHEMDIST_MIXING_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chemdist/model_spec.hpp"
#include "chemdist/stats.hpp"

namespace chemdist {

// Event decidable from the vertices and edges internal to one box. The
// evaluator receives the graph restricted to the box plus the box geometry.
struct LocalEvent {
    std::string name;
    std::function<bool(const SpatialGraph&, const Box&)> evaluate;
};

// Built-in registry.
LocalEvent stage0_bad_event();                    // internal edge longer than side/100
LocalEvent has_long_edge_event(double n);         // internal edge longer than n
LocalEvent component_size_event(std::size_t k);   // a component of >= k vertices in the box
LocalEvent local_event_from_name(const std::string& name);

// Vertices inside the box and edges with both endpoints inside; vertex keys
// are preserved, indices are compacted.
SpatialGraph restrict_to_box(const SpatialGraph& graph, const Box& box);

struct MixingEstimate {
    std::string event;
    double m = 0.0;
    double x_norm = 0.0;
    std::uint64_t replicates = 0;
    double covariance = 0.0;
    double stderr_ = 0.0;
    double p_joint = 0.0, p_a = 0.0, p_b = 0.0;
};

// Sample covariance of the event indicators over the boxes Lambda_m(o) and
// Lambda_m(m x), |x| > 2, over independent realisations of the model on the
// joint window. The first replicates run a locality probe: evaluating on
// the full graph and on the box restriction must agree (ContractError
// otherwise).
MixingEstimate estimate_mixing(const ModelSpec& model, const LocalEvent& event, double m,
                               const Vec& x, std::uint64_t replicates, std::uint64_t seed);

// One prepared m-scale of a mixing estimation; lets drivers stream the two
// indicators replicate by replicate.
class MixingSession {
  public:
    MixingSession(const ModelSpec& model, LocalEvent event, double m, const Vec& x);

    struct Outcome {
        bool a = false, b = false;
        bool skipped = false;  // boundary failure in this replicate
    };
    // `probe` additionally checks the evaluator's locality on the full
    // graph; values are identical either way.
    Outcome evaluate(std::uint64_t replicate_seed_value, bool probe = false) const;

    double x_norm() const { return x_norm_; }
    const std::string& event_name() const { return event_.name; }
    const Window& window() const { return window_; }

  private:
    ModelSpec model_;
    LocalEvent event_;
    double m_;
    double x_norm_ = 0.0;
    Window window_;
    Box box_a_, box_b_;
};

struct MixingFit {
    bool reliable = false;
    std::size_t significant_scales = 0;
    ExponentFit fit;  // valid when reliable
};

// OLS of log |covariance| against log m over the scales where the estimate
// clears 3 standard errors; flagged unreliable below 3 such scales.
MixingFit fit_mixing_exponent(const std::vector<MixingEstimate>& estimates);

}  // namespace chemdist

#endif
