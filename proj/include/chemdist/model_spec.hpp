#ifndef CHEMDIST_MODEL_SPEC_HPP
#define CHEMDIST_MODEL_SPEC_HPP

#include <cstdint>
#include <string>

#include "chemdist/models.hpp"

namespace chemdist {

enum class ModelKind { Gilbert, Boolean, SoftBoolean, Wdrcm, Lrp, Interference, Ellipses };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

// One model of the catalogue plus everything needed to realise it in a
// finite window. `pad < 0` requests the automatic pad (expected number of
// edges missed past the padded window below 1e-2 per replicate).
struct ModelSpec {
    ModelKind kind = ModelKind::Gilbert;
    int dim = 2;
    double intensity = 1.0;  // Poisson vertices
    double retention = 1.0;  // lattice vertices
    bool lattice = false;    // forced for LRP

    double gamma = 0.0;
    double gamma_prime = 0.0;
    double delta = std::numeric_limits<double>::infinity();
    double amplitude = 1.0;
    double beta = 0.5;  // interference

    double window_side = 64.0;
    double pad = -1.0;
    std::uint64_t seed = 1;

    void validate() const;

    bool uses_lattice() const { return lattice || kind == ModelKind::Lrp; }
    bool needs_orientations() const { return kind == ModelKind::Ellipses; }

    // Edges depend on their endpoints only (every model except interference).
    bool pair_independent() const { return kind != ModelKind::Interference; }

    // WDRCM-family connection kernel; UsageError for lrp/ellipses.
    ConnectionKernel kernel() const;

    InterferenceParams interference_params() const;
    EllipseParams ellipse_params() const;

    double resolved_pad() const;
    Window make_window(double side_override = -1.0, double pad_override = -1.0) const;
};

// Smallest pad keeping the expected number of edges from the measurement
// window into the truncated exterior below `budget`.
double auto_pad(const ModelSpec& spec, double budget = 1e-2);

MarkedPointCloud sample_vertices(const ModelSpec& spec, const Window& window,
                                 std::uint64_t replicate_seed);

SpatialGraph build_graph(const ModelSpec& spec, const Window& window,
                         std::uint64_t replicate_seed);

inline SpatialGraph build_graph(const ModelSpec& spec, std::uint64_t replicate_seed) {
    return build_graph(spec, spec.make_window(), replicate_seed);
}

// Replicate seeds: splitmix-style mix of (master seed, replicate index).
std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace chemdist

#endif
