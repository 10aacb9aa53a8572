// Command-line front end: graph generation, distance queries, long-edge and
// renormalisation estimates, mixing estimates, and the experiment runner.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "chemdist/experiments.hpp"
#include "chemdist/renorm.hpp"

namespace {

using namespace chemdist;

struct ModelFlags {
    std::string model = "gilbert";
    std::string pad = "auto";
    ModelSpec spec;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model,
                        "gilbert|boolean|soft-boolean|wdrcm|lrp|interference|ellipses");
        cmd->add_option("--dim", spec.dim, "spatial dimension");
        cmd->add_option("--intensity", spec.intensity, "Poisson intensity");
        cmd->add_option("--retention", spec.retention, "lattice retention probability");
        cmd->add_flag("--lattice", spec.lattice, "use a site-percolated lattice vertex set");
        cmd->add_option("--gamma", spec.gamma, "kernel gamma");
        cmd->add_option("--gamma-prime", spec.gamma_prime, "kernel gamma'");
        cmd->add_option("--delta", spec.delta, "kernel delta (inf for indicator)");
        cmd->add_option("--amplitude", spec.amplitude, "kernel amplitude");
        cmd->add_option("--beta", spec.beta, "interference exponent");
        cmd->add_option("--window", spec.window_side, "measurement window side");
        cmd->add_option("--pad", pad, "generation pad (number or 'auto')");
        cmd->add_option("--seed", spec.seed, "master seed");
    }

    ModelSpec resolve() {
        spec.kind = model_kind_from_string(model);
        spec.pad = pad == "auto" ? -1.0 : std::stod(pad);
        spec.validate();
        return spec;
    }
};

int cmd_generate(ModelFlags& flags, const std::string& out) {
    const ModelSpec spec = flags.resolve();
    const SpatialGraph graph = build_graph(spec, replicate_seed(spec.seed, 0));
    std::filesystem::create_directories(out);
    {
        std::ofstream v(out + "/vertices.csv");
        write_vertex_csv(v, graph.cloud);
    }
    {
        std::ofstream e(out + "/edges.csv");
        write_edge_csv(e, graph);
    }
    std::cout << "points=" << graph.size() << " edges=" << graph.edge_count << " -> " << out
              << "/{vertices,edges}.csv\n";
    return 0;
}

int cmd_distance(ModelFlags& flags, std::int64_t source, std::int64_t target,
                 const std::vector<double>& radii, std::size_t samples, const std::string& out) {
    const ModelSpec spec = flags.resolve();
    const SpatialGraph graph = build_graph(spec, replicate_seed(spec.seed, 0));
    if (source >= 0 && target >= 0) {
        const Hops d = chemical_distance(graph, static_cast<std::uint32_t>(source),
                                         static_cast<std::uint32_t>(target));
        if (d == kUnreachable) std::cout << "d(" << source << "," << target << ") = inf\n";
        else std::cout << "d(" << source << "," << target << ") = " << d << "\n";
        return 0;
    }
    if (radii.empty()) throw UsageError("distance: give --source/--target or --radii");
    const auto rows = distance_ratio_profile(graph, radii, samples, spec.seed);
    std::ofstream f(out);
    f << "radius,count,median_ratio,q25,q75\n";
    for (const auto& row : rows) {
        f << row.radius << "," << row.count << "," << row.ratio.median << "," << row.ratio.q25
          << "," << row.ratio.q75 << "\n";
        std::cout << "r=" << row.radius << " count=" << row.count
                  << " median=" << row.ratio.median << "\n";
    }
    return 0;
}

int cmd_longedges(ModelFlags& flags, double m, double n, std::uint64_t reps,
                  const std::string& out) {
    const ModelSpec spec = flags.resolve();
    const PLEstimate est = estimate_P_L(spec, m, n, reps, spec.seed);
    std::cout << "P(L(" << m << "," << n << ")) = " << est.estimate << "  [" << est.ci.lo << ", "
              << est.ci.hi << "]  successes=" << est.successes << "/" << est.replicates << "\n";
    if (!out.empty()) {
        std::ofstream f(out);
        f << "m,n,replicates,successes,estimate,ci_lo,ci_hi,seed\n";
        f << est.m << "," << est.n << "," << est.replicates << "," << est.successes << ","
          << est.estimate << "," << est.ci.lo << "," << est.ci.hi << "," << est.seed << "\n";
    }
    return 0;
}

int cmd_renorm(ModelFlags& flags, std::int64_t K, int stage, std::uint64_t reps,
               const std::string& out, bool classify) {
    const ModelSpec spec = flags.resolve();
    const ScaleLadder ladder(K, stage);
    if (classify) {
        // One realisation, verdicts for the origin box at every stage.
        const double side =
            static_cast<double>(ladder.size(stage)) + 2.0 * ladder.required_margin(stage) + 2.0;
        const Window window(spec.dim, std::max(side, spec.window_side), spec.resolved_pad());
        const SpatialGraph graph = build_graph(spec, window, replicate_seed(spec.seed, 0));
        std::vector<BoxVerdict> verdicts;
        for (int n = 0; n <= stage; ++n)
            verdicts.push_back(classify_box(graph, Vec(spec.dim, 0.0), n, ladder));
        write_verdict_csv(std::cout, verdicts);
        if (!out.empty()) {
            std::ofstream f(out);
            write_verdict_csv(f, verdicts);
        }
        return 0;
    }
    const PsiEstimate est = estimate_psi(spec, ladder, stage, reps, spec.seed);
    std::cout << "psi_K(" << stage << ") = " << est.estimate << "  [" << est.ci.lo << ", "
              << est.ci.hi << "]  bad=" << est.bad_count << "/" << est.replicates
              << "  K=" << K << "\n";
    if (!out.empty()) {
        std::ofstream f(out);
        f << "K,stage,replicates,bad_count,estimate,ci_lo,ci_hi\n";
        f << est.K << "," << est.stage << "," << est.replicates << "," << est.bad_count << ","
          << est.estimate << "," << est.ci.lo << "," << est.ci.hi << "\n";
    }
    return 0;
}

int cmd_mixing(ModelFlags& flags, const std::string& event_name, double m,
               std::vector<double> x, std::uint64_t reps, const std::string& out) {
    const ModelSpec spec = flags.resolve();
    if (x.empty()) {
        x.assign(static_cast<std::size_t>(spec.dim), 0.0);
        x[0] = 4.0;
    }
    const LocalEvent event = local_event_from_name(event_name);
    const MixingEstimate est = estimate_mixing(spec, event, m, x, reps, spec.seed);
    std::cout << "cov[" << event.name << ", m=" << m << ", |x|=" << est.x_norm
              << "] = " << est.covariance << " +- " << est.stderr_ << "  (P(A)=" << est.p_a
              << ", P(B)=" << est.p_b << ")\n";
    if (!out.empty()) {
        std::ofstream f(out);
        f << "event,m,x_norm,replicates,covariance,stderr\n";
        f << est.event << "," << est.m << "," << est.x_norm << "," << est.replicates << ","
          << est.covariance << "," << est.stderr_ << "\n";
    }
    return 0;
}

int cmd_experiment(const std::string& config_path, bool resume) {
    ExperimentConfig config = load_config(config_path);
    if (resume) config.resume = true;
    const ExperimentResult result = run_experiment(config);
    std::cout << "rows:    " << result.rows_path << "\nsummary: " << result.summary_path << "\n";
    if (result.fit) {
        std::cout << "fit: slope=" << result.fit->slope << " stderr=" << result.fit->stderr_
                  << " r2=" << result.fit->r2;
        if (!std::isnan(result.prediction)) std::cout << "  prediction=" << result.prediction;
        std::cout << "\n";
    }
    if (config.kind == ExperimentKind::DegreeCheck) {
        std::cout << "mean degree " << result.mean_degree << " +- " << result.mean_stderr
                  << "  expected " << result.expected << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatial random graph laboratory"};
    app.require_subcommand(1);

    ModelFlags gen_flags, dist_flags, long_flags, renorm_flags, mix_flags;

    auto* gen = app.add_subcommand("generate", "sample a cloud and its edge set");
    gen_flags.attach(gen);
    std::string gen_out = "graph";
    gen->add_option("--out", gen_out, "output directory");

    auto* dist = app.add_subcommand("distance", "chemical distances and ratio profiles");
    dist_flags.attach(dist);
    std::int64_t src = -1, dst = -1;
    std::vector<double> radii;
    std::size_t samples = 16;
    std::string dist_out = "profile.csv";
    dist->add_option("--source", src, "source vertex id");
    dist->add_option("--target", dst, "target vertex id");
    dist->add_option("--radii", radii, "profile radii")->delimiter(',');
    dist->add_option("--samples", samples, "pairs per radius");
    dist->add_option("--out", dist_out, "profile CSV path");

    auto* lng = app.add_subcommand("longedges", "estimate P(L(m,n))");
    long_flags.attach(lng);
    double le_m = 16.0, le_n = -1.0;
    std::uint64_t le_reps = 1000;
    std::string le_out;
    lng->add_option("--m", le_m, "box side");
    lng->add_option("--n", le_n, "length threshold (default m)");
    lng->add_option("--reps", le_reps, "replicates");
    lng->add_option("--out", le_out, "results CSV path");

    auto* ren = app.add_subcommand("renorm", "estimate psi_K(stage)");
    renorm_flags.attach(ren);
    std::int64_t K = 4;
    int stage = 0;
    std::uint64_t psi_reps = 200;
    std::string ren_out;
    ren->add_option("--K", K, "base scale (even)");
    ren->add_option("--stage", stage, "ladder stage");
    ren->add_option("--reps", psi_reps, "replicates");
    ren->add_option("--out", ren_out, "psi CSV path");
    bool ren_classify = false;
    ren->add_flag("--classify", ren_classify, "classify one realisation, emit verdict CSV");

    auto* mix = app.add_subcommand("mixing", "covariance of a local event in two distant boxes");
    mix_flags.attach(mix);
    std::string event_name = "stage0-bad";
    double mix_m = 16.0;
    std::vector<double> displacement;
    std::uint64_t mix_reps = 1000;
    std::string mix_out;
    mix->add_option("--event", event_name, "stage0-bad | has-long-edge:<n> | component-of-size:<k>");
    mix->add_option("--m", mix_m, "box side");
    mix->add_option("--x", displacement, "displacement vector (|x| > 2)")->delimiter(',');
    mix->add_option("--reps", mix_reps, "replicates");
    mix->add_option("--out", mix_out, "mixing CSV path");

    auto* exp = app.add_subcommand("experiment", "run a configured experiment");
    std::string config_path;
    bool resume = false;
    exp->add_option("--config", config_path, "experiment config file")->required();
    exp->add_flag("--resume", resume, "continue from existing rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_flags, gen_out);
        if (dist->parsed())
            return cmd_distance(dist_flags, src, dst, radii, samples, dist_out);
        if (lng->parsed())
            return cmd_longedges(long_flags, le_m, le_n > 0.0 ? le_n : le_m, le_reps, le_out);
        if (ren->parsed()) return cmd_renorm(renorm_flags, K, stage, psi_reps, ren_out, ren_classify);
        if (mix->parsed())
            return cmd_mixing(mix_flags, event_name, mix_m, displacement, mix_reps, mix_out);
        if (exp->parsed()) return cmd_experiment(config_path, resume);
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
