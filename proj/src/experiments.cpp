#include "chemdist/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "chemdist/csv.hpp"
#include "chemdist/renorm.hpp"

namespace chemdist {

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "longedge-scaling") return ExperimentKind::LongedgeScaling;
    if (name == "psi-curve") return ExperimentKind::PsiCurve;
    if (name == "distance-profile") return ExperimentKind::DistanceProfile;
    if (name == "D-event-decay") return ExperimentKind::DEventDecay;
    if (name == "mixing-decay") return ExperimentKind::MixingDecay;
    if (name == "bracket-oracle") return ExperimentKind::BracketOracle;
    if (name == "degree-check") return ExperimentKind::DegreeCheck;
    throw ConfigError("unknown experiment kind: " + name);
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::LongedgeScaling: return "longedge-scaling";
        case ExperimentKind::PsiCurve: return "psi-curve";
        case ExperimentKind::DistanceProfile: return "distance-profile";
        case ExperimentKind::DEventDecay: return "D-event-decay";
        case ExperimentKind::MixingDecay: return "mixing-decay";
        case ExperimentKind::BracketOracle: return "bracket-oracle";
        case ExperimentKind::DegreeCheck: return "degree-check";
    }
    return "?";
}

unsigned worker_count() {
    if (const char* env = std::getenv("CHEMDIST_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v <= 256) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

double dzeta_prediction(const ModelSpec& model) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ZetaResult z;
    switch (model.kind) {
        case ModelKind::Lrp: z = zeta(model.delta, 0.0, 0.0); break;
        case ModelKind::Interference:
        case ModelKind::Ellipses: return nan;
        default: {
            const ConnectionKernel k = model.kernel();
            z = zeta(k.delta, k.gamma, k.gamma_prime);
            break;
        }
    }
    if (!z.defined || !std::isfinite(z.value) || z.value >= 0.0) return nan;
    return model.dim * z.value;
}

void ExperimentConfig::validate() const {
    if (kind == ExperimentKind::DegreeCheck || kind == ExperimentKind::BracketOracle) {
        switch (model.kind) {
            case ModelKind::Lrp:
            case ModelKind::Interference:
            case ModelKind::Ellipses:
                throw ConfigError("config: this experiment needs a WDRCM-family model");
            default: break;
        }
    }
    model.validate();
    if (kind != ExperimentKind::DegreeCheck && grid.empty())
        throw ConfigError("config: grid must not be empty");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) throw ConfigError("config: grid must be increasing");

    switch (kind) {
        case ExperimentKind::LongedgeScaling:
        case ExperimentKind::PsiCurve:
        case ExperimentKind::DEventDecay:
        case ExperimentKind::MixingDecay:
            if (replicates < 100)
                throw ConfigError("config: probability estimates need replicates >= 100");
            break;
        case ExperimentKind::DistanceProfile:
            if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
            break;
        case ExperimentKind::DegreeCheck:
            if (replicates < 2) throw ConfigError("config: degree-check needs replicates >= 2");
            break;
        case ExperimentKind::BracketOracle:
            break;
    }

    if (kind == ExperimentKind::LongedgeScaling && !(n_factor > 0.0))
        throw ConfigError("config: n-factor must be positive");
    if (kind == ExperimentKind::PsiCurve) {
        if (ladder_K <= 0 || ladder_K % 2 != 0) throw ConfigError("config: K must be even");
        for (double s : grid)
            if (s < 0.0 || s != std::floor(s)) throw ConfigError("config: stages must be integers");
    }
    if (kind == ExperimentKind::DEventDecay) {
        if (model.window_side < 4.0 * grid.back())
            throw ConfigError("config: D-event window must be at least 4 * max m");
        if (!(inner_L > 0.0) || inner_L >= grid.front())
            throw ConfigError("config: need 0 < L < min m");
    }
    if (kind == ExperimentKind::DistanceProfile) {
        if (model.window_side * std::sqrt(static_cast<double>(model.dim)) < 1.1 * grid.back())
            throw ConfigError("config: window too small for the largest radius");
        if (samples == 0) throw ConfigError("config: samples must be positive");
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_num(const std::string& v, const std::string& key) {
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for key '" + key + "': " + v);
    }
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (!cell.empty()) out.push_back(parse_num(cell, key));
    }
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean for key '" + key + "': " + v);
}

void apply_model_key(ModelSpec& m, const std::string& key, const std::string& value) {
    if (key == "model") m.kind = model_kind_from_string(value);
    else if (key == "dim") m.dim = static_cast<int>(parse_num(value, key));
    else if (key == "intensity") m.intensity = parse_num(value, key);
    else if (key == "retention") m.retention = parse_num(value, key);
    else if (key == "lattice") m.lattice = parse_bool(value, key);
    else if (key == "gamma") m.gamma = parse_num(value, key);
    else if (key == "gamma-prime") m.gamma_prime = parse_num(value, key);
    else if (key == "delta") m.delta = parse_num(value, key);
    else if (key == "amplitude") m.amplitude = parse_num(value, key);
    else if (key == "beta") m.beta = parse_num(value, key);
    else if (key == "window") m.window_side = parse_num(value, key);
    else if (key == "pad") m.pad = value == "auto" ? -1.0 : parse_num(value, key);
    else throw ConfigError("config: unknown model key '" + key + "'");
}

void apply_main_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "experiment") c.kind = experiment_kind_from_string(value);
    else if (key == "grid") c.grid = parse_list(value, key);
    else if (key == "replicates") c.replicates = static_cast<std::uint64_t>(parse_num(value, key));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_num(value, key));
    else if (key == "out") c.out = value;
    else if (key == "n-factor") c.n_factor = parse_num(value, key);
    else if (key == "K") c.ladder_K = static_cast<std::int64_t>(parse_num(value, key));
    else if (key == "event") c.event = value;
    else if (key == "displacement") c.displacement = parse_list(value, key);
    else if (key == "L") c.inner_L = parse_num(value, key);
    else if (key == "eta") c.eta = parse_num(value, key);
    else if (key == "samples") c.samples = static_cast<std::size_t>(parse_num(value, key));
    else if (key == "resume") c.resume = parse_bool(value, key);
    else throw ConfigError("config: unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::stringstream ss(text);
    std::string line;
    bool in_model = false;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line == "[model]") {
            in_model = true;
            continue;
        }
        if (line.front() == '[')
            throw ConfigError("config: unknown section " + line);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (in_model) apply_model_key(config.model, key, value);
        else apply_main_key(config, key, value);
    }
    config.model.seed = config.seed;
    if (config.displacement.empty()) {
        config.displacement.assign(static_cast<std::size_t>(config.model.dim), 0.0);
        config.displacement[0] = 4.0;
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

namespace {

// Runs units [done, total) and hands results to `sink` in index order.
// Workers beyond 1 compute blocks in parallel; the sink stays sequential.
template <typename R, typename Work, typename Sink>
void ordered_units(std::uint64_t done, std::uint64_t total, Work&& work, Sink&& sink) {
    const unsigned workers = worker_count();
    const std::uint64_t block = std::max<std::uint64_t>(64, static_cast<std::uint64_t>(workers) * 16);
    std::vector<R> buf;
    for (std::uint64_t b = done; b < total; b += block) {
        const std::uint64_t hi = std::min(total, b + block);
        buf.assign(static_cast<std::size_t>(hi - b), R{});
        if (workers <= 1) {
            for (std::uint64_t i = b; i < hi; ++i) buf[static_cast<std::size_t>(i - b)] = work(i);
        } else {
            std::atomic<std::uint64_t> next{b};
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (unsigned t = 0; t < workers; ++t) {
                pool.emplace_back([&] {
                    for (;;) {
                        const std::uint64_t i = next.fetch_add(1);
                        if (i >= hi) break;
                        buf[static_cast<std::size_t>(i - b)] = work(i);
                    }
                });
            }
            for (auto& th : pool) th.join();
        }
        for (std::uint64_t i = b; i < hi; ++i) sink(i, buf[static_cast<std::size_t>(i - b)]);
    }
}

std::uint64_t existing_rows(const ExperimentConfig& config, const std::string& path,
                            std::vector<std::vector<std::string>>& parsed) {
    if (!config.resume) return 0;
    parsed = csv::read_rows(path);
    return parsed.size();
}

std::string fit_cell(const std::optional<ExponentFit>& fit, int which) {
    if (!fit) return "";
    return csv::num(which == 0 ? fit->slope : fit->stderr_);
}

std::string pred_cell(double prediction) {
    return std::isnan(prediction) ? "" : csv::num(prediction);
}

ExperimentResult run_longedge(const ExperimentConfig& config) {
    const std::string rows_path = config.out + ".rows.csv";
    std::vector<std::vector<std::string>> old_rows;
    const std::uint64_t done = existing_rows(config, rows_path, old_rows);
    const std::uint64_t total = config.grid.size() * config.replicates;
    if (done > total) throw ConfigError("resume: rows file longer than the experiment");

    std::vector<std::uint64_t> successes(config.grid.size(), 0);
    for (std::uint64_t i = 0; i < done; ++i) {
        if (old_rows[i].size() != 4) throw ConfigError("resume: malformed rows file");
        if (old_rows[i][3] == "1") ++successes[i / config.replicates];
    }

    csv::File rows(rows_path, "m,n,replicate,detected", config.resume);
    ordered_units<std::uint8_t>(
        done, total,
        [&](std::uint64_t u) -> std::uint8_t {
            const std::size_t s = static_cast<std::size_t>(u / config.replicates);
            const double m = config.grid[s];
            return replicate_detects_long_edge(config.model, m, config.n_factor * m,
                                               replicate_seed(config.seed, u))
                       ? 1
                       : 0;
        },
        [&](std::uint64_t u, const std::uint8_t& detected) {
            const std::size_t s = static_cast<std::size_t>(u / config.replicates);
            const double m = config.grid[s];
            if (detected) ++successes[s];
            rows.row({csv::num(m), csv::num(config.n_factor * m), csv::num(u),
                      detected ? "1" : "0"});
            if (u % 4096 == 0) rows.flush();
        });
    rows.flush();

    ExperimentResult result;
    result.rows_path = rows_path;
    result.prediction = dzeta_prediction(config.model);

    std::vector<std::pair<double, double>> fit_points;
    for (std::size_t s = 0; s < config.grid.size(); ++s) {
        ScaleSummary sum;
        sum.scale = config.grid[s];
        sum.replicates = config.replicates;
        sum.successes = successes[s];
        sum.estimate = static_cast<double>(successes[s]) / static_cast<double>(config.replicates);
        if (successes[s] > 0) {
            sum.ci = wilson_interval(successes[s], config.replicates);
            fit_points.emplace_back(config.grid[s], sum.estimate);
        } else {
            // Zero-success cells stay out of the fit; report the one-sided bound.
            sum.ci = {0.0, clopper_pearson_upper_zero(config.replicates)};
        }
        result.scales.push_back(sum);
    }
    if (fit_points.size() >= 3) result.fit = fit_exponent(fit_points);

    csv::File summary(config.out + ".summary.csv",
                      "m,n,replicates,successes,estimate,ci_lo,ci_hi,seed,fit_slope,fit_stderr,"
                      "prediction",
                      false);
    for (const auto& s : result.scales) {
        summary.row({csv::num(s.scale), csv::num(config.n_factor * s.scale),
                     csv::num(s.replicates), csv::num(s.successes), csv::num(s.estimate),
                     csv::num(s.ci.lo), csv::num(s.ci.hi), csv::num(config.seed),
                     fit_cell(result.fit, 0), fit_cell(result.fit, 1),
                     pred_cell(result.prediction)});
    }
    result.summary_path = summary.path();
    return result;
}

struct DegreeUnit {
    std::uint64_t points = 0;
    double mean = 0.0;
};

ExperimentResult run_degree_check(const ExperimentConfig& config) {
    const ConnectionKernel kernel = config.model.kernel();
    const Window window = config.model.make_window();
    const Box measured = window.measurement_box();
    const double intensity =
        config.model.uses_lattice() ? config.model.retention : config.model.intensity;

    const std::string rows_path = config.out + ".rows.csv";
    std::vector<std::vector<std::string>> old_rows;
    const std::uint64_t done = existing_rows(config, rows_path, old_rows);
    if (done > config.replicates) throw ConfigError("resume: rows file longer than the experiment");

    // Pooled ratio (sum of degrees over sum of points): per-replicate mean
    // degrees would carry an O(1/(lambda |M|)) ratio bias from the in-box
    // pair count sharing the denominator.
    std::vector<std::pair<double, double>> per_rep;  // (degree sum, points)
    for (std::uint64_t i = 0; i < done; ++i) {
        if (old_rows[i].size() != 3) throw ConfigError("resume: malformed rows file");
        const double pts = std::stod(old_rows[i][1]);
        per_rep.emplace_back(std::stod(old_rows[i][2]) * pts, pts);
    }

    csv::File rows(rows_path, "replicate,points,mean_degree", config.resume);
    ordered_units<DegreeUnit>(
        done, config.replicates,
        [&](std::uint64_t r) {
            const MarkedPointCloud cloud =
                sample_vertices(config.model, window, replicate_seed(config.seed, r));
            std::vector<std::uint32_t> degree(cloud.size(), 0);
            for_each_wdrcm_edge(cloud, kernel, replicate_seed(config.seed, r),
                                [&](std::uint32_t a, std::uint32_t b) {
                                    ++degree[a];
                                    ++degree[b];
                                });
            DegreeUnit unit;
            double sum = 0.0;
            for (std::uint32_t v = 0; v < cloud.size(); ++v) {
                if (!measured.contains(cloud.location(v))) continue;
                ++unit.points;
                sum += degree[v];
            }
            unit.mean = unit.points == 0 ? 0.0 : sum / static_cast<double>(unit.points);
            return unit;
        },
        [&](std::uint64_t r, const DegreeUnit& unit) {
            const double pts = static_cast<double>(unit.points);
            per_rep.emplace_back(unit.mean * pts, pts);
            rows.row({csv::num(r), csv::num(unit.points), csv::num(unit.mean)});
        });
    rows.flush();

    double sum_deg = 0.0, sum_pts = 0.0;
    for (auto [s, n] : per_rep) {
        sum_deg += s;
        sum_pts += n;
    }
    if (sum_pts == 0.0) throw UsageError("degree-check: no measured points");
    const double theta = sum_deg / sum_pts;
    // Ratio-estimator standard error over independent replicates.
    double ss = 0.0;
    for (auto [s, n] : per_rep) ss += (s - theta * n) * (s - theta * n);
    const double k = static_cast<double>(per_rep.size());
    const double se = std::sqrt(ss * (k / std::max(1.0, k - 1.0))) / sum_pts;

    ExperimentResult result;
    result.rows_path = rows_path;
    result.mean_degree = theta;
    result.mean_stderr = se;
    result.expected = expected_degree(kernel, intensity, config.model.dim);

    csv::File summary(config.out + ".summary.csv",
                      "replicates,points,mean_degree,stderr,expected,z", false);
    const double z = se > 0.0 ? (theta - result.expected) / se : 0.0;
    summary.row({csv::num(config.replicates), csv::num(sum_pts), csv::num(theta), csv::num(se),
                 csv::num(result.expected), csv::num(z)});
    result.summary_path = summary.path();
    return result;
}

ExperimentResult run_bracket(const ExperimentConfig& config) {
    const ConnectionKernel kernel = config.model.kernel();
    const std::string rows_path = config.out + ".rows.csv";

    csv::File rows(rows_path, "r,value", false);
    ExperimentResult result;
    result.rows_path = rows_path;
    result.prediction = dzeta_prediction(config.model);

    std::vector<std::pair<double, double>> points;
    for (double r : config.grid) {
        const double value = bracket_integral(kernel, r, config.model.dim);
        rows.row({csv::num(r), csv::num(value)});
        points.emplace_back(r, value);
        ScaleSummary sum;
        sum.scale = r;
        sum.value = value;
        result.scales.push_back(sum);
    }
    if (points.size() >= 3) result.fit = fit_exponent(points);

    csv::File summary(config.out + ".summary.csv", "r,value,fit_slope,fit_stderr,prediction",
                      false);
    for (const auto& s : result.scales)
        summary.row({csv::num(s.scale), csv::num(s.value), fit_cell(result.fit, 0),
                     fit_cell(result.fit, 1), pred_cell(result.prediction)});
    result.summary_path = summary.path();
    return result;
}

struct ProfileUnit {
    std::vector<std::vector<double>> ratios;
};

ExperimentResult run_profile(const ExperimentConfig& config) {
    const std::string rows_path = config.out + ".rows.csv";
    std::vector<std::vector<std::string>> old_rows;
    const std::uint64_t done_rows = existing_rows(config, rows_path, old_rows);
    if (done_rows % config.grid.size() != 0 || done_rows / config.grid.size() > config.replicates)
        throw ConfigError("resume: rows file inconsistent with the grid");
    const std::uint64_t done = done_rows / config.grid.size();

    std::vector<std::vector<double>> pooled(config.grid.size());
    for (std::uint64_t i = 0; i < done_rows; ++i) {
        const auto& row = old_rows[i];
        if (row.size() != 4) throw ConfigError("resume: malformed rows file");
        const std::size_t k = i % config.grid.size();
        std::stringstream ss(row[3]);
        std::string cell;
        while (std::getline(ss, cell, ';'))
            if (!cell.empty()) pooled[k].push_back(std::stod(cell));
    }

    const Window window = config.model.make_window();
    csv::File rows(rows_path, "replicate,radius,count,ratios", config.resume);
    ordered_units<ProfileUnit>(
        done, config.replicates,
        [&](std::uint64_t r) {
            const std::uint64_t rs = replicate_seed(config.seed, r);
            const SpatialGraph graph = build_graph(config.model, window, rs);
            ProfileUnit unit;
            unit.ratios = distance_ratio_samples(graph, config.grid, config.samples, rs);
            return unit;
        },
        [&](std::uint64_t r, const ProfileUnit& unit) {
            for (std::size_t k = 0; k < config.grid.size(); ++k) {
                std::string joined;
                for (std::size_t i = 0; i < unit.ratios[k].size(); ++i) {
                    if (i) joined += ';';
                    joined += csv::num(unit.ratios[k][i]);
                }
                pooled[k].insert(pooled[k].end(), unit.ratios[k].begin(), unit.ratios[k].end());
                rows.row({csv::num(r), csv::num(config.grid[k]),
                          csv::num(static_cast<std::uint64_t>(unit.ratios[k].size())), joined});
            }
            rows.flush();
        });

    ExperimentResult result;
    result.rows_path = rows_path;
    csv::File summary(config.out + ".summary.csv", "radius,count,median_ratio,q25,q75", false);
    for (std::size_t k = 0; k < config.grid.size(); ++k) {
        ScaleSummary sum;
        sum.scale = config.grid[k];
        sum.count = pooled[k].size();
        if (!pooled[k].empty()) sum.ratio = quartiles(pooled[k]);
        result.scales.push_back(sum);
        summary.row({csv::num(sum.scale), csv::num(static_cast<std::uint64_t>(sum.count)),
                     csv::num(sum.ratio.median), csv::num(sum.ratio.q25),
                     csv::num(sum.ratio.q75)});
    }
    result.summary_path = summary.path();
    return result;
}

struct DEventUnit {
    std::vector<std::uint8_t> neg;
};

ExperimentResult run_d_event(const ExperimentConfig& config) {
    const double eta = config.eta > 0.0
                           ? config.eta
                           : 0.05 / std::sqrt(static_cast<double>(config.model.dim));
    const Window window = config.model.make_window();

    const std::string rows_path = config.out + ".rows.csv";
    std::vector<std::vector<std::string>> old_rows;
    const std::uint64_t done_rows = existing_rows(config, rows_path, old_rows);
    if (done_rows % config.grid.size() != 0 || done_rows / config.grid.size() > config.replicates)
        throw ConfigError("resume: rows file inconsistent with the grid");
    const std::uint64_t done = done_rows / config.grid.size();

    std::vector<std::uint64_t> neg_counts(config.grid.size(), 0);
    for (std::uint64_t i = 0; i < done_rows; ++i) {
        if (old_rows[i].size() != 3) throw ConfigError("resume: malformed rows file");
        if (old_rows[i][2] == "1") ++neg_counts[i % config.grid.size()];
    }

    csv::File rows(rows_path, "replicate,m,neg_D", config.resume);
    ordered_units<DEventUnit>(
        done, config.replicates,
        [&](std::uint64_t r) {
            const SpatialGraph graph =
                build_graph(config.model, window, replicate_seed(config.seed, r));
            DEventUnit unit;
            unit.neg.reserve(config.grid.size());
            for (double m : config.grid) {
                const DistanceEventSpec spec{config.inner_L, m, eta};
                unit.neg.push_back(check_D_event(graph, spec).holds ? 0 : 1);
            }
            return unit;
        },
        [&](std::uint64_t r, const DEventUnit& unit) {
            for (std::size_t k = 0; k < config.grid.size(); ++k) {
                if (unit.neg[k]) ++neg_counts[k];
                rows.row({csv::num(r), csv::num(config.grid[k]), unit.neg[k] ? "1" : "0"});
            }
            rows.flush();
        });

    ExperimentResult result;
    result.rows_path = rows_path;
    result.prediction = dzeta_prediction(config.model);

    std::vector<std::pair<double, double>> fit_points;
    for (std::size_t k = 0; k < config.grid.size(); ++k) {
        ScaleSummary sum;
        sum.scale = config.grid[k];
        sum.replicates = config.replicates;
        sum.successes = neg_counts[k];
        sum.estimate =
            static_cast<double>(neg_counts[k]) / static_cast<double>(config.replicates);
        if (neg_counts[k] > 0) {
            sum.ci = wilson_interval(neg_counts[k], config.replicates);
            fit_points.emplace_back(config.grid[k], sum.estimate);
        } else {
            sum.ci = {0.0, clopper_pearson_upper_zero(config.replicates)};
        }
        result.scales.push_back(sum);
    }
    if (fit_points.size() >= 3) result.fit = fit_exponent(fit_points);

    csv::File summary(config.out + ".summary.csv",
                      "m,replicates,neg_successes,estimate,ci_lo,ci_hi,seed,fit_slope,fit_stderr,"
                      "prediction",
                      false);
    for (const auto& s : result.scales)
        summary.row({csv::num(s.scale), csv::num(s.replicates), csv::num(s.successes),
                     csv::num(s.estimate), csv::num(s.ci.lo), csv::num(s.ci.hi),
                     csv::num(config.seed), fit_cell(result.fit, 0), fit_cell(result.fit, 1),
                     pred_cell(result.prediction)});
    result.summary_path = summary.path();
    return result;
}

ExperimentResult run_psi(const ExperimentConfig& config) {
    const int max_stage = static_cast<int>(config.grid.back());
    const ScaleLadder ladder(config.ladder_K, max_stage);

    const std::string rows_path = config.out + ".rows.csv";
    std::vector<std::vector<std::string>> old_rows;
    const std::uint64_t done = existing_rows(config, rows_path, old_rows);
    const std::uint64_t total = config.grid.size() * config.replicates;
    if (done > total) throw ConfigError("resume: rows file longer than the experiment");

    std::vector<std::uint64_t> bad(config.grid.size(), 0);
    for (std::uint64_t i = 0; i < done; ++i) {
        if (old_rows[i].size() != 4) throw ConfigError("resume: malformed rows file");
        if (old_rows[i][3] == "1") ++bad[i / config.replicates];
    }

    csv::File rows(rows_path, "K,stage,replicate,bad", config.resume);
    ordered_units<std::uint8_t>(
        done, total,
        [&](std::uint64_t u) -> std::uint8_t {
            const int stage = static_cast<int>(config.grid[u / config.replicates]);
            const double side = static_cast<double>(ladder.size(stage)) +
                                2.0 * ladder.required_margin(stage) + 2.0;
            const double pad = config.model.pair_independent() ? std::max(0.0, config.model.pad)
                                                               : config.model.resolved_pad();
            const Window window(config.model.dim, side, pad);
            const SpatialGraph graph =
                build_graph(config.model, window, replicate_seed(config.seed, u));
            return classify_box(graph, Vec(config.model.dim, 0.0), stage, ladder).good ? 0 : 1;
        },
        [&](std::uint64_t u, const std::uint8_t& is_bad) {
            const std::size_t s = static_cast<std::size_t>(u / config.replicates);
            if (is_bad) ++bad[s];
            rows.row({csv::num(config.ladder_K), csv::num(static_cast<int>(config.grid[s])),
                      csv::num(u), is_bad ? "1" : "0"});
            if (u % 256 == 0) rows.flush();
        });
    rows.flush();

    ExperimentResult result;
    result.rows_path = rows_path;
    csv::File summary(config.out + ".summary.csv",
                      "K,stage,replicates,bad_count,estimate,ci_lo,ci_hi", false);
    for (std::size_t s = 0; s < config.grid.size(); ++s) {
        ScaleSummary sum;
        sum.scale = config.grid[s];
        sum.replicates = config.replicates;
        sum.successes = bad[s];
        sum.estimate = static_cast<double>(bad[s]) / static_cast<double>(config.replicates);
        sum.ci = bad[s] > 0 ? wilson_interval(bad[s], config.replicates)
                            : Interval{0.0, clopper_pearson_upper_zero(config.replicates)};
        result.scales.push_back(sum);
        summary.row({csv::num(config.ladder_K), csv::num(static_cast<int>(sum.scale)),
                     csv::num(sum.replicates), csv::num(sum.successes), csv::num(sum.estimate),
                     csv::num(sum.ci.lo), csv::num(sum.ci.hi)});
    }
    result.summary_path = summary.path();
    return result;
}

struct MixUnit {
    std::uint8_t a = 0, b = 0, skipped = 0;
};

ExperimentResult run_mixing(const ExperimentConfig& config) {
    const LocalEvent event = local_event_from_name(config.event);
    std::vector<MixingSession> sessions;
    sessions.reserve(config.grid.size());
    for (double m : config.grid)
        sessions.emplace_back(config.model, event, m, config.displacement);

    const std::string rows_path = config.out + ".rows.csv";
    std::vector<std::vector<std::string>> old_rows;
    const std::uint64_t done = existing_rows(config, rows_path, old_rows);
    const std::uint64_t total = config.grid.size() * config.replicates;
    if (done > total) throw ConfigError("resume: rows file longer than the experiment");

    struct Tally {
        std::uint64_t n11 = 0, n10 = 0, n01 = 0, used = 0;
    };
    std::vector<Tally> tally(config.grid.size());
    auto account = [&](std::size_t s, bool a, bool b, bool skipped) {
        if (skipped) return;
        auto& t = tally[s];
        ++t.used;
        if (a && b) ++t.n11;
        else if (a) ++t.n10;
        else if (b) ++t.n01;
    };
    for (std::uint64_t i = 0; i < done; ++i) {
        if (old_rows[i].size() != 5) throw ConfigError("resume: malformed rows file");
        account(i / config.replicates, old_rows[i][2] == "1", old_rows[i][3] == "1",
                old_rows[i][4] == "1");
    }

    csv::File rows(rows_path, "m,replicate,a,b,skipped", config.resume);
    ordered_units<MixUnit>(
        done, total,
        [&](std::uint64_t u) {
            const std::size_t s = static_cast<std::size_t>(u / config.replicates);
            const bool probe = u % config.replicates < 2;
            const auto outcome = sessions[s].evaluate(replicate_seed(config.seed, u), probe);
            return MixUnit{static_cast<std::uint8_t>(outcome.a),
                           static_cast<std::uint8_t>(outcome.b),
                           static_cast<std::uint8_t>(outcome.skipped)};
        },
        [&](std::uint64_t u, const MixUnit& unit) {
            const std::size_t s = static_cast<std::size_t>(u / config.replicates);
            account(s, unit.a, unit.b, unit.skipped);
            rows.row({csv::num(config.grid[s]), csv::num(u), unit.a ? "1" : "0",
                      unit.b ? "1" : "0", unit.skipped ? "1" : "0"});
            if (u % 1024 == 0) rows.flush();
        });
    rows.flush();

    ExperimentResult result;
    result.rows_path = rows_path;
    std::vector<MixingEstimate> estimates;
    for (std::size_t s = 0; s < config.grid.size(); ++s) {
        const auto& t = tally[s];
        if (t.used < 2) throw UsageError("mixing-decay: fewer than 2 usable replicates");
        const double n = static_cast<double>(t.used);
        const double pa = static_cast<double>(t.n11 + t.n10) / n;
        const double pb = static_cast<double>(t.n11 + t.n01) / n;
        const double pab = static_cast<double>(t.n11) / n;
        const double cov = pab - pa * pb;
        auto sq = [](double v) { return v * v; };
        const double p00 = 1.0 - pa - pb + pab;
        const double m22 = pab * sq((1.0 - pa) * (1.0 - pb)) + (pa - pab) * sq((1.0 - pa) * pb) +
                           (pb - pab) * sq(pa * (1.0 - pb)) + p00 * sq(pa * pb);

        MixingEstimate est;
        est.event = event.name;
        est.m = config.grid[s];
        est.x_norm = sessions[s].x_norm();
        est.replicates = t.used;
        est.covariance = cov;
        est.stderr_ = std::sqrt(std::max(0.0, m22 - cov * cov) / n);
        est.p_joint = pab;
        est.p_a = pa;
        est.p_b = pb;
        estimates.push_back(est);

        ScaleSummary sum;
        sum.scale = est.m;
        sum.replicates = t.used;
        sum.covariance = est.covariance;
        sum.stderr_ = est.stderr_;
        result.scales.push_back(sum);
    }
    const MixingFit mf = fit_mixing_exponent(estimates);
    if (mf.reliable) result.fit = mf.fit;

    csv::File summary(config.out + ".summary.csv",
                      "event,m,x_norm,replicates,covariance,stderr,fit_slope,fit_stderr", false);
    for (std::size_t s = 0; s < estimates.size(); ++s) {
        const auto& e = estimates[s];
        summary.row({e.event, csv::num(e.m), csv::num(e.x_norm), csv::num(e.replicates),
                     csv::num(e.covariance), csv::num(e.stderr_), fit_cell(result.fit, 0),
                     fit_cell(result.fit, 1)});
    }
    result.summary_path = summary.path();
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    switch (config.kind) {
        case ExperimentKind::LongedgeScaling: return run_longedge(config);
        case ExperimentKind::DegreeCheck: return run_degree_check(config);
        case ExperimentKind::BracketOracle: return run_bracket(config);
        case ExperimentKind::DistanceProfile: return run_profile(config);
        case ExperimentKind::DEventDecay: return run_d_event(config);
        case ExperimentKind::PsiCurve: return run_psi(config);
        case ExperimentKind::MixingDecay: return run_mixing(config);
    }
    throw ConfigError("unhandled experiment kind");
}

}  // namespace chemdist
