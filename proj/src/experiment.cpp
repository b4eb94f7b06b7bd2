#include "doco/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "doco/format.hpp"
#include "doco/rng.hpp"

namespace doco {

using nlohmann::json;

std::string to_string(CurveMode mode) { return mode == CurveMode::prefix ? "prefix" : "independent"; }

CurveMode parse_curve_mode(const std::string& name) {
    if (name == "prefix") return CurveMode::prefix;
    if (name == "independent") return CurveMode::independent;
    throw std::invalid_argument("curve mode must be 'prefix' or 'independent', got: " + name);
}

namespace {

std::string to_string(DualUpdate rule) { return rule == DualUpdate::ascent ? "ascent" : "literal_descent"; }

DualUpdate parse_dual_update(const std::string& name) {
    if (name == "ascent") return DualUpdate::ascent;
    if (name == "literal_descent") return DualUpdate::literal_descent;
    throw std::invalid_argument("dual update must be 'ascent' or 'literal_descent', got: " + name);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!(lower < upper)) throw std::invalid_argument("lower must be strictly below upper");
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("edge_prob must lie in (0, 1]");
    if (n_agents < 1 || dim < 1) throw std::invalid_argument("n_agents and dim must be at least 1");
    if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("window must lie in (0, 1]");
    if (!(theta >= 0.0)) throw std::invalid_argument("theta must be nonnegative");
    if (radius) {
        const double expected = lower == -upper ? upper * std::sqrt(static_cast<double>(dim)) : set_radius();
        if (std::abs(*radius - expected) > 1e-12 * std::max(1.0, expected)) {
            throw std::invalid_argument("radius " + format_double(*radius) + " inconsistent with box (expected " +
                                        format_double(expected) + ")");
        }
    }
    for (auto t : horizons) {
        if (t < 1) throw std::invalid_argument("evaluation horizons must be at least 1");
        if (curve_mode == CurveMode::prefix && t > horizon) {
            throw std::invalid_argument("evaluation horizon " + std::to_string(t) + " exceeds horizon");
        }
    }
}

ExperimentConfig ExperimentConfig::with_default_horizon(std::size_t fallback) const {
    ExperimentConfig c = *this;
    if (c.horizon == 0) {
        c.horizon = (c.curve_mode == CurveMode::independent && !c.horizons.empty())
                        ? *std::max_element(c.horizons.begin(), c.horizons.end())
                        : fallback;
    }
    return c;
}

DistributedParams ExperimentConfig::distributed_params(std::size_t t_horizon, std::uint64_t agent_seed) const {
    DistributedParams p;
    p.mode = feedback;
    p.alpha = StepSchedule::inverse_sqrt(alpha_scale.value_or(set_radius()));
    p.gamma = StepSchedule::inverse_sqrt(gamma_scale);
    p.theta = theta;
    p.delta = delta_scale * std::pow(static_cast<double>(t_horizon), -delta_exponent);
    p.eta = StepSchedule::horizon_tuned(eta_scale, eta_exponent);
    p.constraint_mode = constraint_mode;
    p.update_base = bandit_update_base;
    p.seed = agent_seed;
    return p;
}

OgdOptions ExperimentConfig::ogd_options(std::size_t t_horizon, std::uint64_t agent_seed) const {
    OgdOptions o;
    o.mode = feedback;
    if (feedback == Feedback::full) {
        if (!(grad_bound > 0.0)) throw std::invalid_argument("config: grad_bound must be positive");
        // lag 1: x_{t+1} is produced with alpha_t, the same indexing as the distributed step.
        o.step = StepSchedule::inverse_sqrt(alpha_scale.value_or(set_radius()) / grad_bound, 1);
    } else {
        o.step = StepSchedule::horizon_tuned(eta_scale, eta_exponent);
    }
    o.delta = delta_scale * std::pow(static_cast<double>(t_horizon), -delta_exponent);
    o.update_base = bandit_update_base;
    // Same stream as agent 0 of a distributed run with this seed.
    o.seed = derive_seed(agent_seed, 0);
    return o;
}

void to_json(json& j, const ExperimentConfig& c) {
    json gens = json::array();
    for (const auto& g : c.generators) {
        json gj = {{"q", g.q}, {"r", g.r}, {"s", g.s}};
        if (std::isfinite(g.min)) gj["min"] = g.min;
        if (std::isfinite(g.max)) gj["max"] = g.max;
        gens.push_back(gj);
    }
    j = json{
        {"n_agents", c.n_agents},
        {"dim", c.dim},
        {"lower", c.lower},
        {"upper", c.upper},
        {"radius", c.set_radius()},
        {"horizon", c.horizon},
        {"runs", c.runs},
        {"feedback", to_string(c.feedback)},
        {"seed", c.seed},
        {"edge_prob", c.edge_prob},
        {"resample_graph", c.resample_graph},
        {"alpha_scale", c.alpha_scale.value_or(c.set_radius())},
        {"gamma_scale", c.gamma_scale},
        {"theta", c.theta},
        {"delta_scale", c.delta_scale},
        {"delta_exponent", c.delta_exponent},
        {"eta_scale", c.eta_scale},
        {"eta_exponent", c.eta_exponent},
        {"grad_bound", c.grad_bound},
        {"constraint_mode", to_string(c.constraint_mode)},
        {"bandit_update_base", to_string(c.bandit_update_base)},
        {"curve_mode", to_string(c.curve_mode)},
        {"horizons", c.horizons},
        {"window", c.window},
        {"generators", gens},
        {"demand", c.demand},
        {"admm_alpha", c.admm_alpha},
        {"max_iters", c.max_iters},
        {"tol", c.tol},
        {"dual_update", to_string(c.dual_update)},
        {"output_dir", c.output_dir},
        {"write_traces", c.write_traces},
        {"gnuplot", c.gnuplot},
    };
}

void from_json(const json& j_in, ExperimentConfig& c) {
    const json& j = j_in.contains("config") && j_in.at("config").is_object() ? j_in.at("config") : j_in;
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const std::set<std::string> known = {
        "n_agents",     "dim",        "lower",          "upper",        "radius",          "horizon",
        "runs",         "feedback",   "seed",           "edge_prob",    "resample_graph",  "alpha_scale",
        "gamma_scale",  "theta",      "delta_scale",    "delta_exponent", "eta_scale",     "eta_exponent",
        "grad_bound",   "constraint_mode", "bandit_update_base", "curve_mode", "horizons",  "window",
        "generators",   "demand",     "admm_alpha",     "max_iters",    "tol",             "dual_update",
        "output_dir",   "write_traces", "gnuplot"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("n_agents", c.n_agents);
    get("dim", c.dim);
    get("lower", c.lower);
    get("upper", c.upper);
    if (j.contains("radius")) c.radius = j.at("radius").get<double>();
    get("horizon", c.horizon);
    get("runs", c.runs);
    if (j.contains("feedback")) c.feedback = parse_feedback(j.at("feedback").get<std::string>());
    get("seed", c.seed);
    get("edge_prob", c.edge_prob);
    get("resample_graph", c.resample_graph);
    if (j.contains("alpha_scale")) c.alpha_scale = j.at("alpha_scale").get<double>();
    get("gamma_scale", c.gamma_scale);
    get("theta", c.theta);
    get("delta_scale", c.delta_scale);
    get("delta_exponent", c.delta_exponent);
    get("eta_scale", c.eta_scale);
    get("eta_exponent", c.eta_exponent);
    get("grad_bound", c.grad_bound);
    if (j.contains("constraint_mode")) c.constraint_mode = parse_constraint_mode(j.at("constraint_mode").get<std::string>());
    if (j.contains("bandit_update_base")) {
        c.bandit_update_base = parse_bandit_update_base(j.at("bandit_update_base").get<std::string>());
    }
    if (j.contains("curve_mode")) c.curve_mode = parse_curve_mode(j.at("curve_mode").get<std::string>());
    get("horizons", c.horizons);
    get("window", c.window);
    if (j.contains("generators")) {
        c.generators.clear();
        for (const auto& gj : j.at("generators")) {
            Generator g;
            g.q = gj.value("q", 1.0);
            g.r = gj.value("r", 0.0);
            g.s = gj.value("s", 0.0);
            if (gj.contains("min")) g.min = gj.at("min").get<double>();
            if (gj.contains("max")) g.max = gj.at("max").get<double>();
            c.generators.push_back(g);
        }
    }
    get("demand", c.demand);
    get("admm_alpha", c.admm_alpha);
    get("max_iters", c.max_iters);
    get("tol", c.tol);
    if (j.contains("dual_update")) c.dual_update = parse_dual_update(j.at("dual_update").get<std::string>());
    get("output_dir", c.output_dir);
    get("write_traces", c.write_traces);
    get("gnuplot", c.gnuplot);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    ExperimentConfig c;
    from_json(j, c);
    return c;
}

RunSeeds run_seeds(const ExperimentConfig& config, std::size_t run) {
    const auto run_seed = derive_seed(config.seed, run + 1);
    RunSeeds s;
    s.graph = config.resample_graph ? derive_seed(run_seed, 3) : derive_seed(config.seed, 0);
    s.losses = derive_seed(run_seed, 1);
    s.agents = derive_seed(run_seed, 2);
    return s;
}

std::vector<CurvePoint> average_curves(const std::vector<std::vector<CurvePoint>>& per_run) {
    if (per_run.empty()) return {};
    std::vector<CurvePoint> avg(per_run.front().size());
    for (std::size_t k = 0; k < avg.size(); ++k) {
        avg[k].horizon = per_run.front()[k].horizon;
        for (const auto& curve : per_run) {
            if (curve.size() != avg.size() || curve[k].horizon != avg[k].horizon) {
                throw std::invalid_argument("runs do not share an evaluation grid");
            }
            avg[k].sreg += curve[k].sreg;
            avg[k].cacv += curve[k].cacv;
            avg[k].asr += curve[k].asr;
            avg[k].acv += curve[k].acv;
        }
        const auto n = static_cast<double>(per_run.size());
        avg[k].sreg /= n;
        avg[k].cacv /= n;
        avg[k].asr /= n;
        avg[k].acv /= n;
    }
    return avg;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "T,sreg,cacv,asr,acv\n";
    for (const auto& p : curve) {
        out << p.horizon << ',' << format_double(p.sreg) << ',' << format_double(p.cacv) << ','
            << format_double(p.asr) << ',' << format_double(p.acv) << '\n';
    }
}

namespace {

std::string run_label(std::size_t run) {
    std::ostringstream s;
    s << "run_";
    if (run + 1 < 10) s << '0';
    s << (run + 1);
    return s.str();
}

/// Maps fn over [0, count) with at most hardware_concurrency tasks in flight.
/// Results come back in index order, so outputs do not depend on scheduling.
template <class Fn>
auto parallel_map(std::size_t count, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out;
    out.reserve(count);
    const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < count; start += width) {
        std::vector<std::future<R>> batch;
        for (std::size_t k = start; k < std::min(count, start + width); ++k) {
            batch.push_back(std::async(std::launch::async, fn, k));
        }
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

/// Aborts with the stage name prefixed to the diagnostic.
template <class Fn>
auto stage(const std::string& name, Fn fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(name + ": " + e.what());
    }
}

Vector static_comparator(const LossSequence& losses, const BoxSet& set) {
    auto res = offline_oracle(losses, set);
    if (!res.converged) throw std::runtime_error("offline oracle did not reach tolerance");
    return res.x;
}

std::vector<CurvePoint> curve_from_trace(const MetricsTrace& m, const std::vector<std::size_t>& rows) {
    std::vector<CurvePoint> out;
    auto emit = [&](std::size_t t) {
        out.push_back({t, m.sreg.at(t - 1), m.cacv.at(t - 1), m.asr.at(t - 1), m.acv.at(t - 1)});
    };
    if (rows.empty()) {
        for (std::size_t t = 1; t <= m.horizon; ++t) emit(t);
    } else {
        for (auto t : rows) emit(t);
    }
    return out;
}

class ArtifactWriter {
public:
    explicit ArtifactWriter(const std::string& dir) : dir_(dir) {
        if (!dir_.empty()) std::filesystem::create_directories(dir_);
    }

    bool enabled() const { return !dir_.empty(); }

    template <class WriteFn>
    void file(const std::string& name, WriteFn write) {
        if (!enabled()) return;
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        write(out);
        if (!out) throw std::runtime_error("write failed for " + path.string());
        files_.push_back(path);
    }

    void text(const std::string& name, const std::string& body) {
        file(name, [&](std::ostream& out) { out << body; });
    }

    RunArtifacts finish(json metadata) {
        RunArtifacts a;
        json names = json::array();
        for (const auto& f : files_) names.push_back(f.filename().string());
        names.push_back("metadata.json");
        metadata["files"] = names;
        text("metadata.json", metadata.dump(2) + "\n");
        a.files = files_;
        a.metadata = std::move(metadata);
        return a;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
};

json base_metadata(const std::string& command, const ExperimentConfig& c) {
    json seeds = json::array();
    for (std::size_t r = 0; r < c.runs; ++r) {
        const auto s = run_seeds(c, r);
        seeds.push_back({{"run", r + 1}, {"graph", s.graph}, {"losses", s.losses}, {"agents", s.agents}});
    }
    return json{
        {"command", command},
        {"config", c},
        {"generator", std::string(kGeneratorName)},
        {"seeds", seeds},
        {"algorithm",
         {{"primal", "x_i <- P(m_i - alpha_t (g_i + sum_s lambda_s grad c_s)), m_i = sum_j A_ij x_j"},
          {"dual", "lambda_i <- [(1 - theta gamma_t) lambda_i + gamma_t c(x_i)]_+"},
          {"projection", c.constraint_mode == ConstraintMode::long_term ? "ball of radius R_X" : "box X"},
          {"bandit_played_point", "x_i = m_i + delta r_in u_i, r_in = min(-L, U)"},
          {"bandit_estimate", "d l(x_i) u_i / (delta r_in)"},
          {"bandit_update_from", to_string(c.bandit_update_base)},
          {"weights", "maximum-degree"},
          {"comparator", "static full-horizon minimiser over X"},
          {"step_index", "decision for round t+1 uses alpha_t, gamma_t"}}},
    };
}

std::string gnuplot_curves(const std::string& csv) {
    return "set datafile separator ','\nset key autotitle columnhead\nset logscale x\nset xlabel 'T'\n"
           "plot '" + csv + "' using 1:4 with lines title 'ASR', '' using 1:5 with lines title 'ACV'\n";
}

/// Runs one seeded repetition and returns its curve plus named trace texts.
struct RepetitionOutput {
    std::vector<CurvePoint> curve;
    std::vector<std::pair<std::string, std::string>> traces;
};

using NetworkRunner = std::function<NetworkRun(const LossSequence&, std::size_t, const RunSeeds&)>;
using TraceWriter = std::function<std::string(const NetworkRun&)>;

RepetitionOutput repetition(const ExperimentConfig& cfg, std::size_t r, std::size_t n_agents,
                            const NetworkRunner& runner, const TraceWriter& trace_writer, bool keep_traces) {
    const auto set = cfg.box();
    const auto seeds = run_seeds(cfg, r);
    RepetitionOutput out;
    if (cfg.curve_mode == CurveMode::prefix) {
        const auto losses = stage("loss sampling", [&] {
            return sample_regression_sequence(n_agents, cfg.dim, cfg.horizon, seeds.losses);
        });
        const Vector x_star = stage("offline oracle", [&] { return static_comparator(losses, set); });
        const auto run = stage("distributed run", [&] { return runner(losses, cfg.horizon, seeds); });
        out.curve = curve_from_trace(compute_metrics(run, losses, set, x_star), cfg.horizons);
        if (keep_traces) out.traces.emplace_back(run_label(r) + "_trace.csv", trace_writer(run));
        return out;
    }
    std::vector<std::size_t> grid = cfg.horizons.empty() ? std::vector<std::size_t>{cfg.horizon} : cfg.horizons;
    const auto longest = *std::max_element(grid.begin(), grid.end());
    // Round-major sampling makes shorter horizons prefixes of the longest one.
    const auto all_losses = stage("loss sampling", [&] {
        return sample_regression_sequence(n_agents, cfg.dim, longest, seeds.losses);
    });
    for (auto t_horizon : grid) {
        const auto losses = all_losses.prefix(t_horizon);
        const Vector x_star = stage("offline oracle", [&] { return static_comparator(losses, set); });
        const auto run = stage("distributed run", [&] { return runner(losses, t_horizon, seeds); });
        const auto m = compute_metrics(run, losses, set, x_star);
        out.curve.push_back({t_horizon, m.sreg.back(), m.cacv.back(), m.asr.back(), m.acv.back()});
        if (keep_traces) {
            out.traces.emplace_back(run_label(r) + "_T" + std::to_string(t_horizon) + "_trace.csv", trace_writer(run));
        }
    }
    return out;
}

}  // namespace

Example3Result run_example3(const ExperimentConfig& config) {
    const auto cfg = config.with_default_horizon(4096);
    stage("config", [&] { cfg.validate(); return 0; });
    const auto set = cfg.box();

    Example3Result result;
    result.graph = stage("graph generation", [&] {
        return generate_random_connected_graph(cfg.n_agents, cfg.edge_prob, run_seeds(cfg, 0).graph);
    });
    result.weights = max_degree_weights(result.graph);

    const bool keep_traces = cfg.write_traces && !cfg.output_dir.empty();
    auto outputs = parallel_map(cfg.runs, [&](std::size_t r) {
        Graph g = result.graph;
        if (cfg.resample_graph) {
            g = stage("graph generation",
                      [&] { return generate_random_connected_graph(cfg.n_agents, cfg.edge_prob, run_seeds(cfg, r).graph); });
        }
        const Matrix w = max_degree_weights(g);
        NetworkRunner runner = [&](const LossSequence& losses, std::size_t t_horizon, const RunSeeds& seeds) {
            return run_distributed(g, w, SequenceNetworkLoss(losses), set,
                                   cfg.distributed_params(t_horizon, seeds.agents), t_horizon);
        };
        TraceWriter writer = [&](const NetworkRun& run) {
            std::ostringstream s;
            write_run_csv(s, run, set);
            return s.str();
        };
        return repetition(cfg, r, cfg.n_agents, runner, writer, keep_traces);
    });

    for (auto& o : outputs) {
        result.per_run.push_back(std::move(o.curve));
        for (auto& [_, text] : o.traces) result.traces.push_back(text);
    }
    result.averaged = average_curves(result.per_run);

    ArtifactWriter w(cfg.output_dir);
    w.file("graph.edges", [&](std::ostream& out) { write_edge_list(out, result.graph); });
    w.file("weights.csv", [&](std::ostream& out) { write_matrix_csv(out, result.weights); });
    w.file("metrics.csv", [&](std::ostream& out) { write_curve_csv(out, result.averaged); });
    for (std::size_t r = 0; r < outputs.size(); ++r) {
        w.file(run_label(r) + "_metrics.csv", [&](std::ostream& out) { write_curve_csv(out, result.per_run[r]); });
        for (const auto& [name, text] : outputs[r].traces) w.text(name, text);
    }
    if (cfg.gnuplot) w.text("plot.gp", gnuplot_curves("metrics.csv"));
    auto meta = base_metadata("example3", cfg);
    if (!result.averaged.empty()) {
        const auto& last = result.averaged.back();
        meta["summary"] = {{"T", last.horizon}, {"asr", last.asr}, {"acv", last.acv}};
    }
    result.artifacts = w.finish(std::move(meta));
    return result;
}

double CompareResult::mean_std(const std::string& series, std::size_t coord) const {
    for (const auto& row : stationarity) {
        if (row.series == series && row.coord == coord) return row.std;
    }
    throw std::out_of_range("no stationarity row for " + series + " coordinate " + std::to_string(coord));
}

CompareResult compare_dro_do(const ExperimentConfig& config) {
    auto cfg = config.with_default_horizon(2000);
    stage("config", [&] { cfg.validate(); return 0; });
    const auto set = cfg.box();
    const Graph shared = stage("graph generation", [&] {
        return generate_random_connected_graph(cfg.n_agents, cfg.edge_prob, run_seeds(cfg, 0).graph);
    });

    struct Output {
        std::vector<Vector> offline;
        NetworkRun online;
        std::vector<StationarityRow> stats;
        std::string decisions;
        std::string trace;
    };
    const bool keep_traces = cfg.write_traces && !cfg.output_dir.empty();
    auto outputs = parallel_map(cfg.runs, [&](std::size_t r) {
        const auto seeds = run_seeds(cfg, r);
        const Graph g = cfg.resample_graph ? stage("graph generation", [&] {
            return generate_random_connected_graph(cfg.n_agents, cfg.edge_prob, seeds.graph);
        })
                                           : shared;
        const Matrix w = max_degree_weights(g);
        const auto losses = stage("loss sampling", [&] {
            return sample_regression_sequence(cfg.n_agents, cfg.dim, cfg.horizon, seeds.losses);
        });
        Output o;
        o.offline = stage("per-round oracle", [&] { return per_round_oracles(losses, set); });
        o.online = stage("distributed run", [&] {
            return run_distributed(g, w, SequenceNetworkLoss(losses), set,
                                   cfg.distributed_params(cfg.horizon, seeds.agents), cfg.horizon);
        });
        auto add_rows = [&](const std::string& name, const std::vector<Vector>& series) {
            const Vector sd = stationarity_stats(series, cfg.window);
            for (Eigen::Index m = 0; m < sd.size(); ++m) {
                o.stats.push_back({name, static_cast<std::size_t>(m) + 1, sd(m)});
            }
        };
        add_rows("offline", o.offline);
        const std::size_t shown = std::min<std::size_t>(2, cfg.n_agents);
        for (std::size_t i = 0; i < shown; ++i) add_rows("agent_" + std::to_string(i + 1), o.online.points[i]);

        std::ostringstream dec;
        dec << "t,offline_x1";
        for (std::size_t i = 0; i < shown; ++i) dec << ",agent_" << (i + 1) << "_x1";
        dec << '\n';
        for (std::size_t t = 0; t < cfg.horizon; ++t) {
            dec << (t + 1) << ',' << format_double(o.offline[t](0));
            for (std::size_t i = 0; i < shown; ++i) dec << ',' << format_double(o.online.points[i][t](0));
            dec << '\n';
        }
        o.decisions = dec.str();
        if (keep_traces) {
            std::ostringstream s;
            write_run_csv(s, o.online, set);
            o.trace = s.str();
        }
        return o;
    });

    CompareResult result;
    for (std::size_t k = 0; k < outputs.front().stats.size(); ++k) {
        StationarityRow row = outputs.front().stats[k];
        row.std = 0.0;
        for (const auto& o : outputs) row.std += o.stats[k].std;
        row.std /= static_cast<double>(outputs.size());
        result.stationarity.push_back(row);
    }
    ArtifactWriter w(cfg.output_dir);
    w.file("graph.edges", [&](std::ostream& out) { write_edge_list(out, shared); });
    w.file("stationarity.csv", [&](std::ostream& out) { write_stationarity_csv(out, result.stationarity); });
    for (std::size_t r = 0; r < outputs.size(); ++r) {
        w.text(run_label(r) + "_decisions.csv", outputs[r].decisions);
        if (keep_traces) {
            w.text(run_label(r) + "_trace.csv", outputs[r].trace);
            result.traces.push_back(outputs[r].trace);
        }
        result.offline.push_back(std::move(outputs[r].offline));
        result.online.push_back(std::move(outputs[r].online));
    }
    if (cfg.gnuplot) {
        w.text("plot.gp",
               "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n"
               "plot 'run_01_decisions.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines\n");
    }
    auto meta = base_metadata("compare", cfg);
    json table = json::array();
    for (const auto& row : result.stationarity) table.push_back({{"series", row.series}, {"coord", row.coord}, {"std", row.std}});
    meta["stationarity"] = table;
    result.artifacts = w.finish(std::move(meta));
    return result;
}

DispatchDemoResult run_dispatch_demo(const ExperimentConfig& cfg) {
    DispatchDemoResult result;
    if (cfg.generators.empty()) {
        result.problem.generators = {Generator{1.0, 0.0, 0.0}, Generator{3.0, 0.0, 0.0}};
        result.problem.demand = 4.0;
    } else {
        result.problem.generators = cfg.generators;
        result.problem.demand = cfg.demand;
    }
    stage("dispatch problem", [&] { result.problem.validate(); return 0; });
    result.admm = stage("dispatch ADMM", [&] {
        return dispatch_admm(result.problem, cfg.admm_alpha, cfg.max_iters, cfg.tol, cfg.dual_update);
    });
    result.kkt = stage("KKT oracle", [&] { return dispatch_kkt_solution(result.problem); });
    result.max_abs_error = (result.admm.allocations - result.kkt).cwiseAbs().maxCoeff();

    ArtifactWriter w(cfg.output_dir);
    w.file("allocations.csv",
           [&](std::ostream& out) { write_dispatch_csv(out, result.problem, result.admm.allocations); });
    w.file("residuals.csv", [&](std::ostream& out) { write_residual_csv(out, result.admm.state); });
    auto meta = base_metadata("dispatch", cfg);
    meta.erase("seeds");
    meta.erase("algorithm");
    std::vector<double> kkt(result.kkt.data(), result.kkt.data() + result.kkt.size());
    std::vector<double> admm(result.admm.allocations.data(),
                             result.admm.allocations.data() + result.admm.allocations.size());
    meta["dispatch"] = {{"demand", result.problem.demand},
                        {"admm_allocations", admm},
                        {"kkt_allocations", kkt},
                        {"max_abs_error", result.max_abs_error},
                        {"iterations", result.admm.state.iterate},
                        {"converged", result.admm.state.converged},
                        {"total_cost", result.problem.total_cost(result.admm.allocations)}};
    result.artifacts = w.finish(std::move(meta));
    return result;
}

OgdExperimentResult run_ogd_experiment(const ExperimentConfig& config) {
    auto cfg = config.with_default_horizon(4096);
    cfg.n_agents = 1;
    stage("config", [&] { cfg.validate(); return 0; });
    const auto set = cfg.box();
    const bool keep_traces = cfg.write_traces && !cfg.output_dir.empty();

    OgdExperimentResult result;
    std::vector<std::vector<Trajectory>> trajectories(cfg.runs);
    auto outputs = parallel_map(cfg.runs, [&](std::size_t r) {
        std::vector<Trajectory> local;
        NetworkRunner runner = [&](const LossSequence& losses, std::size_t t_horizon, const RunSeeds& seeds) {
            local.push_back(run_ogd(SequenceLoss(losses, 0), t_horizon, set, cfg.ogd_options(t_horizon, seeds.agents)));
            return single_agent_run(local.back(), cfg.feedback);
        };
        TraceWriter writer = [&](const NetworkRun&) {
            std::ostringstream s;
            write_trajectory_csv(s, local.back());
            return s.str();
        };
        auto out = repetition(cfg, r, 1, runner, writer, keep_traces);
        return std::make_pair(std::move(out), std::move(local));
    });

    ArtifactWriter w(cfg.output_dir);
    for (std::size_t r = 0; r < outputs.size(); ++r) {
        auto& [rep, trajs] = outputs[r];
        result.per_run.push_back(rep.curve);
        w.file(run_label(r) + "_metrics.csv", [&](std::ostream& out) { write_curve_csv(out, rep.curve); });
        for (const auto& [name, text] : rep.traces) {
            w.text(name, text);
            result.traces.push_back(text);
        }
        result.trajectories.push_back(std::move(trajs.back()));
    }
    result.averaged = average_curves(result.per_run);
    w.file("metrics.csv", [&](std::ostream& out) { write_curve_csv(out, result.averaged); });
    if (cfg.gnuplot) w.text("plot.gp", gnuplot_curves("metrics.csv"));
    auto meta = base_metadata("ogd", cfg);
    meta["algorithm"] = {{"full", "x_t = P_X(x_{t-1} - alpha_t grad l_{t-1}(x_{t-1})), alpha_t = alpha_scale/(G sqrt(t-1))"},
                         {"bandit", "x_t = y_t + delta r_in u_t; y_{t+1} = P_{X_delta}(base - eta d l(x_t) u_t/(delta r_in))"},
                         {"bandit_update_from", to_string(cfg.bandit_update_base)},
                         {"comparator", "static full-horizon minimiser over X"}};
    result.artifacts = w.finish(std::move(meta));
    return result;
}

}  // namespace doco
