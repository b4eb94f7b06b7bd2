#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "doco/admm.hpp"
#include "doco/distributed.hpp"
#include "doco/graph.hpp"
#include "doco/metrics.hpp"
#include "doco/online.hpp"
#include "doco/problems.hpp"

namespace doco {

/// How ASR/ACV-vs-T curves are produced: prefixes of one long run, or one
/// independent run (with horizon-tuned parameters) per evaluated T.
enum class CurveMode { prefix, independent };

std::string to_string(CurveMode mode);
CurveMode parse_curve_mode(const std::string& name);

struct ExperimentConfig {
    std::size_t n_agents = 20;
    std::size_t dim = 2;
    double lower = -0.5;
    double upper = 0.5;
    std::optional<double> radius;  // must equal U sqrt(d) when given and L = -U
    std::size_t horizon = 0;       // 0 selects the subcommand default
    std::size_t runs = 10;
    Feedback feedback = Feedback::full;
    std::uint64_t seed = 1;
    double edge_prob = 0.15;
    bool resample_graph = false;

    std::optional<double> alpha_scale;  // defaults to R_X
    double gamma_scale = 1.0;
    double theta = 1.0;
    double delta_scale = 1.0;
    double delta_exponent = 0.25;
    double eta_scale = 1.0;
    double eta_exponent = 0.75;
    double grad_bound = 1.0;  // single-learner alpha_t = R_X / (G sqrt(t))
    ConstraintMode constraint_mode = ConstraintMode::long_term;
    BanditUpdateBase bandit_update_base = BanditUpdateBase::anchor;

    CurveMode curve_mode = CurveMode::prefix;
    std::vector<std::size_t> horizons;  // evaluation grid; empty means every prefix
    double window = 0.5;

    std::vector<Generator> generators;
    double demand = 0.0;
    double admm_alpha = 1.0;
    std::size_t max_iters = 10000;
    double tol = 1e-9;
    DualUpdate dual_update = DualUpdate::ascent;

    std::string output_dir;
    bool write_traces = true;
    bool gnuplot = false;

    BoxSet box() const { return BoxSet(dim, lower, upper); }
    double set_radius() const { return box().radius(); }
    /// Throws std::invalid_argument on L >= U, T < 1, runs < 1, edge_prob outside (0, 1], or an inconsistent R_X.
    void validate() const;
    /// Copy with horizon replaced by `fallback` when unset.
    ExperimentConfig with_default_horizon(std::size_t fallback) const;
    /// Distributed parameters for a run of horizon T.
    DistributedParams distributed_params(std::size_t horizon, std::uint64_t seed) const;
    OgdOptions ogd_options(std::size_t horizon, std::uint64_t seed) const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Unknown keys are rejected. Accepts either a config object or a metadata
/// file that carries one under "config".
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Seeds derived from the master seed; recorded in metadata.
struct RunSeeds {
    std::uint64_t graph = 0;
    std::uint64_t losses = 0;
    std::uint64_t agents = 0;
};
RunSeeds run_seeds(const ExperimentConfig& config, std::size_t run);

struct CurvePoint {
    std::size_t horizon = 0;
    double sreg = 0.0;
    double cacv = 0.0;
    double asr = 0.0;
    double acv = 0.0;
};

/// Pointwise mean over runs; all runs must share the same grid.
std::vector<CurvePoint> average_curves(const std::vector<std::vector<CurvePoint>>& per_run);
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

struct RunArtifacts {
    std::vector<std::filesystem::path> files;
    nlohmann::json metadata;
};

struct Example3Result {
    Graph graph;
    Matrix weights;
    std::vector<std::vector<CurvePoint>> per_run;
    std::vector<CurvePoint> averaged;
    std::vector<std::string> traces;  // per-run trace CSV text (only when write_traces)
    RunArtifacts artifacts;
};

/// Seeded runs of the distributed algorithm on sampled regression losses;
/// ASR/ACV curves averaged over runs. Default T = 4096.
Example3Result run_example3(const ExperimentConfig& config);

struct CompareResult {
    std::vector<std::vector<Vector>> offline;  // [run][t] x*_t
    std::vector<NetworkRun> online;            // [run]
    std::vector<StationarityRow> stationarity; // averaged over runs
    std::vector<std::string> traces;
    RunArtifacts artifacts;

    /// Mean over runs of the trailing-window std of `series` coordinate `coord` (1-based).
    double mean_std(const std::string& series, std::size_t coord) const;
};

/// Repeated per-round offline optimisation vs distributed online decisions on
/// shared losses. Default T = 2000.
CompareResult compare_dro_do(const ExperimentConfig& config);

struct DispatchDemoResult {
    DispatchProblem problem;
    DispatchResult admm;
    Vector kkt;
    double max_abs_error = 0.0;
    RunArtifacts artifacts;
};

DispatchDemoResult run_dispatch_demo(const ExperimentConfig& config);

struct OgdExperimentResult {
    std::vector<Trajectory> trajectories;        // [run]
    std::vector<std::vector<CurvePoint>> per_run;
    std::vector<CurvePoint> averaged;
    std::vector<std::string> traces;
    RunArtifacts artifacts;
};

/// Single learner (agent 0 of an N = 1 loss sequence), full or bandit. Default T = 4096.
OgdExperimentResult run_ogd_experiment(const ExperimentConfig& config);

}  // namespace doco
