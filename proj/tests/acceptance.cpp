// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doco/experiment.hpp"
#include "doco/format.hpp"
#include "oracles.hpp"

using namespace doco;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << ": " << detail << std::endl;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

template <class F>
std::string join(const std::vector<CurvePoint>& curve, F field) {
    std::string out;
    for (const auto& p : curve) out += (out.empty() ? "" : " > ") + fmt(field(p));
    return out;
}

template <class F>
bool strictly_decreasing(const std::vector<CurvePoint>& curve, F field) {
    for (std::size_t k = 1; k < curve.size(); ++k)
        if (!(field(curve[k]) < field(curve[k - 1]))) return false;
    return true;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> horizons_of(const std::vector<CurvePoint>& c) {
    std::vector<double> out;
    for (const auto& p : c) out.push_back(static_cast<double>(p.horizon));
    return out;
}

std::vector<double> sregs_of(const std::vector<CurvePoint>& c) {
    std::vector<double> out;
    for (const auto& p : c) out.push_back(p.sreg);
    return out;
}

const auto asr = [](const CurvePoint& p) { return p.asr; };
const auto acv = [](const CurvePoint& p) { return p.acv; };

struct CurveRuns {
    std::vector<CurvePoint> full;
    double full_seconds = 0.0;
    std::vector<CurvePoint> bandit;
    double bandit_seconds = 0.0;
};

const CurveRuns& curve_runs() {
    static const CurveRuns runs = [] {
        CurveRuns out;
        ExperimentConfig full;
        full.horizon = 8192;
        full.horizons = {512, 2048, 8192};
        auto start = std::chrono::steady_clock::now();
        out.full = run_example3(full).averaged;
        out.full_seconds = seconds_since(start);

        ExperimentConfig bandit;
        bandit.feedback = Feedback::bandit;
        bandit.curve_mode = CurveMode::independent;
        bandit.horizons = {2048, 8192, 32768};
        start = std::chrono::steady_clock::now();
        out.bandit = run_example3(bandit).averaged;
        out.bandit_seconds = seconds_since(start);
        return out;
    }();
    return runs;
}

void criterion1() {
    const auto& [full, full_seconds, bandit, bandit_seconds] = curve_runs();
    {
        const double asr_ratio = full.back().asr / full.front().asr;
        const double acv_ratio = full.back().acv / full.front().acv;
        const bool pass = strictly_decreasing(full, asr) && strictly_decreasing(full, acv) && asr_ratio <= 0.5 &&
                          acv_ratio <= 0.5 && full_seconds < 60.0;
        report("1 full-info convergence", pass,
               "ASR " + join(full, asr) + " (ratio " + fmt(asr_ratio) + " <= 0.5); ACV " + join(full, acv) +
                   " (ratio " + fmt(acv_ratio) + " <= 0.5); " + fmt(full_seconds) + " s < 60 s");
    }
    {
        const double asr_ratio = bandit.back().asr / bandit.front().asr;
        const bool asr_ok = strictly_decreasing(bandit, asr) && asr_ratio <= 0.7;
        const bool acv_ok = strictly_decreasing(bandit, acv) && bandit.back().acv <= 0.7 * bandit.front().acv;
        std::string detail = "ASR " + join(bandit, asr) + " (ratio " + fmt(asr_ratio) + " <= 0.7)" +
                             (asr_ok ? "" : " not met") + "; ACV " + join(bandit, acv);
        if (!acv_ok) {
            detail += bandit.back().acv == 0.0 && bandit.front().acv == 0.0
                          ? " (no violation at any horizon, so no strict decrease)"
                          : " not strictly decreasing by 0.7";
        }
        report("1 bandit convergence", asr_ok && acv_ok, detail + "; " + fmt(bandit_seconds) + " s");
    }
}

void criterion2() {
    const auto& runs = curve_runs();
    const double full_slope = log_log_slope(horizons_of(runs.full), sregs_of(runs.full));
    const double bandit_slope = log_log_slope(horizons_of(runs.bandit), sregs_of(runs.bandit));
    report("2 sub-linear regret slope", full_slope < 0.95 && bandit_slope < 1.0,
           "full " + fmt(full_slope) + " < 0.95; bandit " + fmt(bandit_slope) + " < 1.0");
}

void criterion3() {
    bool pass = true;
    std::string detail;
    for (double alpha : {0.5, 1.0, 2.0}) {
        AdmmProblem p;
        p.f = Quadratic{Matrix::Constant(1, 1, 2), Vector::Constant(1, -2), 1.0};
        p.g = Quadratic{Matrix::Constant(1, 1, 2), Vector::Constant(1, -4), 4.0};
        p.A = Matrix::Constant(1, 1, 1);
        p.B = Matrix::Constant(1, 1, -1);
        p.c = Vector::Zero(1);
        p.alpha = alpha;
        const auto s = admm_solve(p, AdmmState::zeros(p), 5000, 1e-10);
        const double err = std::max(std::abs(s.x(0) - 1.5), std::abs(s.z(0) - 1.5));
        pass = pass && err < 1e-6 && s.iterate <= 5000;
        detail += (detail.empty() ? "" : "; ") + std::string("alpha ") + fmt(alpha) + ": " +
                  std::to_string(s.iterate) + " iters, err " + fmt(err);
    }
    report("3 ADMM toy QP", pass, detail);
}

void criterion4() {
    auto check = [](const DispatchProblem& p, const Vector& expected) {
        const auto r = dispatch_admm(p, 1.0, 20000, 1e-10);
        return (r.allocations - expected).cwiseAbs().maxCoeff();
    };
    double worst_fixture = 0.0;
    Vector v(2);
    v << 5, 5;
    worst_fixture = std::max(worst_fixture, check({{Generator{1, 0, 0}, Generator{1, 0, 0}}, 10}, v));
    v << 3, 1;
    worst_fixture = std::max(worst_fixture, check({{Generator{1, 0, 0}, Generator{3, 0, 0}}, 4}, v));
    Generator capped{1, 0, 0};
    capped.max = 4;
    v << 4, 6;
    worst_fixture = std::max(worst_fixture, check({{capped, Generator{1, 0, 0}}, 10}, v));

    Engine rng(derive_seed(2024, 4));
    double worst_random = 0.0;
    for (int k = 0; k < 50; ++k) {
        DispatchProblem p;
        const int n = 2 + k % 9;
        double lo = 0, hi = 0;
        for (int i = 0; i < n; ++i) {
            Generator g{uniform(rng, 0.1, 3.0), uniform(rng, -2, 2), uniform(rng, 0, 1)};
            g.min = uniform(rng, 0.0, 2.0);
            g.max = g.min + uniform(rng, 0.2, 4.0);
            lo += g.min;
            hi += g.max;
            p.generators.push_back(g);
        }
        p.demand = uniform(rng, lo, hi);
        worst_random = std::max(worst_random, check(p, testing::breakpoint_dispatch(p)));
    }
    report("4 dispatch KKT equivalence", worst_fixture <= 1e-4 && worst_random <= 1e-4,
           "fixtures max err " + fmt(worst_fixture) + ", 50 random instances max err " + fmt(worst_random) +
               " (<= 1e-4)");
}

void criterion5() {
    Engine rng(derive_seed(2024, 5));
    const BoxSet box(2, -0.5, 0.5);
    Vector c(2), y(2);
    c << uniform(rng, -1, 1), uniform(rng, -1, 1);
    y << 0.1, -0.05;
    const double b = uniform(rng, 0, 1);
    const double r = exploration_radius(box, 0.1);
    const int draws = 100000;
    Vector sum = Vector::Zero(2), sum_sq = Vector::Zero(2);
    for (int k = 0; k < draws; ++k) {
        const Vector u = sample_unit_sphere(2, rng);
        const Vector g = one_point_estimate(c.dot(y + r * u) + b, u, r);
        sum += g;
        sum_sq += g.cwiseProduct(g);
    }
    const Vector mean = sum / draws;
    bool pass = true;
    std::string detail;
    for (Eigen::Index k = 0; k < 2; ++k) {
        const double se = std::sqrt((sum_sq(k) / draws - mean(k) * mean(k)) / draws);
        const double z = std::abs(mean(k) - c(k)) / se;
        pass = pass && z <= 3.0;
        detail += (k ? "; " : "") + std::string("coord ") + std::to_string(k + 1) + ": |mean - c| = " +
                  fmt(std::abs(mean(k) - c(k))) + " = " + fmt(z) + " SE";
    }
    report("5 bandit estimator unbiasedness", pass, detail + " (<= 3 SE)");
}

void criterion6() {
    Engine rng(derive_seed(2024, 6));
    int valid = 0;
    for (int k = 0; k < 100; ++k) {
        const auto n = 2 + static_cast<std::size_t>(uniform01(rng) * 49);
        const double p = uniform(rng, 0.1, 1.0);
        const auto g = generate_random_connected_graph(n, p, derive_seed(606, k));
        if (g.is_connected() && validate_doubly_stochastic(max_degree_weights(g), 1e-12)) ++valid;
    }
    const Matrix p3 = max_degree_weights(path_graph(3));
    Matrix p3_expected(3, 3);
    p3_expected << 2.0 / 3, 1.0 / 3, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 1.0 / 3, 2.0 / 3;
    const bool path_ok = p3 == p3_expected;
    const bool k2_ok = max_degree_weights(complete_graph(2)) == Matrix::Constant(2, 2, 0.5);
    report("6 weight-matrix validity", valid == 100 && path_ok && k2_ok,
           std::to_string(valid) + "/100 random graphs doubly stochastic at 1e-12; path-of-3 " +
               (path_ok ? "exact" : "mismatch") + "; K2 " + (k2_ok ? "exact" : "mismatch"));
}

void criterion7() {
    ExperimentConfig c;
    c.horizon = 2000;
    const auto r = compare_dro_do(c);
    bool pass = true;
    std::string detail;
    for (std::size_t coord = 1; coord <= c.dim; ++coord) {
        const double offline = r.mean_std("offline", coord);
        for (const std::string agent : {"agent_1", "agent_2"}) {
            const double ratio = r.mean_std(agent, coord) / offline;
            pass = pass && ratio < 0.5;
            detail += (detail.empty() ? "" : "; ") + agent + " x" + std::to_string(coord) + " ratio " + fmt(ratio);
        }
    }
    report("7 stationarity", pass, detail + " (< 0.5)");
}

void criterion8() {
    const BoxSet box(2, -0.5, 0.5);
    const std::size_t T = 4096;
    const auto seq = sample_regression_sequence(1, 2, T, derive_seed(2024, 8));
    auto params = default_distributed_params(box, Feedback::full, T, 8);
    params.constraint_mode = ConstraintMode::project_every_round;
    const auto run = run_distributed(Graph(1), Matrix::Identity(1, 1), SequenceNetworkLoss(seq), box, params, T);
    OgdOptions options;
    options.step = StepSchedule::inverse_sqrt(box.radius(), 1);
    const auto traj = run_ogd(SequenceLoss(seq, 0), T, box, options);
    const bool points = run.points[0] == traj.points;
    const bool losses = run.losses[0] == traj.losses;

    ExperimentConfig c;
    c.n_agents = 1;
    c.horizon = 1024;
    c.runs = 3;
    c.horizons = {256, 1024};
    c.constraint_mode = ConstraintMode::project_every_round;
    const auto net = run_example3(c);
    const auto single = run_ogd_experiment(c);
    bool pipelines = net.per_run.size() == single.per_run.size();
    for (std::size_t r = 0; pipelines && r < net.per_run.size(); ++r)
        for (std::size_t k = 0; k < net.per_run[r].size(); ++k)
            pipelines = pipelines && net.per_run[r][k].sreg == single.per_run[r][k].sreg;
    report("8 single-agent degeneration", points && losses && pipelines,
           std::string("T=4096 points ") + (points ? "identical" : "differ") + ", losses " +
               (losses ? "identical" : "differ") + "; harness N=1 vs single-learner curves " +
               (pipelines ? "identical" : "differ"));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion9() {
    const auto root = fs::temp_directory_path() / "doco_acceptance_determinism";
    fs::remove_all(root);
    ExperimentConfig base;
    base.n_agents = 10;
    base.edge_prob = 0.3;
    base.horizon = 400;
    base.runs = 3;

    std::vector<std::pair<std::string, std::function<void(const ExperimentConfig&)>>> commands{
        {"example3", [](const ExperimentConfig& c) { run_example3(c); }},
        {"example3-bandit",
         [](ExperimentConfig c) {
             c.feedback = Feedback::bandit;
             run_example3(c);
         }},
        {"compare", [](const ExperimentConfig& c) { compare_dro_do(c); }},
        {"dispatch", [](const ExperimentConfig& c) { run_dispatch_demo(c); }},
        {"ogd",
         [](ExperimentConfig c) {
             c.feedback = Feedback::bandit;
             run_ogd_experiment(c);
         }},
    };
    std::size_t compared = 0;
    std::vector<std::string> mismatches;
    for (const auto& [name, command] : commands) {
        for (const char* pass : {"a", "b"}) {
            auto c = base;
            c.output_dir = (root / (name + "_" + pass)).string();
            command(c);
        }
        for (const auto& entry : fs::directory_iterator(root / (name + "_a"))) {
            if (entry.path().extension() != ".csv") continue;
            ++compared;
            if (slurp(entry.path()) != slurp(root / (name + "_b") / entry.path().filename()))
                mismatches.push_back(name + "/" + entry.path().filename().string());
        }
    }
    fs::remove_all(root);
    report("9 determinism", mismatches.empty() && compared > 0,
           std::to_string(compared) + " CSV files compared across 5 subcommands, " +
               std::to_string(mismatches.size()) + " differ");
}

void criterion10() {
    const BoxSet box(2, -0.5, 0.5);
    const auto g = generate_random_connected_graph(20, 0.15, derive_seed(2024, 10));
    const Matrix w = max_degree_weights(g);
    bool monotone = true;
    std::size_t runs = 0;
    for (auto mode : {Feedback::full, Feedback::bandit}) {
        for (auto cm : {ConstraintMode::long_term, ConstraintMode::project_every_round}) {
            for (int r = 0; r < 3; ++r) {
                const auto seq = sample_regression_sequence(20, 2, 1000, derive_seed(1010, runs));
                auto params = default_distributed_params(box, mode, 1000, derive_seed(1011, runs));
                params.constraint_mode = cm;
                const auto run = run_distributed(g, w, SequenceNetworkLoss(seq), box, params, 1000);
                const auto curve = cacv(run, box);
                for (std::size_t t = 1; t < curve.size(); ++t) monotone = monotone && curve[t] >= curve[t - 1];
                ++runs;
            }
        }
    }

    const auto seq = sample_regression_sequence(20, 2, 500, derive_seed(2024, 11));
    const Vector x_star = offline_oracle(seq, box).x;
    NetworkRun at_opt;
    at_opt.n_agents = 20;
    at_opt.horizon = 500;
    at_opt.dim = 2;
    at_opt.points.assign(20, std::vector<Vector>(500, x_star));
    at_opt.losses.assign(20, std::vector<double>(500, 0.0));
    double worst_zero = 0.0;
    for (double v : system_regret(at_opt, seq, x_star)) worst_zero = std::max(worst_zero, std::abs(v));

    const std::size_t T = 1000;
    LossSequence fixture(1, T, 1);
    for (std::size_t t = 0; t < T; ++t) fixture.at(0, t) = {Vector::Constant(1, std::sqrt(2.0)), std::sqrt(2.0)};
    const BoxSet line(1, -0.5, 0.5);
    NetworkRun idle;
    idle.n_agents = 1;
    idle.horizon = T;
    idle.dim = 1;
    idle.points = {std::vector<Vector>(T, Vector::Zero(1))};
    idle.losses = {std::vector<double>(T, 1.0)};
    const auto sreg = system_regret(idle, fixture, offline_oracle(fixture, line).x);
    double worst_rel = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const double expected = 0.75 * static_cast<double>(t + 1);
        worst_rel = std::max(worst_rel, std::abs(sreg[t] - expected) / expected);
    }
    report("10 metric identities", monotone && worst_zero <= 1e-9 && worst_rel <= 1e-9,
           "CACV non-decreasing on " + std::to_string(runs) + " runs: " + (monotone ? "yes" : "no") +
               "; all-x* SReg max |.| " + fmt(worst_zero) + " (<= 1e-9); 0.75T fixture rel err " + fmt(worst_rel) +
               " (<= 1e-9)");
}

}  // namespace

int main(int argc, char** argv) {
    // With no argument every criterion runs; "acceptance 7" runs one.
    const std::vector<void (*)()> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                           criterion6, criterion7, criterion8, criterion9, criterion10};
    std::vector<std::size_t> selected;
    if (argc > 1) {
        const auto k = std::stoul(argv[1]);
        if (k < 1 || k > criteria.size()) {
            std::cerr << "criterion must be 1.." << criteria.size() << '\n';
            return 2;
        }
        selected.push_back(k - 1);
    } else {
        for (std::size_t k = 0; k < criteria.size(); ++k) selected.push_back(k);
    }
    for (auto k : selected) {
        try {
            criteria[k]();
        } catch (const std::exception& e) {
            report(std::to_string(k + 1), false, std::string("aborted: ") + e.what());
        }
    }
    std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
