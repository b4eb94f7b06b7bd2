#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include "doco/experiment.hpp"
#include "doco/format.hpp"

using namespace doco;

namespace {

// Values given on the command line; each overrides the config file when set.
struct Overrides {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> runs;
    std::optional<std::string> feedback;
    std::optional<std::string> output_dir;
    std::optional<std::size_t> n_agents;
    std::optional<double> edge_prob;
    std::optional<std::string> constraint_mode;
    std::optional<std::string> curve_mode;
    std::optional<std::string> update_base;
    std::vector<std::size_t> horizons;
    std::vector<std::string> generators;
    std::optional<double> demand;
    std::optional<double> admm_alpha;
    bool resample_graph = false;
    bool gnuplot = false;
    bool no_traces = false;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_file, "JSON config or metadata file");
    app->add_option("--seed", o.seed, "master seed");
    app->add_option("--horizon", o.horizon, "number of rounds T");
    app->add_option("--runs", o.runs, "independent runs to average");
    app->add_option("--feedback", o.feedback, "full or bandit")->check(CLI::IsMember({"full", "bandit"}));
    app->add_option("--output-dir", o.output_dir, "directory for CSV and metadata output");
}

void add_network(CLI::App* app, Overrides& o) {
    app->add_option("--agents", o.n_agents, "number of agents N");
    app->add_option("--edge-prob", o.edge_prob, "edge probability of the random graph");
    app->add_option("--constraint-mode", o.constraint_mode, "long_term or project_every_round")
        ->check(CLI::IsMember({"long_term", "project_every_round"}));
    app->add_option("--bandit-update-base", o.update_base, "anchor or played")
        ->check(CLI::IsMember({"anchor", "played"}));
    app->add_flag("--resample-graph", o.resample_graph, "draw a new graph for every run");
}

void add_curves(CLI::App* app, Overrides& o) {
    app->add_option("--horizons", o.horizons, "evaluation horizons, comma separated")->delimiter(',');
    app->add_option("--curve-mode", o.curve_mode, "prefix or independent")
        ->check(CLI::IsMember({"prefix", "independent"}));
    app->add_flag("--gnuplot", o.gnuplot, "also write a gnuplot script");
    app->add_flag("--no-traces", o.no_traces, "skip per-run trace CSVs");
}

Generator parse_generator(const std::string& text) {
    std::vector<double> v;
    std::stringstream s(text);
    for (std::string field; std::getline(s, field, ',');) {
        std::size_t used = 0;
        const double x = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument("bad generator field '" + field + "'");
        v.push_back(x);
    }
    if (v.size() != 3 && v.size() != 5) {
        throw std::invalid_argument("generator '" + text + "' must be q,r,s or q,r,s,min,max");
    }
    Generator g{v[0], v[1], v[2]};
    if (v.size() == 5) {
        g.min = v[3];
        g.max = v[4];
    }
    return g;
}

ExperimentConfig resolve(const Overrides& o) {
    ExperimentConfig c = o.config_file.empty() ? ExperimentConfig{} : load_config(o.config_file);
    if (o.seed) c.seed = *o.seed;
    if (o.horizon) c.horizon = *o.horizon;
    if (o.runs) c.runs = *o.runs;
    if (o.feedback) c.feedback = parse_feedback(*o.feedback);
    if (o.output_dir) c.output_dir = *o.output_dir;
    if (o.n_agents) c.n_agents = *o.n_agents;
    if (o.edge_prob) c.edge_prob = *o.edge_prob;
    if (o.constraint_mode) c.constraint_mode = parse_constraint_mode(*o.constraint_mode);
    if (o.curve_mode) c.curve_mode = parse_curve_mode(*o.curve_mode);
    if (o.update_base) c.bandit_update_base = parse_bandit_update_base(*o.update_base);
    if (!o.horizons.empty()) c.horizons = o.horizons;
    if (!o.generators.empty()) {
        c.generators.clear();
        for (const auto& g : o.generators) c.generators.push_back(parse_generator(g));
    }
    if (o.demand) c.demand = *o.demand;
    if (o.admm_alpha) c.admm_alpha = *o.admm_alpha;
    if (o.resample_graph) c.resample_graph = true;
    if (o.gnuplot) c.gnuplot = true;
    if (o.no_traces) c.write_traces = false;
    return c;
}

void print_curve(const std::vector<CurvePoint>& curve) {
    write_curve_csv(std::cout, curve);
}

void print_files(const RunArtifacts& artifacts) {
    for (const auto& f : artifacts.files) std::cerr << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed online convex optimisation simulator"};
    app.require_subcommand(1);

    Overrides o;
    auto* example3 = app.add_subcommand("example3", "distributed online regression; averaged ASR/ACV curves");
    auto* compare = app.add_subcommand("compare", "per-round offline optimisers vs distributed online decisions");
    auto* dispatch = app.add_subcommand("dispatch", "economic dispatch by ADMM, checked against KKT");
    auto* ogd = app.add_subcommand("ogd", "single-learner online gradient descent");

    for (auto* sub : {example3, compare, dispatch, ogd}) add_common(sub, o);
    for (auto* sub : {example3, compare}) add_network(sub, o);
    for (auto* sub : {example3, ogd}) add_curves(sub, o);
    ogd->add_option("--bandit-update-base", o.update_base, "anchor or played")
        ->check(CLI::IsMember({"anchor", "played"}));
    compare->add_flag("--gnuplot", o.gnuplot, "also write a gnuplot script");
    dispatch->add_option("--generator", o.generators, "q,r,s or q,r,s,min,max (repeatable)");
    dispatch->add_option("--demand", o.demand, "total demand P");
    dispatch->add_option("--alpha", o.admm_alpha, "ADMM penalty");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig config = resolve(o);
        if (example3->parsed()) {
            const auto r = run_example3(config);
            print_curve(r.averaged);
            print_files(r.artifacts);
        } else if (compare->parsed()) {
            const auto r = compare_dro_do(config);
            write_stationarity_csv(std::cout, r.stationarity);
            print_files(r.artifacts);
        } else if (dispatch->parsed()) {
            const auto r = run_dispatch_demo(config);
            std::cout << "generator,admm,kkt\n";
            for (Eigen::Index i = 0; i < r.kkt.size(); ++i) {
                std::cout << i + 1 << ',' << format_double(r.admm.allocations(i)) << ','
                          << format_double(r.kkt(i)) << '\n';
            }
            std::cout << "iterations " << r.admm.state.iterate << (r.admm.state.converged ? " converged" : " not converged")
                      << ", max |admm - kkt| = " << format_double(r.max_abs_error) << '\n';
            print_files(r.artifacts);
        } else if (ogd->parsed()) {
            const auto r = run_ogd_experiment(config);
            print_curve(r.averaged);
            print_files(r.artifacts);
        }
    } catch (const std::exception& e) {
        std::cerr << "doco: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
