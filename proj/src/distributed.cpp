#include "doco/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "doco/format.hpp"

namespace doco {

std::string to_string(ConstraintMode mode) {
    return mode == ConstraintMode::long_term ? "long_term" : "project_every_round";
}

ConstraintMode parse_constraint_mode(const std::string& name) {
    if (name == "long_term") return ConstraintMode::long_term;
    if (name == "project_every_round") return ConstraintMode::project_every_round;
    throw std::invalid_argument("constraint mode must be 'long_term' or 'project_every_round', got: " + name);
}

void DistributedParams::validate() const {
    alpha.validate();
    gamma.validate();
    if (!(theta >= 0.0)) throw std::invalid_argument("theta must be nonnegative");
    if (mode == Feedback::bandit) {
        eta.validate();
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bandit delta must lie in (0, 1)");
    }
}

DistributedParams default_distributed_params(const BoxSet& set, Feedback mode, std::size_t horizon,
                                             std::uint64_t seed) {
    DistributedParams p;
    p.mode = mode;
    p.alpha = StepSchedule::inverse_sqrt(set.radius());
    p.gamma = StepSchedule::inverse_sqrt(1.0);
    p.theta = 1.0;
    p.delta = std::pow(static_cast<double>(horizon), -0.25);
    p.eta = StepSchedule::horizon_tuned(1.0, 0.75);
    p.seed = seed;
    return p;
}

std::vector<Vector> consensus_mix(const Matrix& w, const std::vector<Vector>& points) {
    const auto n = points.size();
    if (static_cast<std::size_t>(w.rows()) != n || static_cast<std::size_t>(w.cols()) != n) {
        throw std::invalid_argument("weight matrix does not match the number of points");
    }
    if (n == 0) return {};
    const auto dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw std::invalid_argument("dimension mismatch in consensus_mix");
    }
    std::vector<Vector> out(n, Vector::Zero(dim));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (a != 0.0) out[i] += a * points[j];
        }
    }
    return out;
}

Vector constraint_drift(const Vector& lambda, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    if (lambda.size() != 2 * d) throw std::invalid_argument("dual vector must have 2d entries");
    return lambda.tail(d) - lambda.head(d);
}

Vector project_primal(const Vector& x, const BoxSet& set, ConstraintMode mode, double delta) {
    const double scale = 1.0 - delta;
    if (mode == ConstraintMode::long_term) return project_ball(x, scale * set.radius());
    return x.cwiseMax(scale * set.lower()).cwiseMin(scale * set.upper());
}

Vector dual_update(const Vector& lambda, const Vector& x_new, const BoxSet& set, double gamma, double theta) {
    return ((1.0 - theta * gamma) * lambda + gamma * constraint_values(x_new, set)).cwiseMax(0.0);
}

AgentState primal_dual_step_full(const Vector& mixed_x, const Vector& grad, const Vector& lambda, const BoxSet& set,
                                 double alpha, double gamma, double theta, ConstraintMode mode) {
    if (mixed_x.size() != grad.size() || static_cast<std::size_t>(mixed_x.size()) != set.dim()) {
        throw std::invalid_argument("dimension mismatch in primal-dual step");
    }
    AgentState next;
    next.x = project_primal(mixed_x - alpha * (grad + constraint_drift(lambda, set.dim())), set, mode);
    next.lambda = dual_update(lambda, next.x, set, gamma, theta);
    return next;
}

BanditStep primal_dual_step_bandit(const Vector& mixed_anchor, const std::function<double(const Vector&)>& loss_oracle,
                                   const Vector& lambda, const BoxSet& set, double delta, double eta, double gamma,
                                   double theta, Engine& rng, ConstraintMode mode, BanditUpdateBase base) {
    if (static_cast<std::size_t>(mixed_anchor.size()) != set.dim()) {
        throw std::invalid_argument("dimension mismatch in bandit primal-dual step");
    }
    const double radius = exploration_radius(set, delta);
    BanditStep step;
    const Vector u = sample_unit_sphere(set.dim(), rng);
    step.played = mixed_anchor + radius * u;
    step.loss = loss_oracle(step.played);
    step.estimate = one_point_estimate(step.loss, u, radius);
    const Vector& from = base == BanditUpdateBase::played ? step.played : mixed_anchor;
    step.next.x = project_primal(from - eta * (step.estimate + constraint_drift(lambda, set.dim())), set, mode, delta);
    step.next.lambda = dual_update(lambda, step.next.x, set, gamma, theta);
    return step;
}

void check_weights_match_graph(const Graph& g, const Matrix& w) {
    const auto n = g.size();
    if (static_cast<std::size_t>(w.rows()) != n || static_cast<std::size_t>(w.cols()) != n) {
        throw std::invalid_argument("weight matrix size does not match the graph");
    }
    if (!validate_doubly_stochastic(w, 1e-12)) throw std::invalid_argument("weight matrix is not doubly stochastic");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0 && !g.has_edge(i, j)) {
                throw std::invalid_argument("weight matrix puts weight on a non-edge");
            }
        }
    }
}

namespace {

double max_pairwise_distance(const std::vector<Vector>& points) {
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) best = std::max(best, (points[i] - points[j]).norm());
    return best;
}

}  // namespace

NetworkRun run_distributed(const Graph& g, const Matrix& w, const NetworkLoss& losses, const BoxSet& set,
                           const DistributedParams& params, std::size_t horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (losses.n_agents() != g.size()) throw std::invalid_argument("losses do not cover every agent");
    if (losses.dim() != set.dim()) throw std::invalid_argument("loss and set dimensions differ");
    check_weights_match_graph(g, w);
    params.validate();

    const std::size_t n = g.size();
    const auto dim = static_cast<Eigen::Index>(set.dim());
    const auto p = static_cast<Eigen::Index>(set.constraint_count());

    NetworkRun run;
    run.mode = params.mode;
    run.n_agents = n;
    run.horizon = horizon;
    run.dim = set.dim();
    run.points.assign(n, {});
    run.losses.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        run.points[i].reserve(horizon);
        run.losses[i].reserve(horizon);
    }
    run.disagreement.reserve(horizon);
    run.max_dual.reserve(horizon);

    std::vector<AgentState> agents(n, AgentState{Vector::Zero(dim), Vector::Zero(p)});
    std::vector<LocalLoss> local;
    local.reserve(n);
    for (std::size_t i = 0; i < n; ++i) local.emplace_back(losses, i);

    std::vector<Vector> decisions(n);
    std::vector<Engine> rngs;
    if (params.mode == Feedback::bandit) {
        for (std::size_t i = 0; i < n; ++i) rngs.emplace_back(derive_seed(params.seed, i));
    }

    for (std::size_t t = 1; t <= horizon; ++t) {
        for (std::size_t i = 0; i < n; ++i) decisions[i] = agents[i].x;
        const auto mixed = consensus_mix(w, decisions);
        double max_dual = 0.0;

        if (params.mode == Feedback::full) {
            const double alpha = params.alpha.at(t, horizon);
            const double gamma = params.gamma.at(t, horizon);
            for (std::size_t i = 0; i < n; ++i) {
                run.points[i].push_back(decisions[i]);
                run.losses[i].push_back(local[i].value(t, decisions[i]));
                const Vector grad = local[i].gradient(t, mixed[i]);
                agents[i] = primal_dual_step_full(mixed[i], grad, agents[i].lambda, set, alpha, gamma, params.theta,
                                                  params.constraint_mode);
                max_dual = std::max(max_dual, agents[i].lambda.maxCoeff());
            }
            run.disagreement.push_back(max_pairwise_distance(decisions));
        } else {
            const double eta = params.eta.at(t, horizon);
            const double gamma = params.gamma.at(t, horizon);
            std::vector<Vector> played(n);
            for (std::size_t i = 0; i < n; ++i) {
                const LocalLoss& own = local[i];
                auto step = primal_dual_step_bandit(
                    mixed[i], [&](const Vector& x) { return own.value(t, x); }, agents[i].lambda, set, params.delta,
                    eta, gamma, params.theta, rngs[i], params.constraint_mode, params.update_base);
                run.points[i].push_back(step.played);
                run.losses[i].push_back(step.loss);
                played[i] = std::move(step.played);
                agents[i] = std::move(step.next);
                max_dual = std::max(max_dual, agents[i].lambda.maxCoeff());
            }
            run.disagreement.push_back(max_pairwise_distance(played));
        }
        run.max_dual.push_back(max_dual);
    }
    return run;
}

void write_run_csv(std::ostream& out, const NetworkRun& run, const BoxSet& set) {
    out << "t,agent";
    for (std::size_t m = 1; m <= run.dim; ++m) out << ",x_" << m;
    out << ",loss,max_violation\n";
    for (std::size_t t = 0; t < run.horizon; ++t) {
        for (std::size_t i = 0; i < run.n_agents; ++i) {
            const Vector& x = run.points[i][t];
            out << (t + 1) << ',' << (i + 1);
            for (Eigen::Index m = 0; m < x.size(); ++m) out << ',' << format_double(x(m));
            out << ',' << format_double(run.losses[i][t]) << ',' << format_double(max_violation(x, set)) << '\n';
        }
    }
}

}  // namespace doco
