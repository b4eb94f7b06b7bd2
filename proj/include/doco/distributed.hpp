#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "doco/graph.hpp"
#include "doco/online.hpp"
#include "doco/problems.hpp"
#include "doco/rng.hpp"
#include "doco/types.hpp"

namespace doco {

/// Losses held by the agents of a network; rounds are 1-based.
class NetworkLoss {
public:
    virtual ~NetworkLoss() = default;
    virtual std::size_t n_agents() const = 0;
    virtual std::size_t dim() const = 0;
    virtual double value(std::size_t agent, std::size_t t, const Vector& x) const = 0;
    virtual Vector gradient(std::size_t agent, std::size_t t, const Vector& x) const = 0;
};

class SequenceNetworkLoss final : public NetworkLoss {
public:
    explicit SequenceNetworkLoss(const LossSequence& seq) : seq_(&seq) {}

    std::size_t n_agents() const override { return seq_->n_agents(); }
    std::size_t dim() const override { return seq_->dim(); }
    double value(std::size_t agent, std::size_t t, const Vector& x) const override {
        return loss_value(seq_->at(agent, t - 1), x);
    }
    Vector gradient(std::size_t agent, std::size_t t, const Vector& x) const override {
        return loss_gradient(seq_->at(agent, t - 1), x);
    }

private:
    const LossSequence* seq_;
};

/// The only loss access an agent's step gets: its own l_{i,t}.
class LocalLoss {
public:
    LocalLoss(const NetworkLoss& net, std::size_t agent) : net_(&net), agent_(agent) {}

    std::size_t agent() const { return agent_; }
    double value(std::size_t t, const Vector& x) const { return net_->value(agent_, t, x); }
    Vector gradient(std::size_t t, const Vector& x) const { return net_->gradient(agent_, t, x); }

private:
    const NetworkLoss* net_;
    std::size_t agent_;
};

enum class ConstraintMode {
    project_every_round,  // primal iterates projected onto the box X
    long_term,            // projected onto the R_X ball only; c_s handled by the duals
};

std::string to_string(ConstraintMode mode);
ConstraintMode parse_constraint_mode(const std::string& name);

/// Primal-dual update, per agent i and round t:
///   x_i <- P( m_i - alpha * (g_i + sum_s lambda_s grad c_s) ),  m_i = sum_j A_ij x_j
///   lambda_s <- [ (1 - theta gamma) lambda_s + gamma c_s(x_i) ]_+
/// where P is onto X (project_every_round) or the R_X ball (long_term), and in
/// bandit mode g_i is the one-point estimate and P targets the shrunk set.
struct DistributedParams {
    Feedback mode = Feedback::full;
    StepSchedule alpha = StepSchedule::inverse_sqrt(1.0);
    StepSchedule gamma = StepSchedule::inverse_sqrt(1.0);
    double theta = 1.0;
    double delta = 0.1;
    StepSchedule eta = StepSchedule::horizon_tuned(1.0, 0.75);
    ConstraintMode constraint_mode = ConstraintMode::long_term;
    BanditUpdateBase update_base = BanditUpdateBase::anchor;
    std::uint64_t seed = 0;

    void validate() const;
};

/// alpha_t = R_X / sqrt(t), gamma_t = 1 / sqrt(t), theta = 1; bandit delta = T^-1/4, eta = T^-3/4.
DistributedParams default_distributed_params(const BoxSet& set, Feedback mode, std::size_t horizon,
                                             std::uint64_t seed);

struct AgentState {
    Vector x;       // decision (full) or anchor (bandit)
    Vector lambda;  // one multiplier per c_s
};

/// output_i = sum_j w_ij points_j.
std::vector<Vector> consensus_mix(const Matrix& w, const std::vector<Vector>& points);

/// sum_s lambda_s grad c_s for the box inequalities (grad c_m = -e_m, grad c_{d+m} = +e_m).
Vector constraint_drift(const Vector& lambda, std::size_t dim);

Vector project_primal(const Vector& x, const BoxSet& set, ConstraintMode mode, double delta = 0.0);

Vector dual_update(const Vector& lambda, const Vector& x_new, const BoxSet& set, double gamma, double theta);

AgentState primal_dual_step_full(const Vector& mixed_x, const Vector& grad, const Vector& lambda, const BoxSet& set,
                                 double alpha, double gamma, double theta,
                                 ConstraintMode mode = ConstraintMode::project_every_round);

struct BanditStep {
    Vector played;
    double loss = 0.0;
    Vector estimate;
    AgentState next;
};

/// Plays mixed_anchor + delta r_in u, queries the oracle once, and steps the
/// anchor with the one-point estimate onto the shrunk set.
BanditStep primal_dual_step_bandit(const Vector& mixed_anchor, const std::function<double(const Vector&)>& loss_oracle,
                                   const Vector& lambda, const BoxSet& set, double delta, double eta, double gamma,
                                   double theta, Engine& rng,
                                   ConstraintMode mode = ConstraintMode::project_every_round,
                                   BanditUpdateBase base = BanditUpdateBase::anchor);

struct NetworkRun {
    Feedback mode = Feedback::full;
    std::size_t n_agents = 0;
    std::size_t horizon = 0;
    std::size_t dim = 0;
    std::vector<std::vector<Vector>> points;  // [agent][t] played x_i(t)
    std::vector<std::vector<double>> losses;  // [agent][t] l_{i,t}(x_i(t))
    std::vector<double> disagreement;         // [t] max pairwise |x_i(t) - x_j(t)|
    std::vector<double> max_dual;             // [t] largest multiplier after round t
};

/// Rejects weight matrices that are not doubly stochastic or put weight off the graph.
void check_weights_match_graph(const Graph& g, const Matrix& w);

/// T rounds of: play, experience l_{i,t}, mix neighbour decisions, local step.
/// The state for round t+1 is produced with alpha_t, gamma_t (and eta_t).
/// Agents start at the origin with zero duals; bandit agent i draws from
/// Engine(derive_seed(seed, i)).
NetworkRun run_distributed(const Graph& g, const Matrix& w, const NetworkLoss& losses, const BoxSet& set,
                           const DistributedParams& params, std::size_t horizon);

/// CSV: t,agent,x_1..x_d,loss,max_violation
void write_run_csv(std::ostream& out, const NetworkRun& run, const BoxSet& set);

}  // namespace doco
