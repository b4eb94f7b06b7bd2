#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "doco/distributed.hpp"
#include "doco/online.hpp"
#include "doco/problems.hpp"
#include "doco/types.hpp"

namespace doco {

/// sum of (a'x - b)^2 / 2 over a set of losses, as 0.5 x'Hx - g'x + c.
struct AggregateQuadratic {
    Matrix hessian;
    Vector linear;  // g = sum a b
    double constant = 0.0;
    std::size_t terms = 0;

    explicit AggregateQuadratic(std::size_t dim);
    void add(const QuadraticRegressionLoss& loss);
    double value(const Vector& x) const { return 0.5 * x.dot(hessian * x) - linear.dot(x) + constant; }
    Vector gradient(const Vector& x) const { return hessian * x - linear; }
};

AggregateQuadratic aggregate_all(const LossSequence& losses);
/// Round t is 1-based.
AggregateQuadratic aggregate_round(const LossSequence& losses, std::size_t t);

struct OracleResult {
    Vector x;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Box-constrained minimiser of q by accelerated projected gradient with
/// step 1/L (L from power iteration on the mean Hessian). Stops when the
/// gradient-mapping norm of the mean objective is <= tol.
OracleResult minimize_over_box(const AggregateQuadratic& q, const BoxSet& set, double tol,
                               std::size_t max_iters = 200000);

/// Static comparator: argmin over X of sum_t sum_j l_{j,t}(x).
OracleResult offline_oracle(const LossSequence& losses, const BoxSet& set, double tol = 1e-10);
/// argmin over X of sum_i l_{i,t}(x), t 1-based.
OracleResult per_round_oracle(const LossSequence& losses, std::size_t t, const BoxSet& set, double tol = 1e-10);
std::vector<Vector> per_round_oracles(const LossSequence& losses, const BoxSet& set, double tol = 1e-10);

/// [agent][t]: sum_{tau <= t} sum_j l_{j,tau}(x_agent(tau)).
std::vector<std::vector<double>> cumulative_system_loss(const NetworkRun& run, const LossSequence& losses);

/// [t]: sum_{tau <= t} sum_j l_{j,tau}(x*).
std::vector<double> comparator_cumulative_loss(const LossSequence& losses, std::size_t horizon, const Vector& x_star);

/// SReg(t) for every prefix t, against the fixed comparator x_star.
std::vector<double> system_regret(const NetworkRun& run, const LossSequence& losses, const Vector& x_star);

/// CACV(t) = sum_{tau <= t} sum_i sum_s [c_s(x_i(tau))]_+ for every prefix.
std::vector<double> cacv(const NetworkRun& run, const BoxSet& set);

/// Wraps a single-learner trajectory as a one-agent network run.
NetworkRun single_agent_run(const Trajectory& traj, Feedback mode = Feedback::full);

struct MetricsTrace {
    std::size_t horizon = 0;
    std::vector<double> sreg;
    std::vector<double> cacv;
    std::vector<double> asr;
    std::vector<double> acv;
    Vector x_star;
    std::vector<Vector> x_star_t;
};

MetricsTrace compute_metrics(const NetworkRun& run, const LossSequence& losses, const BoxSet& set,
                             const Vector& x_star);

/// Population standard deviation of each coordinate over the last ceil(window * T) entries.
Vector stationarity_stats(const std::vector<Vector>& series, double window = 0.5);

/// Least-squares slope of log(ys) against log(xs).
double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// CSV: T,sreg,cacv,asr,acv (rows are the given 1-based horizons, or every t when empty).
void write_metrics_csv(std::ostream& out, const MetricsTrace& trace, const std::vector<std::size_t>& rows = {});

struct StationarityRow {
    std::string series;
    std::size_t coord = 0;  // 1-based
    double std = 0.0;
};
/// CSV: series_name,coord,std
void write_stationarity_csv(std::ostream& out, const std::vector<StationarityRow>& rows);

}  // namespace doco
