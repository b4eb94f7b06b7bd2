#include "doco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "doco/format.hpp"

namespace doco {

AggregateQuadratic::AggregateQuadratic(std::size_t dim)
    : hessian(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))),
      linear(Vector::Zero(static_cast<Eigen::Index>(dim))) {}

void AggregateQuadratic::add(const QuadraticRegressionLoss& loss) {
    hessian.noalias() += loss.a * loss.a.transpose();
    linear += loss.b * loss.a;
    constant += 0.5 * loss.b * loss.b;
    ++terms;
}

AggregateQuadratic aggregate_all(const LossSequence& losses) {
    AggregateQuadratic q(losses.dim());
    for (std::size_t t = 0; t < losses.horizon(); ++t)
        for (std::size_t i = 0; i < losses.n_agents(); ++i) q.add(losses.at(i, t));
    return q;
}

AggregateQuadratic aggregate_round(const LossSequence& losses, std::size_t t) {
    if (t < 1 || t > losses.horizon()) throw std::out_of_range("round index out of range");
    AggregateQuadratic q(losses.dim());
    for (std::size_t i = 0; i < losses.n_agents(); ++i) q.add(losses.at(i, t - 1));
    return q;
}

namespace {

double largest_eigenvalue(const Matrix& h) {
    Vector v = Vector::Ones(h.rows()) / std::sqrt(static_cast<double>(h.rows()));
    double lambda = 0.0;
    for (int k = 0; k < 500; ++k) {
        const Vector hv = h * v;
        const double norm = hv.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(hv);
        v = hv / norm;
        if (std::abs(next - lambda) <= 1e-14 * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

}  // namespace

OracleResult minimize_over_box(const AggregateQuadratic& q, const BoxSet& set, double tol, std::size_t max_iters) {
    if (q.terms == 0) throw std::invalid_argument("oracle needs at least one loss");
    const double inv_terms = 1.0 / static_cast<double>(q.terms);
    const Matrix h = q.hessian * inv_terms;
    const Vector g = q.linear * inv_terms;
    // Rayleigh quotients under-estimate the top eigenvalue; inflate slightly.
    const double lip = std::max(largest_eigenvalue(h) * 1.01, 1e-12);

    auto grad = [&](const Vector& x) -> Vector { return h * x - g; };
    OracleResult res;
    Vector x = project_box(Vector::Zero(static_cast<Eigen::Index>(set.dim())), set);
    Vector y = x;
    double momentum = 1.0;
    for (std::size_t k = 0; k < max_iters; ++k) {
        const Vector x_next = project_box(y - grad(y) / lip, set);
        const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = x_next + ((momentum - 1.0) / m_next) * (x_next - x);
        x = x_next;
        momentum = m_next;
        res.iterations = k + 1;
        const double mapping = lip * (x - project_box(x - grad(x) / lip, set)).norm();
        if (mapping <= tol) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.objective = q.value(x);
    return res;
}

OracleResult offline_oracle(const LossSequence& losses, const BoxSet& set, double tol) {
    return minimize_over_box(aggregate_all(losses), set, tol);
}

OracleResult per_round_oracle(const LossSequence& losses, std::size_t t, const BoxSet& set, double tol) {
    return minimize_over_box(aggregate_round(losses, t), set, tol);
}

std::vector<Vector> per_round_oracles(const LossSequence& losses, const BoxSet& set, double tol) {
    std::vector<Vector> out;
    out.reserve(losses.horizon());
    for (std::size_t t = 1; t <= losses.horizon(); ++t) {
        auto res = per_round_oracle(losses, t, set, tol);
        if (!res.converged) throw std::runtime_error("per-round oracle did not converge at t=" + std::to_string(t));
        out.push_back(std::move(res.x));
    }
    return out;
}

namespace {

double system_loss(const LossSequence& losses, std::size_t t0, const Vector& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < losses.n_agents(); ++j) s += loss_value(losses.at(j, t0), x);
    return s;
}

}  // namespace

std::vector<std::vector<double>> cumulative_system_loss(const NetworkRun& run, const LossSequence& losses) {
    if (losses.horizon() < run.horizon) throw std::invalid_argument("losses shorter than the run");
    std::vector<std::vector<double>> out(run.n_agents, std::vector<double>(run.horizon));
    for (std::size_t i = 0; i < run.n_agents; ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < run.horizon; ++t) {
            acc += system_loss(losses, t, run.points[i][t]);
            out[i][t] = acc;
        }
    }
    return out;
}

std::vector<double> comparator_cumulative_loss(const LossSequence& losses, std::size_t horizon, const Vector& x_star) {
    std::vector<double> out(horizon);
    double acc = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        acc += system_loss(losses, t, x_star);
        out[t] = acc;
    }
    return out;
}

std::vector<double> system_regret(const NetworkRun& run, const LossSequence& losses, const Vector& x_star) {
    const auto agent_loss = cumulative_system_loss(run, losses);
    const auto star = comparator_cumulative_loss(losses, run.horizon, x_star);
    std::vector<double> sreg(run.horizon);
    for (std::size_t t = 0; t < run.horizon; ++t) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < run.n_agents; ++i) worst = std::max(worst, agent_loss[i][t]);
        sreg[t] = worst - star[t];
    }
    return sreg;
}

std::vector<double> cacv(const NetworkRun& run, const BoxSet& set) {
    std::vector<double> out(run.horizon);
    double acc = 0.0;
    for (std::size_t t = 0; t < run.horizon; ++t) {
        for (std::size_t i = 0; i < run.n_agents; ++i) acc += total_violation(run.points[i][t], set);
        out[t] = acc;
    }
    return out;
}

NetworkRun single_agent_run(const Trajectory& traj, Feedback mode) {
    NetworkRun run;
    run.mode = mode;
    run.n_agents = 1;
    run.horizon = traj.points.size();
    run.dim = traj.points.empty() ? 0 : static_cast<std::size_t>(traj.points.front().size());
    run.points = {traj.points};
    run.losses = {traj.losses};
    run.disagreement.assign(run.horizon, 0.0);
    return run;
}

MetricsTrace compute_metrics(const NetworkRun& run, const LossSequence& losses, const BoxSet& set,
                             const Vector& x_star) {
    MetricsTrace m;
    m.horizon = run.horizon;
    m.x_star = x_star;
    m.sreg = system_regret(run, losses, x_star);
    m.cacv = cacv(run, set);
    m.asr.resize(run.horizon);
    m.acv.resize(run.horizon);
    for (std::size_t t = 0; t < run.horizon; ++t) {
        m.asr[t] = m.sreg[t] / static_cast<double>(t + 1);
        m.acv[t] = m.cacv[t] / static_cast<double>(t + 1);
    }
    return m;
}

Vector stationarity_stats(const std::vector<Vector>& series, double window) {
    if (series.empty()) throw std::invalid_argument("stationarity needs a non-empty series");
    if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("window must lie in (0, 1]");
    const auto total = series.size();
    const auto count = std::min<std::size_t>(
        total, static_cast<std::size_t>(std::ceil(window * static_cast<double>(total))));
    const auto start = total - count;
    const auto dim = series.front().size();
    // Shifted by the first window entry so a constant series gives exactly 0.
    const Vector& pivot = series[start];
    Vector mean = Vector::Zero(dim);
    for (std::size_t k = start; k < total; ++k) mean += series[k] - pivot;
    mean /= static_cast<double>(count);
    Vector var = Vector::Zero(dim);
    for (std::size_t k = start; k < total; ++k) var += (series[k] - pivot - mean).cwiseAbs2();
    return (var / static_cast<double>(count)).cwiseSqrt();
}

double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("slope needs two or more points");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += std::log(xs[k]);
        my += std::log(ys[k]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double dx = std::log(xs[k]) - mx;
        sxy += dx * (std::log(ys[k]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

void write_metrics_csv(std::ostream& out, const MetricsTrace& trace, const std::vector<std::size_t>& rows) {
    out << "T,sreg,cacv,asr,acv\n";
    auto emit = [&](std::size_t t) {
        const auto k = t - 1;
        out << t << ',' << format_double(trace.sreg.at(k)) << ',' << format_double(trace.cacv.at(k)) << ','
            << format_double(trace.asr.at(k)) << ',' << format_double(trace.acv.at(k)) << '\n';
    };
    if (rows.empty()) {
        for (std::size_t t = 1; t <= trace.horizon; ++t) emit(t);
    } else {
        for (auto t : rows) emit(t);
    }
}

void write_stationarity_csv(std::ostream& out, const std::vector<StationarityRow>& rows) {
    out << "series_name,coord,std\n";
    for (const auto& r : rows) out << r.series << ',' << r.coord << ',' << format_double(r.std) << '\n';
}

}  // namespace doco
