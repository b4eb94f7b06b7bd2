#include "doco/problems.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "doco/format.hpp"
#include "doco/rng.hpp"

namespace doco {

namespace {

void check_dim(const Vector& x, std::size_t dim) {
    if (static_cast<std::size_t>(x.size()) != dim) {
        throw std::invalid_argument("dimension mismatch: expected " + std::to_string(dim) + ", got " +
                                    std::to_string(x.size()));
    }
}

}  // namespace

double loss_value(const QuadraticRegressionLoss& loss, const Vector& x) {
    check_dim(x, loss.dim());
    const double r = loss.a.dot(x) - loss.b;
    return 0.5 * r * r;
}

Vector loss_gradient(const QuadraticRegressionLoss& loss, const Vector& x) {
    check_dim(x, loss.dim());
    return loss.a * (loss.a.dot(x) - loss.b);
}

LossSequence::LossSequence(std::size_t n_agents, std::size_t horizon, std::size_t dim)
    : n_agents_(n_agents), horizon_(horizon), dim_(dim),
      losses_(n_agents * horizon, QuadraticRegressionLoss{Vector::Zero(static_cast<Eigen::Index>(dim)), 0.0}) {}

const QuadraticRegressionLoss& LossSequence::at(std::size_t agent, std::size_t t) const {
    if (agent >= n_agents_ || t >= horizon_) throw std::out_of_range("loss index out of range");
    return losses_[t * n_agents_ + agent];
}

QuadraticRegressionLoss& LossSequence::at(std::size_t agent, std::size_t t) {
    if (agent >= n_agents_ || t >= horizon_) throw std::out_of_range("loss index out of range");
    return losses_[t * n_agents_ + agent];
}

LossSequence LossSequence::prefix(std::size_t horizon) const {
    if (horizon > horizon_) throw std::out_of_range("prefix longer than sequence");
    LossSequence out(n_agents_, horizon, dim_);
    std::copy_n(losses_.begin(), horizon * n_agents_, out.losses_.begin());
    return out;
}

bool operator==(const LossSequence& x, const LossSequence& y) {
    if (x.n_agents_ != y.n_agents_ || x.horizon_ != y.horizon_ || x.dim_ != y.dim_) return false;
    for (std::size_t k = 0; k < x.losses_.size(); ++k) {
        if (x.losses_[k].b != y.losses_[k].b || x.losses_[k].a != y.losses_[k].a) return false;
    }
    return true;
}

LossSequence sample_regression_sequence(std::size_t n_agents, std::size_t dim, std::size_t horizon,
                                        std::uint64_t seed) {
    if (n_agents < 1 || dim < 1 || horizon < 1) throw std::invalid_argument("N, d and T must be at least 1");
    LossSequence seq(n_agents, horizon, dim);
    Engine rng(seed);
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t i = 0; i < n_agents; ++i) {
            auto& loss = seq.at(i, t);
            for (std::size_t m = 0; m < dim; ++m) loss.a(static_cast<Eigen::Index>(m)) = uniform(rng, -1.0, 1.0);
            loss.b = uniform01(rng);
        }
    }
    return seq;
}

void write_loss_csv(std::ostream& out, const LossSequence& seq) {
    out << "agent,t";
    for (std::size_t m = 1; m <= seq.dim(); ++m) out << ",a_" << m;
    out << ",b\n";
    for (std::size_t t = 0; t < seq.horizon(); ++t) {
        for (std::size_t i = 0; i < seq.n_agents(); ++i) {
            const auto& loss = seq.at(i, t);
            out << (i + 1) << ',' << (t + 1);
            for (Eigen::Index m = 0; m < loss.a.size(); ++m) out << ',' << format_double(loss.a(m));
            out << ',' << format_double(loss.b) << '\n';
        }
    }
}

LossSequence read_loss_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("loss CSV is empty");
    const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
    if (columns < 4) throw std::runtime_error("loss CSV header must be agent,t,a_1..a_d,b");
    const std::size_t dim = columns - 3;

    struct Row {
        std::size_t agent, t;
        QuadraticRegressionLoss loss;
    };
    std::vector<Row> rows;
    std::size_t n_agents = 0, horizon = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> fields;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) fields.push_back(std::stod(cell));
        if (fields.size() != columns) throw std::runtime_error("loss CSV row has wrong column count: " + line);
        if (fields[0] < 1 || fields[1] < 1) throw std::runtime_error("loss CSV indices are 1-based: " + line);
        Row row{static_cast<std::size_t>(fields[0]) - 1, static_cast<std::size_t>(fields[1]) - 1,
                {Vector(static_cast<Eigen::Index>(dim)), fields.back()}};
        for (std::size_t m = 0; m < dim; ++m) row.loss.a(static_cast<Eigen::Index>(m)) = fields[2 + m];
        n_agents = std::max(n_agents, row.agent + 1);
        horizon = std::max(horizon, row.t + 1);
        rows.push_back(std::move(row));
    }
    if (rows.size() != n_agents * horizon) throw std::runtime_error("loss CSV does not cover every (agent, t)");
    LossSequence seq(n_agents, horizon, dim);
    for (auto& row : rows) seq.at(row.agent, row.t) = std::move(row.loss);
    return seq;
}

BoxSet::BoxSet(std::size_t dim, double lower, double upper) : dim_(dim), lower_(lower), upper_(upper) {
    if (dim < 1) throw std::invalid_argument("box dimension must be at least 1");
    if (!(lower < upper)) throw std::invalid_argument("box requires L < U");
}

double BoxSet::radius() const {
    return std::sqrt(static_cast<double>(dim_)) * std::max(std::abs(lower_), std::abs(upper_));
}

double BoxSet::inradius() const { return std::max(0.0, std::min(-lower_, upper_)); }

bool BoxSet::contains(const Vector& x, double tol) const {
    check_dim(x, dim_);
    return (x.array() >= lower_ - tol).all() && (x.array() <= upper_ + tol).all();
}

Vector project_box(const Vector& x, const BoxSet& set) {
    check_dim(x, set.dim());
    return x.cwiseMax(set.lower()).cwiseMin(set.upper());
}

Vector constraint_values(const Vector& x, const BoxSet& set) {
    check_dim(x, set.dim());
    const auto d = static_cast<Eigen::Index>(set.dim());
    Vector c(2 * d);
    for (Eigen::Index m = 0; m < d; ++m) {
        c(m) = set.lower() - x(m);
        c(d + m) = x(m) - set.upper();
    }
    return c;
}

double max_violation(const Vector& x, const BoxSet& set) {
    return std::max(0.0, constraint_values(x, set).maxCoeff());
}

double total_violation(const Vector& x, const BoxSet& set) {
    return constraint_values(x, set).cwiseMax(0.0).sum();
}

Vector project_ball(const Vector& x, double radius) {
    const double norm = x.norm();
    if (norm <= radius) return x;
    return x * (radius / norm);
}

ShrunkSet::ShrunkSet(const BoxSet& base, double delta) : base_(base), delta_(delta) {}

bool ShrunkSet::contains(const Vector& x, double tol) const {
    check_dim(x, base_.dim());
    return (x.array() >= lower() - tol).all() && (x.array() <= upper() + tol).all();
}

Vector ShrunkSet::project(const Vector& x) const {
    check_dim(x, base_.dim());
    return x.cwiseMax(lower()).cwiseMin(upper());
}

ShrunkSet shrink_set(const BoxSet& set, double delta) {
    if (!set.contains_origin()) throw std::invalid_argument("shrinking requires a set containing the origin");
    if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in [0, 1)");
    return ShrunkSet(set, delta);
}

void DispatchProblem::validate() const {
    if (generators.empty()) throw std::invalid_argument("dispatch problem has no generators");
    double lo = 0.0, hi = 0.0;
    for (const auto& g : generators) {
        if (!(g.q > 0.0)) throw std::invalid_argument("generator cost must be strictly convex (q > 0)");
        if (!(g.min <= g.max)) throw std::invalid_argument("generator limits require min <= max");
        lo += g.min;
        hi += g.max;
    }
    if (!(lo <= demand && demand <= hi)) {
        throw std::invalid_argument("infeasible demand: " + format_double(demand) + " outside [" + format_double(lo) +
                                    ", " + format_double(hi) + "]");
    }
}

double DispatchProblem::total_cost(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != size()) throw std::invalid_argument("dimension mismatch");
    double c = 0.0;
    for (std::size_t i = 0; i < size(); ++i) c += generators[i].cost(x(static_cast<Eigen::Index>(i)));
    return c;
}

Vector dispatch_kkt_solution(const DispatchProblem& problem) {
    problem.validate();
    const auto n = static_cast<Eigen::Index>(problem.size());
    auto allocation = [&](double mu) {
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& g = problem.generators[static_cast<std::size_t>(i)];
            x(i) = std::clamp((mu - g.r) / (2.0 * g.q), g.min, g.max);
        }
        return x;
    };
    double lo = -1.0, hi = 1.0;
    while (allocation(lo).sum() > problem.demand) lo *= 2.0;
    while (allocation(hi).sum() < problem.demand) hi *= 2.0;
    for (int k = 0; k < 2000 && hi - lo > 0.0; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (allocation(mid).sum() < problem.demand ? lo : hi) = mid;
    }
    return allocation(0.5 * (lo + hi));
}

}  // namespace doco
