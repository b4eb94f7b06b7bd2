#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "doco/types.hpp"

namespace doco {

/// l(x) = (a'x - b)^2 / 2.
struct QuadraticRegressionLoss {
    Vector a;
    double b = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(a.size()); }
};

double loss_value(const QuadraticRegressionLoss& loss, const Vector& x);
Vector loss_gradient(const QuadraticRegressionLoss& loss, const Vector& x);

/// Per-agent, per-round losses. Agents and rounds are 0-based in code and
/// 1-based in CSV files.
class LossSequence {
public:
    LossSequence() = default;
    LossSequence(std::size_t n_agents, std::size_t horizon, std::size_t dim);

    std::size_t n_agents() const { return n_agents_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t dim() const { return dim_; }

    const QuadraticRegressionLoss& at(std::size_t agent, std::size_t t) const;
    QuadraticRegressionLoss& at(std::size_t agent, std::size_t t);

    /// First `horizon` rounds of this sequence.
    LossSequence prefix(std::size_t horizon) const;

    friend bool operator==(const LossSequence& x, const LossSequence& y);

private:
    std::size_t n_agents_ = 0;
    std::size_t horizon_ = 0;
    std::size_t dim_ = 0;
    std::vector<QuadraticRegressionLoss> losses_;  // round-major
};

/// Entries of a_i(t) i.i.d. U[-1, 1]; b_i(t) i.i.d. U[0, 1].
LossSequence sample_regression_sequence(std::size_t n_agents, std::size_t dim, std::size_t horizon,
                                        std::uint64_t seed);

/// CSV header: agent,t,a_1..a_d,b
void write_loss_csv(std::ostream& out, const LossSequence& seq);
LossSequence read_loss_csv(std::istream& in);

/// Box [L, U]^d written as p = 2d inequalities c_s(x) <= 0:
/// c_m(x) = L - x_m for m < d, then c_{d+m}(x) = x_m - U.
class BoxSet {
public:
    BoxSet(std::size_t dim, double lower, double upper);

    std::size_t dim() const { return dim_; }
    std::size_t constraint_count() const { return 2 * dim_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    /// Radius of the smallest origin-centred ball containing the box (U*sqrt(d) when L = -U).
    double radius() const;
    /// min(-L, U): radius of the largest origin-centred ball inside the box.
    double inradius() const;
    bool contains_origin() const { return lower_ <= 0.0 && upper_ >= 0.0; }
    bool contains(const Vector& x, double tol = 0.0) const;

private:
    std::size_t dim_;
    double lower_;
    double upper_;
};

Vector project_box(const Vector& x, const BoxSet& set);
Vector constraint_values(const Vector& x, const BoxSet& set);
/// max_s [c_s(x)]_+
double max_violation(const Vector& x, const BoxSet& set);
/// sum_s [c_s(x)]_+
double total_violation(const Vector& x, const BoxSet& set);

Vector project_ball(const Vector& x, double radius);

/// X_delta = {x : x/(1-delta) in X}; for a box this is [(1-delta)L, (1-delta)U]^d.
class ShrunkSet {
public:
    ShrunkSet(const BoxSet& base, double delta);

    const BoxSet& base() const { return base_; }
    double delta() const { return delta_; }
    double lower() const { return (1.0 - delta_) * base_.lower(); }
    double upper() const { return (1.0 - delta_) * base_.upper(); }
    bool contains(const Vector& x, double tol = 0.0) const;
    Vector project(const Vector& x) const;

private:
    BoxSet base_;
    double delta_;
};

/// Rejects boxes that do not contain the origin and delta outside [0, 1).
ShrunkSet shrink_set(const BoxSet& set, double delta);

/// Quadratic generation cost q x^2 + r x + s on [min, max].
struct Generator {
    double q = 1.0;
    double r = 0.0;
    double s = 0.0;
    double min = -std::numeric_limits<double>::infinity();
    double max = std::numeric_limits<double>::infinity();

    double cost(double x) const { return (q * x + r) * x + s; }
};

struct DispatchProblem {
    std::vector<Generator> generators;
    double demand = 0.0;

    std::size_t size() const { return generators.size(); }
    /// Throws std::invalid_argument on q <= 0, min > max, or infeasible demand.
    void validate() const;
    double total_cost(const Vector& x) const;
};

/// Water-filling on the KKT conditions: x_i = clamp((mu - r_i) / (2 q_i), min_i, max_i)
/// with mu found by bisection so that sum x_i = demand.
Vector dispatch_kkt_solution(const DispatchProblem& problem);

}  // namespace doco
