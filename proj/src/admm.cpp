#include "doco/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "doco/format.hpp"

namespace doco {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double indicator_tolerance(double total) { return 1e-9 * std::max(1.0, std::abs(total)); }

void step_dual(Vector& y, const Vector& residual, double alpha, DualUpdate rule) {
    if (rule == DualUpdate::ascent) {
        y += alpha * residual;
    } else {
        y -= alpha * residual;
    }
}

}  // namespace

Quadratic Quadratic::zero(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return {Matrix::Zero(n, n), Vector::Zero(n), 0.0};
}

void AdmmProblem::validate() const {
    const auto k = c.size();
    if (A.rows() != k || B.rows() != k) throw std::invalid_argument("A, B and c must have the same row count");
    const auto n = A.cols();
    if (f.hessian.rows() != n || f.hessian.cols() != n || f.linear.size() != n) {
        throw std::invalid_argument("f dimensions do not match A");
    }
    if (const auto* gq = std::get_if<Quadratic>(&g)) {
        const auto m = B.cols();
        if (gq->hessian.rows() != m || gq->hessian.cols() != m || gq->linear.size() != m) {
            throw std::invalid_argument("g dimensions do not match B");
        }
    }
    if (x_box && (x_box->lower.size() != n || x_box->upper.size() != n)) {
        throw std::invalid_argument("x box dimensions do not match A");
    }
    if (!(alpha > 0.0)) throw std::invalid_argument("penalty alpha must be positive");
}

AdmmState AdmmState::zeros(const AdmmProblem& problem) {
    AdmmState s;
    s.x = Vector::Zero(problem.A.cols());
    s.z = Vector::Zero(problem.B.cols());
    s.y = Vector::Zero(problem.c.size());
    return s;
}

double augmented_lagrangian(const AdmmProblem& problem, const Vector& x, const Vector& z, const Vector& y) {
    problem.validate();
    if (x.size() != problem.A.cols() || z.size() != problem.B.cols() || y.size() != problem.c.size()) {
        throw std::invalid_argument("dimension mismatch in augmented Lagrangian");
    }
    if (problem.x_box) {
        if ((x.array() < problem.x_box->lower.array()).any() || (x.array() > problem.x_box->upper.array()).any()) {
            return std::numeric_limits<double>::infinity();
        }
    }
    const double gz = std::visit(overloaded{
                                     [&](const Quadratic& q) { return q.value(z); },
                                     [&](const SumIndicator& ind) {
                                         return std::abs(z.sum() - ind.total) <= indicator_tolerance(ind.total)
                                                    ? 0.0
                                                    : std::numeric_limits<double>::infinity();
                                     },
                                 },
                                 problem.g);
    const Vector r = problem.A * x + problem.B * z - problem.c;
    return problem.f.value(x) + gz + y.dot(r) + 0.5 * problem.alpha * r.squaredNorm();
}

Vector admm_x_update(const AdmmProblem& problem, const Vector& z, const Vector& y) {
    const auto& A = problem.A;
    const double alpha = problem.alpha;
    const Matrix M = problem.f.hessian + alpha * A.transpose() * A;
    const Vector rhs = -problem.f.linear - A.transpose() * y - alpha * A.transpose() * (problem.B * z - problem.c);
    if (problem.x_box) {
        const Matrix off = M - Matrix(M.diagonal().asDiagonal());
        if (off.cwiseAbs().maxCoeff() > 0.0) {
            throw std::invalid_argument("boxed x-update needs a separable (diagonal) subproblem");
        }
        Vector x = rhs.cwiseQuotient(M.diagonal());
        return x.cwiseMax(problem.x_box->lower).cwiseMin(problem.x_box->upper);
    }
    Eigen::LDLT<Matrix> ldlt(M);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw std::runtime_error("x-update subproblem is not positive definite");
    }
    return ldlt.solve(rhs);
}

Vector admm_z_update(const AdmmProblem& problem, const Vector& x, const Vector& y) {
    const auto& B = problem.B;
    const double alpha = problem.alpha;
    const Vector shift = problem.A * x - problem.c;
    return std::visit(
        overloaded{
            [&](const Quadratic& q) -> Vector {
                const Matrix M = q.hessian + alpha * B.transpose() * B;
                const Vector rhs = -q.linear - B.transpose() * y - alpha * B.transpose() * shift;
                Eigen::LDLT<Matrix> ldlt(M);
                if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
                    throw std::runtime_error("z-update subproblem is not positive definite");
                }
                return ldlt.solve(rhs);
            },
            [&](const SumIndicator& ind) -> Vector {
                // Equality-constrained least squares via its KKT system.
                const auto m = B.cols();
                Matrix K = Matrix::Zero(m + 1, m + 1);
                K.topLeftCorner(m, m) = alpha * B.transpose() * B;
                K.block(0, m, m, 1).setOnes();
                K.block(m, 0, 1, m).setOnes();
                Vector rhs(m + 1);
                rhs.head(m) = -B.transpose() * y - alpha * B.transpose() * shift;
                rhs(m) = ind.total;
                const Vector sol = K.fullPivLu().solve(rhs);
                return sol.head(m);
            },
        },
        problem.g);
}

AdmmState admm_solve(const AdmmProblem& problem, AdmmState state, std::size_t max_iters, double tol) {
    problem.validate();
    state.converged = false;
    for (std::size_t k = 0; k < max_iters; ++k) {
        const Vector z_prev = state.z;
        state.x = admm_x_update(problem, state.z, state.y);
        state.z = admm_z_update(problem, state.x, state.y);
        const Vector r = problem.A * state.x + problem.B * state.z - problem.c;
        step_dual(state.y, r, problem.alpha, problem.dual_update);
        ++state.iterate;
        const double primal = r.norm();
        const double dual = problem.alpha * (problem.B * (state.z - z_prev)).norm();
        state.primal_residuals.push_back(primal);
        state.dual_residuals.push_back(dual);
        if (primal < tol && dual < tol) {
            state.converged = true;
            break;
        }
    }
    return state;
}

DispatchResult dispatch_admm(const DispatchProblem& problem, double alpha, std::size_t max_iters, double tol,
                             DualUpdate dual_update) {
    problem.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("penalty alpha must be positive");
    const auto n = static_cast<Eigen::Index>(problem.size());

    DispatchResult out;
    auto& s = out.state;
    s.x = Vector::Zero(n);
    s.y = Vector::Zero(n);
    s.z = Vector::Constant(n, problem.demand / static_cast<double>(n));

    for (std::size_t k = 0; k < max_iters; ++k) {
        // Per-generator prox steps; independent across i.
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& g = problem.generators[static_cast<std::size_t>(i)];
            const double unclamped = (alpha * s.z(i) - g.r - s.y(i)) / (2.0 * g.q + alpha);
            s.x(i) = std::clamp(unclamped, g.min, g.max);
        }
        // Barrier: projection of x + y/alpha onto {sum z = demand}.
        const Vector z_prev = s.z;
        const Vector v = s.x + s.y / alpha;
        s.z = v.array() - (v.sum() - problem.demand) / static_cast<double>(n);

        const Vector r = s.x - s.z;
        step_dual(s.y, r, alpha, dual_update);
        ++s.iterate;
        const double primal = r.norm();
        const double dual = alpha * (s.z - z_prev).norm();
        s.primal_residuals.push_back(primal);
        s.dual_residuals.push_back(dual);
        out.trace.push_back(s.x);
        if (primal < tol && dual < tol) {
            s.converged = true;
            break;
        }
    }
    out.allocations = s.x;
    return out;
}

AdmmProblem dispatch_as_admm(const DispatchProblem& problem, double alpha) {
    problem.validate();
    const auto n = static_cast<Eigen::Index>(problem.size());
    AdmmProblem p;
    p.f = Quadratic::zero(problem.size());
    CoordinateBox box{Vector(n), Vector(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& g = problem.generators[static_cast<std::size_t>(i)];
        p.f.hessian(i, i) = 2.0 * g.q;
        p.f.linear(i) = g.r;
        p.f.constant += g.s;
        box.lower(i) = g.min;
        box.upper(i) = g.max;
    }
    p.x_box = box;
    p.g = SumIndicator{problem.demand};
    p.A = Matrix::Identity(n, n);
    p.B = -Matrix::Identity(n, n);
    p.c = Vector::Zero(n);
    p.alpha = alpha;
    return p;
}

void write_residual_csv(std::ostream& out, const AdmmState& state) {
    out << "iter,primal_residual,dual_residual\n";
    for (std::size_t k = 0; k < state.primal_residuals.size(); ++k) {
        out << (k + 1) << ',' << format_double(state.primal_residuals[k]) << ','
            << format_double(state.dual_residuals[k]) << '\n';
    }
}

void write_dispatch_csv(std::ostream& out, const DispatchProblem& problem, const Vector& allocations) {
    out << "generator,allocation,cost\n";
    for (std::size_t i = 0; i < problem.size(); ++i) {
        const double x = allocations(static_cast<Eigen::Index>(i));
        out << (i + 1) << ',' << format_double(x) << ',' << format_double(problem.generators[i].cost(x)) << '\n';
    }
}

}  // namespace doco
