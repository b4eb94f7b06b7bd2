#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "doco/problems.hpp"
#include "doco/types.hpp"

namespace doco {

/// 0.5 x'Hx + l'x + constant.
struct Quadratic {
    Matrix hessian;
    Vector linear;
    double constant = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(linear.size()); }
    double value(const Vector& x) const { return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant; }

    static Quadratic zero(std::size_t dim);
};

/// Indicator of {z : sum_i z_i = total}; zero on the set.
struct SumIndicator {
    double total = 0.0;
};

struct CoordinateBox {
    Vector lower;
    Vector upper;
};

enum class DualUpdate {
    ascent,           // y <- y + alpha (Ax + Bz - c), consistent with +y'(Ax + Bz - c)
    literal_descent,  // y <- y - alpha (Ax + Bz - c)
};

/// min f(x) + g(z) s.t. Ax + Bz = c.
struct AdmmProblem {
    Quadratic f;
    /// Optional box on x. The x-subproblem must then be separable
    /// (H + alpha A'A diagonal) so the clamp is the exact minimiser.
    std::optional<CoordinateBox> x_box;
    std::variant<Quadratic, SumIndicator> g;
    Matrix A;
    Matrix B;
    Vector c;
    double alpha = 1.0;
    DualUpdate dual_update = DualUpdate::ascent;

    std::size_t x_dim() const { return static_cast<std::size_t>(A.cols()); }
    std::size_t z_dim() const { return static_cast<std::size_t>(B.cols()); }
    void validate() const;
};

struct AdmmState {
    Vector x;
    Vector z;
    Vector y;
    std::size_t iterate = 0;
    std::vector<double> primal_residuals;
    std::vector<double> dual_residuals;
    bool converged = false;

    static AdmmState zeros(const AdmmProblem& problem);
};

/// f(x) + g(z) + y'(Ax+Bz-c) + (alpha/2)|Ax+Bz-c|^2; +inf when z violates an indicator g.
double augmented_lagrangian(const AdmmProblem& problem, const Vector& x, const Vector& z, const Vector& y);

/// argmin_x L(x, z, y).
Vector admm_x_update(const AdmmProblem& problem, const Vector& z, const Vector& y);
/// argmin_z L(x, z, y).
Vector admm_z_update(const AdmmProblem& problem, const Vector& x, const Vector& y);

/// Sequential x -> z -> y sweeps until both residuals drop below tol or
/// max_iters is reached. The dual residual is alpha |B (z_k+1 - z_k)|.
AdmmState admm_solve(const AdmmProblem& problem, AdmmState init, std::size_t max_iters, double tol);

struct DispatchResult {
    Vector allocations;
    AdmmState state;
    std::vector<Vector> trace;  // x after each iteration
};

/// Sharing-form ADMM for economic dispatch: x_i = z_i coupled by sum z_i = demand.
/// The x-step is a per-generator prox clamped to its limits, the z-step is the
/// projection onto the demand hyperplane, and the dual step is per-generator.
DispatchResult dispatch_admm(const DispatchProblem& problem, double alpha, std::size_t max_iters, double tol,
                             DualUpdate dual_update = DualUpdate::ascent);

/// The same dispatch problem written as a generic AdmmProblem (A = I, B = -I, c = 0).
AdmmProblem dispatch_as_admm(const DispatchProblem& problem, double alpha);

void write_residual_csv(std::ostream& out, const AdmmState& state);
void write_dispatch_csv(std::ostream& out, const DispatchProblem& problem, const Vector& allocations);

}  // namespace doco
