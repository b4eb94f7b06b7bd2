#include <doctest.h>

#include <sstream>

#include "doco/admm.hpp"
#include "doco/rng.hpp"

using namespace doco;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
Vector vec1(double v) { return Vector::Constant(1, v); }

// (x - 1)^2 + (z - 2)^2 s.t. x - z = 0.
AdmmProblem toy(double alpha) {
    AdmmProblem p;
    p.f = Quadratic{scalar(2), vec1(-2), 1.0};
    p.g = Quadratic{scalar(2), vec1(-4), 4.0};
    p.A = scalar(1);
    p.B = scalar(-1);
    p.c = vec1(0);
    p.alpha = alpha;
    return p;
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) out(k++) = x;
    return out;
}

DispatchProblem random_dispatch(Engine& rng, int n) {
    DispatchProblem p;
    double lo = 0, hi = 0;
    for (int i = 0; i < n; ++i) {
        Generator g{uniform(rng, 0.2, 2.0), uniform(rng, -1, 1), uniform(rng, 0, 1)};
        g.min = uniform(rng, 0.0, 1.0);
        g.max = g.min + uniform(rng, 0.5, 3.0);
        lo += g.min;
        hi += g.max;
        p.generators.push_back(g);
    }
    p.demand = uniform(rng, lo, hi);
    return p;
}

}  // namespace

TEST_CASE("augmented Lagrangian by hand") {
    const auto p = toy(2.0);
    CHECK(augmented_lagrangian(p, vec1(0), vec1(0), vec1(0)) == 5.0);
    CHECK(augmented_lagrangian(p, vec1(1), vec1(0), vec1(1)) == 6.0);
    // Feasible points: the multiplier and penalty terms vanish.
    CHECK(augmented_lagrangian(p, vec1(0.7), vec1(0.7), vec1(-13)) ==
          doctest::Approx(0.3 * 0.3 + 1.3 * 1.3).epsilon(1e-14));
}

TEST_CASE("toy QP converges to 1.5 for several penalties") {
    for (double alpha : {0.5, 1.0, 2.0}) {
        const auto p = toy(alpha);
        const auto s = admm_solve(p, AdmmState::zeros(p), 5000, 1e-9);
        CHECK(s.converged);
        CHECK(s.iterate < 5000);
        CHECK(std::abs(s.x(0) - 1.5) <= 1e-6);
        CHECK(std::abs(s.z(0) - 1.5) <= 1e-6);
        REQUIRE_FALSE(s.primal_residuals.empty());
        CHECK(s.primal_residuals.back() <= 1e-9);
        CHECK(s.dual_residuals.back() <= 1e-9);
    }
}

TEST_CASE("zero objective is a fixed point") {
    AdmmProblem p;
    p.f = Quadratic::zero(2);
    p.g = Quadratic::zero(2);
    p.A = Matrix::Identity(2, 2);
    p.B = -Matrix::Identity(2, 2);
    p.c = Vector::Zero(2);
    const auto s = admm_solve(p, AdmmState::zeros(p), 100, 1e-12);
    CHECK(s.converged);
    CHECK(s.iterate == 1);
    CHECK(s.primal_residuals.front() == 0.0);
    CHECK(s.x.isZero(0.0));
}

TEST_CASE("literal descent flag runs and is recorded in the state") {
    auto p = toy(1.0);
    p.dual_update = DualUpdate::literal_descent;
    const auto s = admm_solve(p, AdmmState::zeros(p), 200, 1e-9);
    CHECK(s.iterate >= 1);
    CHECK(s.primal_residuals.size() == s.iterate);
}

TEST_CASE("problem validation") {
    auto p = toy(1.0);
    p.alpha = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = toy(1.0);
    p.c = Vector::Zero(2);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("dispatch fixtures") {
    SUBCASE("symmetric") {
        DispatchProblem p{{Generator{1, 0, 0}, Generator{1, 0, 0}}, 10.0};
        const auto r = dispatch_admm(p, 1.0, 10000, 1e-10);
        CHECK(r.state.converged);
        CHECK((r.allocations - vec({5, 5})).cwiseAbs().maxCoeff() <= 1e-4);
    }
    SUBCASE("unequal costs") {
        DispatchProblem p{{Generator{1, 0, 0}, Generator{3, 0, 0}}, 4.0};
        const auto r = dispatch_admm(p, 1.0, 10000, 1e-10);
        CHECK((r.allocations - vec({3, 1})).cwiseAbs().maxCoeff() <= 1e-4);
    }
    SUBCASE("active upper limit") {
        Generator capped{1, 0, 0};
        capped.max = 4.0;
        DispatchProblem p{{capped, Generator{1, 0, 0}}, 10.0};
        const auto r = dispatch_admm(p, 1.0, 10000, 1e-10);
        CHECK((r.allocations - vec({4, 6})).cwiseAbs().maxCoeff() <= 1e-4);
    }
}

TEST_CASE("dispatch matches KKT on random instances and is locally optimal") {
    Engine rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 9;
        const auto p = random_dispatch(rng, n);
        const auto r = dispatch_admm(p, 1.0, 20000, 1e-10);
        const Vector kkt = dispatch_kkt_solution(p);
        CHECK(r.state.converged);
        CHECK((r.allocations - kkt).cwiseAbs().maxCoeff() <= 1e-4);
        CHECK(std::abs(r.allocations.sum() - p.demand) <= 1e-6);

        // Moving 1e-4 between any feasible pair cannot lower the cost.
        const Vector& x = kkt;
        const double base = p.total_cost(x);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                Vector y = x;
                y(i) += 1e-4;
                y(j) -= 1e-4;
                if (y(i) > p.generators[i].max || y(j) < p.generators[j].min) continue;
                CHECK(p.total_cost(y) >= base - 1e-12);
            }
        }
    }
}

TEST_CASE("generic ADMM formulation agrees with the sharing form") {
    DispatchProblem p{{Generator{1, 0.5, 0}, Generator{2, -0.3, 0}, Generator{0.5, 0, 1}}, 3.0};
    const auto problem = dispatch_as_admm(p, 1.0);
    const auto s = admm_solve(problem, AdmmState::zeros(problem), 20000, 1e-10);
    CHECK(s.converged);
    CHECK((s.x - dispatch_kkt_solution(p)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((s.z - dispatch_kkt_solution(p)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("dispatch rejects bad inputs") {
    DispatchProblem infeasible{{Generator{1, 0, 0, 0, 1}, Generator{1, 0, 0, 0, 1}}, 5.0};
    CHECK_THROWS_AS(dispatch_admm(infeasible, 1.0, 100, 1e-8), std::invalid_argument);
    DispatchProblem ok{{Generator{1, 0, 0}, Generator{1, 0, 0}}, 1.0};
    CHECK_THROWS_AS(dispatch_admm(ok, 0.0, 100, 1e-8), std::invalid_argument);
}

TEST_CASE("dispatch and residual CSV") {
    DispatchProblem p{{Generator{1, 0, 0}, Generator{3, 0, 0}}, 4.0};
    const auto r = dispatch_admm(p, 1.0, 10000, 1e-10);
    std::stringstream s;
    write_residual_csv(s, r.state);
    std::string header;
    std::getline(s, header);
    CHECK(header == "iter,primal_residual,dual_residual");
    std::size_t rows = 0;
    for (std::string line; std::getline(s, line);) ++rows;
    CHECK(rows == r.state.iterate);
}
