#include <doctest.h>

#include <sstream>

#include "doco/metrics.hpp"
#include "doco/online.hpp"

using namespace doco;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) out(k++) = x;
    return out;
}

class ShiftedSquare final : public OnlineLoss {
public:
    explicit ShiftedSquare(double center) : center_(center) {}
    std::size_t dim() const override { return 1; }
    double value(std::size_t, const Vector& x) const override { return (x(0) - center_) * (x(0) - center_); }
    Vector gradient(std::size_t, const Vector& x) const override { return Vector::Constant(1, 2 * (x(0) - center_)); }

private:
    double center_;
};

class CountingLoss final : public OnlineLoss {
public:
    explicit CountingLoss(const OnlineLoss& inner) : inner_(inner) {}
    std::size_t dim() const override { return inner_.dim(); }
    double value(std::size_t t, const Vector& x) const override {
        ++values;
        return inner_.value(t, x);
    }
    Vector gradient(std::size_t t, const Vector& x) const override {
        ++gradients;
        return inner_.gradient(t, x);
    }
    mutable std::size_t values = 0;
    mutable std::size_t gradients = 0;

private:
    const OnlineLoss& inner_;
};

}  // namespace

TEST_CASE("ogd step by hand") {
    const BoxSet box(2, -0.5, 0.5);
    const Vector x = vec({0.1, -0.2});
    CHECK(ogd_step(x, Vector::Zero(2), 0.3, box) == x);
    CHECK(ogd_step(vec({0, 0}), vec({1, 0}), 0.1, box).isApprox(vec({-0.1, 0})));
    CHECK(ogd_step(vec({0.45, 0}), vec({-2, 0}), 0.1, box) == vec({0.5, 0}));
}

TEST_CASE("step schedules") {
    CHECK(StepSchedule::constant(0.3).at(17, 100) == 0.3);
    CHECK(StepSchedule::inverse_sqrt(2.0).at(4, 100) == 1.0);
    CHECK(StepSchedule::inverse_sqrt(2.0, 1).at(1, 100) == 2.0);
    CHECK(StepSchedule::inverse_sqrt(2.0, 1).at(5, 100) == 1.0);
    CHECK(StepSchedule::horizon_tuned(1.0, 0.75).at(3, 16) == 0.125);
    CHECK_THROWS(StepSchedule::constant(-1.0).validate());
    CHECK(parse_feedback("bandit") == Feedback::bandit);
    CHECK(to_string(Feedback::full) == "full");
    CHECK_THROWS(parse_feedback("partial"));
    CHECK(parse_bandit_update_base(to_string(BanditUpdateBase::played)) == BanditUpdateBase::played);
}

TEST_CASE("unit sphere draws") {
    Engine rng(1);
    for (int k = 0; k < 100; ++k) {
        const Vector u = sample_unit_sphere(1, rng);
        CHECK(std::abs(u(0)) == 1.0);
    }
    for (std::size_t d : {2u, 3u, 7u}) {
        for (int k = 0; k < 100; ++k) CHECK(std::abs(sample_unit_sphere(d, rng).norm() - 1.0) <= 1e-12);
    }
    Vector mean = Vector::Zero(2);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) mean += sample_unit_sphere(2, rng);
    mean /= draws;
    CHECK(mean.cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("one-point estimate by hand") {
    CHECK(one_point_estimate(1.0, vec({1, 0}), 0.1).isApprox(vec({20, 0})));
    CHECK(one_point_estimate(0.0, vec({0.6, 0.8}), 0.1).isZero(0.0));
    CHECK(exploration_radius(BoxSet(2, -0.5, 0.5), 0.2) == 0.1);
}

TEST_CASE("bandit round with zero loss projects the anchor") {
    const BoxSet box(2, -0.5, 0.5);
    BanditState state(2, 0.2, 0.5, 3);
    state.y = vec({0.1, -0.3});
    std::size_t queries = 0;
    const auto r = bandit_round(
        state,
        [&](const Vector&) {
            ++queries;
            return 0.0;
        },
        box);
    CHECK(queries == 1);
    CHECK(r.estimate.isZero(0.0));
    CHECK(state.y.isApprox(vec({0.1, -0.3})));
    CHECK(box.contains(r.played));
    CHECK((r.played - vec({0.1, -0.3})).norm() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("bandit round rejects an anchor outside the shrunk set") {
    BanditState state(1, 0.2, 0.5, 3);
    state.y = vec({0.45});
    CHECK_THROWS(bandit_round(state, [](const Vector&) { return 0.0; }, BoxSet(1, -0.5, 0.5)));
}

TEST_CASE("one-point estimator is unbiased for linear losses") {
    const BoxSet box(2, -0.5, 0.5);
    const Vector c = vec({0.7, -0.4});
    const double b = 0.3;
    const Vector y = vec({0.05, 0.1});
    const auto linear = [&](const Vector& x) { return c.dot(x) + b; };
    Engine rng(99);
    const int draws = 100000;
    const double r = exploration_radius(box, 0.1);
    Vector sum = Vector::Zero(2), sum_sq = Vector::Zero(2);
    for (int k = 0; k < draws; ++k) {
        const Vector u = sample_unit_sphere(2, rng);
        const Vector g = one_point_estimate(linear(y + r * u), u, r);
        sum += g;
        sum_sq += g.cwiseProduct(g);
    }
    const Vector mean = sum / draws;
    const Vector var = sum_sq / draws - mean.cwiseProduct(mean);
    for (Eigen::Index k = 0; k < 2; ++k) {
        const double se = std::sqrt(var(k) / draws);
        CHECK(std::abs(mean(k) - c(k)) <= 3 * se);
    }
}

TEST_CASE("run_ogd: first point, query counts, feasibility, determinism") {
    const BoxSet box(1, -0.5, 0.5);
    const ShiftedSquare loss(0.3);
    {
        CountingLoss counted(loss);
        const auto traj = run_ogd(counted, 1, box, OgdOptions{});
        REQUIRE(traj.points.size() == 1);
        CHECK(traj.points[0] == vec({0}));
        CHECK(traj.losses[0] == doctest::Approx(0.09));
    }
    const auto seq = sample_regression_sequence(1, 2, 400, 12);
    const SequenceLoss regression(seq, 0);
    const BoxSet box2(2, -0.5, 0.5);
    auto options = default_bandit_options(400, 5);
    CountingLoss counted(regression);
    const auto a = run_ogd(counted, 400, box2, options);
    CHECK(counted.values == 400);
    CHECK(counted.gradients == 0);
    const double r = exploration_radius(box2, options.delta);
    for (std::size_t t = 0; t < 400; ++t) {
        CHECK(box2.contains(a.points[t]));
        CHECK(shrink_set(box2, options.delta).contains(a.anchors[t], 1e-12));
        CHECK((a.points[t] - a.anchors[t]).norm() == doctest::Approx(r).epsilon(1e-9));
    }
    const auto b = run_ogd(regression, 400, box2, options);
    CHECK(a.points == b.points);
    CHECK(a.losses == b.losses);
    options.seed = 6;
    CHECK_FALSE(run_ogd(regression, 400, box2, options).points == a.points);

    OgdOptions full;
    full.step = default_full_schedule(box2);
    CountingLoss counted_full(regression);
    const auto f = run_ogd(counted_full, 400, box2, full);
    CHECK(counted_full.values == 400);
    for (const auto& x : f.points) CHECK(box2.contains(x));
}

TEST_CASE("full-information OGD converges on a strongly convex loss") {
    const ShiftedSquare loss(0.3);
    OgdOptions options;
    options.step = StepSchedule::inverse_sqrt(0.5);
    const auto traj = run_ogd(loss, 5000, BoxSet(1, -0.5, 0.5), options);
    CHECK(std::abs(traj.points.back()(0) - 0.3) <= 0.01);
}

TEST_CASE("full-information regret is sub-linear on regression losses") {
    const BoxSet box(2, -0.5, 0.5);
    const auto seq = sample_regression_sequence(1, 2, 8000, 77);
    OgdOptions options;
    options.step = default_full_schedule(box);
    const auto traj = run_ogd(SequenceLoss(seq, 0), 8000, box, options);
    const auto run = single_agent_run(traj);
    std::vector<double> horizons{500, 2000, 8000}, regrets;
    for (double T : horizons) {
        const auto pre = seq.prefix(static_cast<std::size_t>(T));
        const auto x_star = offline_oracle(pre, box).x;
        regrets.push_back(system_regret(run, seq, x_star)[static_cast<std::size_t>(T) - 1]);
    }
    CHECK(regrets[0] / 500 > regrets[1] / 2000);
    CHECK(regrets[1] / 2000 > regrets[2] / 8000);
    CHECK(log_log_slope(horizons, regrets) < 0.95);
}

TEST_CASE("trajectory CSV") {
    const ShiftedSquare loss(0.3);
    const auto traj = run_ogd(loss, 3, BoxSet(1, -0.5, 0.5), OgdOptions{});
    std::stringstream s;
    write_trajectory_csv(s, traj);
    std::string header;
    std::getline(s, header);
    CHECK(header == "t,x_1,loss");
}
