#include "doco/online.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "doco/format.hpp"

namespace doco {

double StepSchedule::at(std::size_t t, std::size_t horizon) const {
    switch (kind) {
        case Kind::constant:
            return scale;
        case Kind::inverse_sqrt:
            return scale / std::sqrt(static_cast<double>(t > lag ? t - lag : 1));
        case Kind::horizon_tuned:
            return scale * std::pow(static_cast<double>(horizon), -exponent);
    }
    return scale;
}

void StepSchedule::validate() const {
    if (!(scale > 0.0)) throw std::invalid_argument("step schedule scale must be positive");
    if (kind == Kind::horizon_tuned && !(exponent >= 0.0)) {
        throw std::invalid_argument("horizon-tuned exponent must be nonnegative");
    }
}

std::string to_string(StepSchedule::Kind kind) {
    switch (kind) {
        case StepSchedule::Kind::constant:
            return "constant";
        case StepSchedule::Kind::inverse_sqrt:
            return "inverse_sqrt";
        case StepSchedule::Kind::horizon_tuned:
            return "horizon_tuned";
    }
    return "unknown";
}

StepSchedule::Kind parse_schedule_kind(const std::string& name) {
    if (name == "constant") return StepSchedule::Kind::constant;
    if (name == "inverse_sqrt") return StepSchedule::Kind::inverse_sqrt;
    if (name == "horizon_tuned") return StepSchedule::Kind::horizon_tuned;
    throw std::invalid_argument("unknown step schedule kind: " + name);
}

std::string to_string(Feedback mode) { return mode == Feedback::full ? "full" : "bandit"; }

Feedback parse_feedback(const std::string& name) {
    if (name == "full") return Feedback::full;
    if (name == "bandit") return Feedback::bandit;
    throw std::invalid_argument("feedback must be 'full' or 'bandit', got: " + name);
}

std::string to_string(BanditUpdateBase base) { return base == BanditUpdateBase::played ? "played" : "anchor"; }

BanditUpdateBase parse_bandit_update_base(const std::string& name) {
    if (name == "played") return BanditUpdateBase::played;
    if (name == "anchor") return BanditUpdateBase::anchor;
    throw std::invalid_argument("bandit update base must be 'played' or 'anchor', got: " + name);
}

Vector ogd_step(const Vector& x_prev, const Vector& grad_prev, double alpha_t, const BoxSet& set) {
    if (x_prev.size() != grad_prev.size()) throw std::invalid_argument("dimension mismatch in ogd_step");
    return project_box(x_prev - alpha_t * grad_prev, set);
}

Vector sample_unit_sphere(std::size_t dim, Engine& rng) {
    if (dim < 1) throw std::invalid_argument("sphere dimension must be at least 1");
    Vector u(static_cast<Eigen::Index>(dim));
    for (;;) {
        for (Eigen::Index m = 0; m < u.size(); ++m) u(m) = standard_normal(rng);
        const double norm = u.norm();
        if (norm > 0.0) return u / norm;
    }
}

Vector one_point_estimate(double loss, const Vector& u, double radius) {
    return (static_cast<double>(u.size()) * loss / radius) * u;
}

BanditState::BanditState(std::size_t dim, double delta_, double eta_, std::uint64_t seed)
    : y(Vector::Zero(static_cast<Eigen::Index>(dim))), delta(delta_), eta(eta_), rng(seed) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bandit delta must lie in (0, 1)");
    if (!(eta > 0.0)) throw std::invalid_argument("bandit eta must be positive");
}

double exploration_radius(const BoxSet& set, double delta) {
    const double r_in = set.inradius();
    if (!(r_in > 0.0)) throw std::invalid_argument("bandit exploration needs the origin in the interior of X");
    return delta * r_in;
}

BanditRound bandit_round(BanditState& state, const std::function<double(const Vector&)>& loss_oracle,
                         const BoxSet& set, BanditUpdateBase base) {
    const ShrunkSet shrunk = shrink_set(set, state.delta);
    if (!shrunk.contains(state.y, 1e-12)) throw std::logic_error("bandit anchor left the shrunk set");
    const double radius = exploration_radius(set, state.delta);

    BanditRound round;
    round.u = sample_unit_sphere(set.dim(), state.rng);
    round.played = state.y + radius * round.u;
    round.loss = loss_oracle(round.played);
    round.estimate = one_point_estimate(round.loss, round.u, radius);
    const Vector& from = base == BanditUpdateBase::played ? round.played : state.y;
    state.y = shrunk.project(from - state.eta * round.estimate);
    return round;
}

StepSchedule default_full_schedule(const BoxSet& set, double grad_bound) {
    if (!(grad_bound > 0.0)) throw std::invalid_argument("gradient bound must be positive");
    return StepSchedule::inverse_sqrt(set.radius() / grad_bound);
}

OgdOptions default_bandit_options(std::size_t horizon, std::uint64_t seed) {
    OgdOptions opts;
    opts.mode = Feedback::bandit;
    opts.step = StepSchedule::horizon_tuned(1.0, 0.75);
    opts.delta = std::pow(static_cast<double>(horizon), -0.25);
    opts.seed = seed;
    return opts;
}

Trajectory run_ogd(const OnlineLoss& losses, std::size_t horizon, const BoxSet& set, const OgdOptions& options) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (losses.dim() != set.dim()) throw std::invalid_argument("loss and set dimensions differ");
    options.step.validate();

    Trajectory traj;
    traj.points.reserve(horizon);
    traj.losses.reserve(horizon);
    const auto dim = static_cast<Eigen::Index>(set.dim());

    if (options.mode == Feedback::full) {
        Vector x = project_box(Vector::Zero(dim), set);
        for (std::size_t t = 1; t <= horizon; ++t) {
            if (t > 1) {
                const Vector grad = losses.gradient(t - 1, x);
                x = ogd_step(x, grad, options.step.at(t, horizon), set);
            }
            traj.points.push_back(x);
            traj.losses.push_back(losses.value(t, x));
        }
        return traj;
    }

    BanditState state(set.dim(), options.delta, options.step.at(1, horizon), options.seed);
    traj.anchors.reserve(horizon);
    for (std::size_t t = 1; t <= horizon; ++t) {
        state.eta = options.step.at(t, horizon);
        traj.anchors.push_back(state.y);
        const auto round =
            bandit_round(state, [&](const Vector& x) { return losses.value(t, x); }, set, options.update_base);
        traj.points.push_back(round.played);
        traj.losses.push_back(round.loss);
    }
    return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const auto dim = traj.points.empty() ? 0 : traj.points.front().size();
    out << "t";
    for (Eigen::Index m = 1; m <= dim; ++m) out << ",x_" << m;
    out << ",loss\n";
    for (std::size_t t = 0; t < traj.points.size(); ++t) {
        out << (t + 1);
        for (Eigen::Index m = 0; m < dim; ++m) out << ',' << format_double(traj.points[t](m));
        out << ',' << format_double(traj.losses[t]) << '\n';
    }
}

}  // namespace doco
