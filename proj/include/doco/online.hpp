#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "doco/problems.hpp"
#include "doco/rng.hpp"
#include "doco/types.hpp"

namespace doco {

/// Step size as a function of the 1-based round t and the horizon T.
struct StepSchedule {
    enum class Kind { constant, inverse_sqrt, horizon_tuned };

    Kind kind = Kind::inverse_sqrt;
    double scale = 1.0;
    double exponent = 0.5;  // horizon_tuned: scale * T^-exponent
    std::size_t lag = 0;    // inverse_sqrt evaluates at max(t - lag, 1)

    static StepSchedule constant(double value) { return {Kind::constant, value, 0.0, 0}; }
    static StepSchedule inverse_sqrt(double scale, std::size_t lag = 0) { return {Kind::inverse_sqrt, scale, 0.5, lag}; }
    static StepSchedule horizon_tuned(double scale, double exponent) {
        return {Kind::horizon_tuned, scale, exponent, 0};
    }

    double at(std::size_t t, std::size_t horizon) const;
    void validate() const;
};

std::string to_string(StepSchedule::Kind kind);
StepSchedule::Kind parse_schedule_kind(const std::string& name);

enum class Feedback { full, bandit };

std::string to_string(Feedback mode);
Feedback parse_feedback(const std::string& name);

/// Which point the bandit anchor update starts from: the anchor y_t, or the
/// played point x_t = y_t + delta u_t. Starting from x_t folds the exploration
/// displacement into the anchor every round.
enum class BanditUpdateBase { played, anchor };

std::string to_string(BanditUpdateBase base);
BanditUpdateBase parse_bandit_update_base(const std::string& name);

/// Losses revealed to a single learner, one per 1-based round.
class OnlineLoss {
public:
    virtual ~OnlineLoss() = default;
    virtual std::size_t dim() const = 0;
    virtual double value(std::size_t t, const Vector& x) const = 0;
    virtual Vector gradient(std::size_t t, const Vector& x) const = 0;
};

/// One agent's column of a LossSequence.
class SequenceLoss final : public OnlineLoss {
public:
    SequenceLoss(const LossSequence& seq, std::size_t agent) : seq_(&seq), agent_(agent) {}

    std::size_t dim() const override { return seq_->dim(); }
    double value(std::size_t t, const Vector& x) const override { return loss_value(seq_->at(agent_, t - 1), x); }
    Vector gradient(std::size_t t, const Vector& x) const override {
        return loss_gradient(seq_->at(agent_, t - 1), x);
    }

private:
    const LossSequence* seq_;
    std::size_t agent_;
};

/// P_X(x_prev - alpha_t * grad_prev).
Vector ogd_step(const Vector& x_prev, const Vector& grad_prev, double alpha_t, const BoxSet& set);

/// Normalised Gaussian draw; an all-zero draw is resampled.
Vector sample_unit_sphere(std::size_t dim, Engine& rng);

/// d * loss * u / radius.
Vector one_point_estimate(double loss, const Vector& u, double radius);

struct BanditState {
    Vector y;
    double delta = 0.1;
    double eta = 0.01;
    Engine rng;

    BanditState(std::size_t dim, double delta, double eta, std::uint64_t seed);
};

struct BanditRound {
    Vector played;
    double loss = 0.0;
    Vector u;
    Vector estimate;
};

/// One bandit round. Exploration uses radius delta * r_in (r_in = box
/// inradius), so y in X_delta implies the played point is in X. The loss
/// oracle is queried exactly once. Updates state.y in place.
BanditRound bandit_round(BanditState& state, const std::function<double(const Vector&)>& loss_oracle,
                         const BoxSet& set, BanditUpdateBase base = BanditUpdateBase::anchor);

/// Inradius-scaled exploration radius; throws if the box has no interior around the origin.
double exploration_radius(const BoxSet& set, double delta);

struct OgdOptions {
    Feedback mode = Feedback::full;
    StepSchedule step = StepSchedule::inverse_sqrt(1.0);  // alpha_t (full) or eta (bandit)
    double delta = 0.1;                                   // bandit exploration parameter
    BanditUpdateBase update_base = BanditUpdateBase::anchor;
    std::uint64_t seed = 0;
};

/// alpha_t = R_X / (G sqrt(t)).
StepSchedule default_full_schedule(const BoxSet& set, double grad_bound = 1.0);
/// delta = T^-1/4, eta = T^-3/4.
OgdOptions default_bandit_options(std::size_t horizon, std::uint64_t seed);

struct Trajectory {
    std::vector<Vector> points;   // played x_t, t = 1..T
    std::vector<double> losses;   // l_t(x_t)
    std::vector<Vector> anchors;  // bandit only: y_t
};

/// Full mode: x_1 = 0, x_t = P_X(x_{t-1} - alpha_t grad l_{t-1}(x_{t-1})).
/// Bandit mode chains bandit_round from y_1 = 0.
Trajectory run_ogd(const OnlineLoss& losses, std::size_t horizon, const BoxSet& set, const OgdOptions& options);

/// CSV: t,x_1..x_d,loss
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace doco
