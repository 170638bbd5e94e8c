#include "neuromod/environments.hpp"

#include <algorithm>
#include <cmath>

#include "neuromod/errors.hpp"

namespace neuromod {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_unit(double a) { return std::clamp(a, -1.0, 1.0); }

// Wraps into (-pi, pi].
double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw NumericalError(std::string(what) +
                                                " became non-finite");
}

}  // namespace

void apply_cue(Observation& obs, BehaviorId behavior) {
  const std::size_t first = obs.size() - 2;
  obs[first] = behavior == BehaviorId::b1 ? kCueActive : 0.0;
  obs[first + 1] = behavior == BehaviorId::b2 ? kCueActive : 0.0;
}

double reward_hopper_forward(double d_old, double d, double dt) {
  return (d_old - d) / dt;
}

double reward_hopper_vertical(double h_old, double h, double d_old, double d,
                              double dt) {
  const double progress_up = std::fabs((h - h_old) / dt);
  return 2.0 * progress_up - 0.5 * reward_hopper_forward(d_old, d, dt);
}

double reward_walker(BehaviorId behavior, double x_old, double y_old, double x,
                     double y, double yaw) {
  const double dx = x - x_old;
  const double dy = y - y_old;
  const double step_length = std::sqrt(dx * dx + dy * dy);
  if (step_length == 0.0) return 0.0;
  const double xy_angle = std::atan2(dy, dx);
  const double self_angle = xy_angle - yaw;
  const double offset = behavior == BehaviorId::b1 ? -kPi / 4.0 : kPi / 4.0;
  return step_length * std::cos(self_angle + offset);
}

Observation HopperEnv::reset(std::uint64_t /*episode_seed*/) {
  state_ = HopperState{};
  return observe(0.0);
}

Observation HopperEnv::observe(double applied_jump) const {
  Observation obs(kObsSize, 0.0);
  obs[0] = state_.h;
  obs[1] = 0.0;  // sin(angle to target); motion is along +x
  obs[2] = 1.0;  // cos(angle to target)
  obs[3] = state_.vx;
  obs[4] = 0.0;
  obs[5] = state_.vh;
  obs[6] = 0.0;  // roll
  obs[7] = 0.0;  // pitch
  // Internal surrogate quantities standing in for joint readings.
  obs[8] = state_.vx / 10.0;
  obs[9] = state_.vh / 10.0;
  obs[10] = state_.h;
  obs[11] = state_.contact ? 1.0 : 0.0;
  obs[12] = static_cast<double>(state_.ground_timer) / 50.0;
  obs[13] = applied_jump;
  obs[14] = state_.contact ? 1.0 : 0.0;
  // cue slots 15-16 are stamped by the caller / step
  return obs;
}

StepOutcome HopperEnv::step(std::span<const double> action,
                            BehaviorId behavior) {
  if (action.size() != kActionSize)
    throw ConfigError("hopper expects a 3-component action");
  const double drive = clamp_unit(action[0]);
  const double jump = clamp_unit(action[1]);
  const double brake = clamp_unit(action[2]);

  HopperState& s = state_;
  s.x_old = s.x;
  s.h_old = s.h;
  s.d_old = s.d;

  if (s.contact) {
    s.vh = std::max(jump, 0.0) * 5.0;
    s.vx += drive * 1.0;
    if (s.vh > 0.0) s.contact = false;  // liftoff
  } else {
    s.vh -= kGravity * kDt;
    s.vx *= 1.0 - 0.1 * std::max(brake, 0.0);
  }

  s.x += s.vx * kDt;
  s.h += s.vh * kDt;
  if (s.h < 0.0) {  // landing
    s.h = 0.0;
    s.vh = 0.0;
    s.vx *= 0.5;
    s.contact = true;
  }
  if (s.contact)
    ++s.ground_timer;
  else
    s.ground_timer = 0;

  s.d = kTargetX - s.x;

  StepOutcome out;
  out.done = s.ground_timer > 50;
  out.reward = behavior == BehaviorId::b1
                   ? reward_hopper_forward(s.d_old, s.d, kDt)
                   : reward_hopper_vertical(s.h_old, s.h, s.d_old, s.d, kDt);
  out.observation = observe(jump);
  apply_cue(out.observation, behavior);

  const double probe[] = {s.x, s.h, s.vx, s.vh, out.reward};
  check_finite(probe, "hopper state");
  return out;
}

Observation WalkerEnv::reset(std::uint64_t /*episode_seed*/) {
  state_ = WalkerState{};
  std::vector<double> no_action(kActionSize, 0.0);
  return observe(no_action, 0.0, 0.0);
}

Observation WalkerEnv::observe(std::span<const double> applied_action,
                               double v_prev, double omega_prev) const {
  Observation obs(kObsSize, 0.0);
  const WalkerState& s = state_;
  obs[0] = 0.5;  // constant surrogate ride height
  const double angle_to_target = std::atan2(0.0 - s.y, kTargetX - s.x);
  obs[1] = std::sin(angle_to_target - s.yaw);
  obs[2] = std::cos(angle_to_target - s.yaw);
  obs[3] = s.v * std::cos(s.yaw);
  obs[4] = s.v * std::sin(s.yaw);
  obs[5] = 0.0;
  obs[6] = 0.0;  // roll
  obs[7] = 0.0;  // pitch
  // Slots 8-15 echo the action applied this step; 16-23 repeat the pre-step
  // (v, omega) four times, standing in for joint position/velocity readings.
  for (int i = 0; i < kActionSize; ++i) obs[8 + i] = applied_action[i];
  for (int r = 0; r < 4; ++r) {
    obs[16 + 2 * r] = v_prev;
    obs[16 + 2 * r + 1] = omega_prev;
  }
  for (int i = 24; i < 28; ++i) obs[i] = 1.0;  // feet contact constants
  // cue slots 28-29 are stamped by the caller / step
  return obs;
}

StepOutcome WalkerEnv::step(std::span<const double> action,
                            BehaviorId behavior) {
  if (action.size() != kActionSize)
    throw ConfigError("walker expects an 8-component action");
  double clamped[kActionSize];
  for (int i = 0; i < kActionSize; ++i) clamped[i] = clamp_unit(action[i]);

  WalkerState& s = state_;
  s.x_old = s.x;
  s.y_old = s.y;
  const double v_prev = s.v;
  const double omega_prev = s.omega;
  // Heading at the start of the step; the displacement below is scored
  // against it, which keeps the two behaviors distinguishable even though
  // the surrogate can only move along its heading.
  const double yaw_prev = s.yaw;

  const double thrust =
      (clamped[0] + clamped[1] + clamped[2] + clamped[3]) / 4.0 * 2.0;
  const double turn =
      (clamped[4] + clamped[5] + clamped[6] + clamped[7]) / 4.0 * 2.0;
  s.v += (thrust - 1.0 * s.v) * kDt;
  s.omega += (turn - 2.0 * s.omega) * kDt;
  s.yaw = wrap_angle(s.yaw + s.omega * kDt);
  s.x += s.v * std::cos(s.yaw) * kDt;
  s.y += s.v * std::sin(s.yaw) * kDt;

  StepOutcome out;
  out.done = false;  // only the external step limit ends a walker episode
  out.reward = reward_walker(behavior, s.x_old, s.y_old, s.x, s.y, yaw_prev);
  out.observation = observe({clamped, kActionSize}, v_prev, omega_prev);
  apply_cue(out.observation, behavior);

  const double probe[] = {s.x, s.y, s.yaw, s.v, s.omega, out.reward};
  check_finite(probe, "walker state");
  return out;
}

}  // namespace neuromod
