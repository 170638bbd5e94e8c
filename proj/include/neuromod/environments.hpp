#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace neuromod {

using Observation = std::vector<double>;

inline constexpr double kDt = 0.05;        // step length, seconds
inline constexpr double kGravity = 9.8;    // m/s^2
inline constexpr double kTargetX = 1000.0; // hopper/walker goal position

// Which of the two rewarded behaviors an episode asks for. The cue occupies
// the last two observation slots: B1 -> (5.0, 0.0), B2 -> (0.0, 5.0).
enum class BehaviorId { b1, b2 };

inline constexpr double kCueActive = 5.0;

// Stamps the cue encoding onto the two cue slots at the end of obs.
void apply_cue(Observation& obs, BehaviorId behavior);

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

// Per-step forward-progress reward: (d_old - d) / dt.
double reward_hopper_forward(double d_old, double d, double dt);

// Vertical-motion reward with a forward-motion penalty:
//   2 * |(h - h_old)/dt| - 0.5 * reward_hopper_forward(d_old, d, dt).
double reward_hopper_vertical(double h_old, double h, double d_old, double d,
                              double dt);

// Directional step reward. With L the step length and self_angle the angle
// of the displacement relative to the heading, B1 pays L*cos(self_angle -
// pi/4) and B2 pays L*cos(self_angle + pi/4). A zero-length step pays 0.
double reward_walker(BehaviorId behavior, double x_old, double y_old, double x,
                     double y, double yaw);

// One-legged vertical/forward surrogate. Ground phase sets the vertical
// launch speed from action[1] and accumulates horizontal speed from
// action[0]; flight applies gravity and an air brake from action[2]. An
// episode ends after more than 50 consecutive ground steps.
struct HopperState {
  double x = 0.0;
  double h = 0.0;
  double vx = 0.0;
  double vh = 0.0;
  bool contact = true;
  int ground_timer = 0;
  double x_old = 0.0;
  double h_old = 0.0;
  double d = kTargetX;
  double d_old = kTargetX;
};

class HopperEnv {
 public:
  static constexpr int kObsSize = 17;
  static constexpr int kActionSize = 3;
  static constexpr int kCueSlot = 15;

  // Fixed start on the ground at the origin; the seed is recorded for
  // forward compatibility but does not alter v1 dynamics.
  Observation reset(std::uint64_t episode_seed);
  StepOutcome step(std::span<const double> action, BehaviorId behavior);

  const HopperState& state() const { return state_; }

 private:
  Observation observe(double applied_jump) const;

  HopperState state_;
};

// Planar unicycle surrogate for the eight-legged walker. Thrust is the mean
// of the first four action values, turn the mean of the last four; speed and
// yaw rate follow first-order lags. Never terminates before the step limit.
struct WalkerState {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double v = 0.0;
  double omega = 0.0;
  double x_old = 0.0;
  double y_old = 0.0;
};

class WalkerEnv {
 public:
  static constexpr int kObsSize = 30;
  static constexpr int kActionSize = 8;
  static constexpr int kCueSlot = 28;

  Observation reset(std::uint64_t episode_seed);
  StepOutcome step(std::span<const double> action, BehaviorId behavior);

  const WalkerState& state() const { return state_; }

 private:
  Observation observe(std::span<const double> applied_action, double v_prev,
                      double omega_prev) const;

  WalkerState state_;
};

}  // namespace neuromod
