#pragma once

#include <optional>

#include "longctl/config.hpp"

namespace longctl {

enum class DrivingMode { FreeDriving, CarFollowing };

// Persistent controller state. u and e survive mode switches; the integrator
// state estimates the disturbance (e* = -delta*/k_i in both modes).
struct ControllerState {
  double u = 0.0;  // command acceleration [m/s^2]
  double e = 0.0;  // integrator state [m]
  DrivingMode mode = DrivingMode::FreeDriving;
};

struct LeaderMeasurement {
  double v_P = 0.0;  // leader speed [m/s]
  double h = 0.0;    // inter-vehicle distance [m]
};

struct Measurement {
  double v_H = 0.0;
  std::optional<LeaderMeasurement> leader;
};

// Comparison baselines: one component of the full pipeline swapped for its
// conventional counterpart.
enum class ControllerVariant {
  Nonlinear,         // the full controller
  BangRate,          // u' = r_max * sign(u_des - u)
  LinearIntegrator,  // e' = v_des - v_H
  LinearP,           // proportional term k_v*(v_des - v_H), unclamped
  LinearPSat,        // proportional term clamped to [-a_sat, a_sat]
};

std::optional<ControllerVariant> parse_variant(const std::string& name);
std::string variant_name(ControllerVariant variant);

// Constant time-headway range policy h_des = h0 + v_P * t_h. Note the
// predecessor speed, not the follower speed.
double desired_distance(double v_P, const ControllerParams& params);

struct Targets {
  double v_des;
  double a_des;
};

// Cruise-control targets: v_des = v_max, a_des a smoothly saturated
// proportional law, strictly inside (-a_sat, a_sat).
Targets free_driving_targets(double v_H, const ControllerParams& params);

// Desired speed for car-following, clamped to [0, v_max].
double car_following_vdes(double v_P, double h, const ControllerParams& params);

// Acceleration needed to hold v_des exactly while v_P stays constant; the
// clamped branches keep it continuous where v_des saturates.
double underlying_accel(double v_des, double h_hat, double v_hat,
                        const ControllerParams& params);

// Collision-free feedforward; active only when closing in (v_hat < 0),
// bounded to [a_min, 0].
double collision_free_accel(double v_hat, double h, const ControllerParams& params);

// Full car-following targets: saturated proportional term plus underlying
// and collision-free accelerations.
Targets car_following_ades(const Measurement& meas, const ControllerParams& params);

struct StepResult {
  double u = 0.0;  // applied command for the next hold interval
  ControllerState state;
  // per-step intermediates, kept for logging
  double v_des = 0.0;
  double a_des = 0.0;
  double u_des = 0.0;
};

// One digital control update (explicit Euler at period dt). Mode follows the
// presence of the leader measurement; u and e carry over.
StepResult controller_step(const ControllerState& state, const Measurement& meas,
                           double dt, const ControllerParams& params);

// Same pipeline with one component swapped per the variant.
StepResult baseline_step(const ControllerState& state, const Measurement& meas,
                         double dt, const ControllerParams& params,
                         ControllerVariant variant);

}  // namespace longctl
