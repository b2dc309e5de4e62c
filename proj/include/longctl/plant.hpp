#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "longctl/config.hpp"

namespace longctl {

// Acceleration-level model state. h is absent in free-driving.
struct BackboneState {
  std::optional<double> h;  // inter-vehicle distance [m]
  double v_H = 0.0;         // host speed [m/s]
  double a_H = 0.0;         // host acceleration [m/s^2]
};

// Torque-level model state.
struct PhysicalState {
  double v_H = 0.0;     // host speed [m/s]
  double torque = 0.0;  // actuation torque [N m]
};

// Time derivative of the backbone model:
//   h'   = v_P - v_H          (when a leader is present)
//   v_H' = a_H
//   a_H' = (-a_H + alpha1*u + alpha1*delta) / tau
BackboneState backbone_deriv(const BackboneState& state, double u, double delta,
                             std::optional<double> v_P,
                             const BackbonePlantParams& plant);

// Feedback-linearizing low-level torque law using the nominal/estimated
// parameters (m_hat, mu_hat, rho_hat) and the grade estimate phi_hat.
double low_level_torque(double u, double v_H, const PhysicalPlantParams& est,
                        double phi_hat);

// Time derivative of the torque-level model at time t (grade and wind
// profiles are evaluated there):
//   m_e*v_H' = eta*T/R - m*g*sin(phi) - mu*m*g*cos(phi) - rho*(v_H + v_w)^2
//   T'       = (T_des - T) / tau
PhysicalState physical_deriv(const PhysicalState& state, double T_des, double t,
                             const PhysicalPlantParams& plant);

// Lumped disturbance of the backbone model evaluated along a torque-level
// trajectory point (v_H, a_H) at time t. The grade estimate phi_hat is taken
// to equal the actual grade; the profile derivatives are the exact piecewise
// slopes.
double emergent_delta(double v_H, double a_H, double t,
                      const PhysicalPlantParams& plant);

// Draws the held disturbance value for one control period. Constant models
// always return delta; GaussianZOH draws a fresh value per call. The
// EmergentFromPhysical kind has no sampler; the simulation computes it from
// the plant state via emergent_delta.
class DisturbanceSampler {
 public:
  DisturbanceSampler(const DisturbanceModel& model, std::uint64_t seed);

  double next();

 private:
  DisturbanceModel model_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

}  // namespace longctl
