#include "longctl/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace longctl {

BackboneState backbone_deriv(const BackboneState& state, double u, double delta,
                             std::optional<double> v_P,
                             const BackbonePlantParams& plant) {
  if (!std::isfinite(state.v_H) || !std::isfinite(state.a_H) ||
      !std::isfinite(u) || !std::isfinite(delta)) {
    throw std::invalid_argument("backbone_deriv: non-finite input");
  }
  BackboneState d;
  if (v_P) d.h = *v_P - state.v_H;
  d.v_H = state.a_H;
  d.a_H = (-state.a_H + plant.alpha1 * u + plant.alpha1 * delta) / plant.tau;
  return d;
}

double low_level_torque(double u, double v_H, const PhysicalPlantParams& est,
                        double phi_hat) {
  const double g = est.g_const;
  return est.R / est.eta *
         (est.m_hat * u + est.m_hat * g * std::sin(phi_hat) +
          est.mu_hat * est.m_hat * g * std::cos(phi_hat) +
          est.rho_hat * v_H * v_H);
}

PhysicalState physical_deriv(const PhysicalState& state, double T_des, double t,
                             const PhysicalPlantParams& plant) {
  const double phi = plant.grade.value_at(t);
  const double v_w = plant.wind.value_at(t);
  const double v_rel = state.v_H + v_w;
  const double force = plant.eta * state.torque / plant.R -
                       plant.m * plant.g_const * std::sin(phi) -
                       plant.mu * plant.m * plant.g_const * std::cos(phi) -
                       plant.rho * v_rel * v_rel;
  PhysicalState d;
  d.v_H = force / plant.effective_mass();
  d.torque = (T_des - state.torque) / plant.tau;
  return d;
}

double emergent_delta(double v_H, double a_H, double t,
                      const PhysicalPlantParams& plant) {
  const double phi = plant.grade.value_at(t);
  const double phi_hat = phi;  // grade estimate assumed exact
  const double phi_dot = plant.grade.slope_at(t);
  const double v_w = plant.wind.value_at(t);
  const double v_w_dot = plant.wind.slope_at(t);
  const double alpha2 = plant.m / plant.m_hat;
  const double g = plant.g_const;

  const double grade_term =
      (std::sin(phi_hat) + plant.mu_hat * std::cos(phi_hat) -
       alpha2 * (std::sin(phi) + plant.mu * std::cos(phi))) * g;
  const double grade_rate_term =
      alpha2 * g * plant.tau * phi_dot * (plant.mu * std::sin(phi) - std::cos(phi));
  const double v_rel = v_H + v_w;
  const double drag_term =
      (plant.rho_hat * v_H * v_H - plant.rho * v_rel * v_rel -
       2.0 * plant.rho * plant.tau * v_rel * (a_H + v_w_dot)) / plant.m_hat;
  return grade_term + grade_rate_term + drag_term;
}

DisturbanceSampler::DisturbanceSampler(const DisturbanceModel& model,
                                       std::uint64_t seed)
    : model_(model), rng_(seed), normal_(model.mean, model.stddev) {}

double DisturbanceSampler::next() {
  switch (model_.kind) {
    case DisturbanceModel::Kind::Constant:
      return model_.delta;
    case DisturbanceModel::Kind::GaussianZOH:
      if (model_.stddev == 0.0) return model_.mean;
      return normal_(rng_);
    case DisturbanceModel::Kind::EmergentFromPhysical:
      throw std::logic_error(
          "emergent disturbance is computed from the plant state, not sampled");
  }
  return 0.0;
}

}  // namespace longctl
