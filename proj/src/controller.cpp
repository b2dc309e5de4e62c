#include "longctl/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "longctl/shaping.hpp"

namespace longctl {

std::optional<ControllerVariant> parse_variant(const std::string& name) {
  if (name == "nonlinear") return ControllerVariant::Nonlinear;
  if (name == "bang-rate") return ControllerVariant::BangRate;
  if (name == "linear-integrator") return ControllerVariant::LinearIntegrator;
  if (name == "linear-p") return ControllerVariant::LinearP;
  if (name == "linear-p-sat") return ControllerVariant::LinearPSat;
  return std::nullopt;
}

std::string variant_name(ControllerVariant variant) {
  switch (variant) {
    case ControllerVariant::Nonlinear: return "nonlinear";
    case ControllerVariant::BangRate: return "bang-rate";
    case ControllerVariant::LinearIntegrator: return "linear-integrator";
    case ControllerVariant::LinearP: return "linear-p";
    case ControllerVariant::LinearPSat: return "linear-p-sat";
  }
  return "unknown";
}

double desired_distance(double v_P, const ControllerParams& params) {
  return params.h0 + v_P * params.t_h;
}

namespace {

QShape approach_shape(const ControllerParams& params) {
  return QShape{params.a_com / params.k_h, params.c};
}

double proportional_accel(double v_des, double v_H, const ControllerParams& params,
                          ControllerVariant variant) {
  const double err = params.k_v * (v_des - v_H);
  switch (variant) {
    case ControllerVariant::LinearP:
      return err;
    case ControllerVariant::LinearPSat:
      return std::clamp(err, -params.a_sat, params.a_sat);
    default:
      return params.a_sat * shape_g(err / params.a_sat).value;
  }
}

}  // namespace

Targets free_driving_targets(double v_H, const ControllerParams& params) {
  const double v_des = params.v_max;
  return {v_des, proportional_accel(v_des, v_H, params, ControllerVariant::Nonlinear)};
}

double car_following_vdes(double v_P, double h, const ControllerParams& params) {
  const double h_hat = h - desired_distance(v_P, params);
  const double q = shape_q(params.k_h * h_hat, approach_shape(params)).value;
  return std::clamp(v_P + q, 0.0, params.v_max);
}

double underlying_accel(double v_des, double h_hat, double v_hat,
                        const ControllerParams& params) {
  const double raw =
      shape_q(params.k_h * h_hat, approach_shape(params)).slope * params.k_h * v_hat;
  if (v_des <= 0.0) return std::max(raw, 0.0);
  if (v_des >= params.v_max) return std::min(raw, 0.0);
  return raw;
}

double collision_free_accel(double v_hat, double h, const ControllerParams& params) {
  // Heaviside with H(0) = 0; immaterial since the numerator vanishes with v_hat.
  if (v_hat >= 0.0) return 0.0;
  const double gap = std::max(h - params.h_min, params.eps);
  return std::max(-v_hat * v_hat / (2.0 * gap), params.a_min);
}

Targets car_following_ades(const Measurement& meas, const ControllerParams& params) {
  if (!meas.leader) {
    throw std::invalid_argument("car_following_ades: no leader measurement");
  }
  const double v_P = meas.leader->v_P;
  const double h = meas.leader->h;
  const double v_hat = v_P - meas.v_H;
  const double h_hat = h - desired_distance(v_P, params);
  const double v_des = car_following_vdes(v_P, h, params);
  const double a_des = proportional_accel(v_des, meas.v_H, params,
                                          ControllerVariant::Nonlinear) +
                       underlying_accel(v_des, h_hat, v_hat, params) +
                       collision_free_accel(v_hat, h, params);
  return {v_des, a_des};
}

StepResult baseline_step(const ControllerState& state, const Measurement& meas,
                         double dt, const ControllerParams& params,
                         ControllerVariant variant) {
  StepResult out;
  out.state = state;
  out.state.mode = meas.leader ? DrivingMode::CarFollowing : DrivingMode::FreeDriving;

  double v_des, a_des;
  if (meas.leader) {
    const double v_P = meas.leader->v_P;
    const double h = meas.leader->h;
    const double v_hat = v_P - meas.v_H;
    const double h_hat = h - desired_distance(v_P, params);
    v_des = car_following_vdes(v_P, h, params);
    a_des = proportional_accel(v_des, meas.v_H, params, variant) +
            underlying_accel(v_des, h_hat, v_hat, params) +
            collision_free_accel(v_hat, h, params);
  } else {
    v_des = params.v_max;
    a_des = proportional_accel(v_des, meas.v_H, params, variant);
  }

  const double u_des = a_des + params.k_i * state.e;

  double u_rate;
  if (variant == ControllerVariant::BangRate) {
    const double diff = u_des - state.u;
    u_rate = params.r_max * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
  } else {
    u_rate = params.r_max *
             shape_g(params.k_u / params.r_max * (u_des - state.u)).value;
  }

  double e_rate;
  if (variant == ControllerVariant::LinearIntegrator) {
    e_rate = v_des - meas.v_H;
  } else {
    e_rate = params.sigma *
             shape_p((v_des - meas.v_H) / params.sigma, PShape{params.n}).value;
  }

  out.state.u = state.u + dt * u_rate;
  out.state.e = state.e + dt * e_rate;
  out.u = out.state.u;
  out.v_des = v_des;
  out.a_des = a_des;
  out.u_des = u_des;
  return out;
}

StepResult controller_step(const ControllerState& state, const Measurement& meas,
                           double dt, const ControllerParams& params) {
  return baseline_step(state, meas, dt, params, ControllerVariant::Nonlinear);
}

}  // namespace longctl
