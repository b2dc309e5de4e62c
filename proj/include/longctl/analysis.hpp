#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "longctl/config.hpp"

namespace longctl {

// Closed-loop steady state. u* balances the disturbance and e* stores it
// scaled by the integral gain.
struct Equilibrium {
  std::optional<double> h_star;  // car-following only
  double v_H_star = 0.0;
  double a_H_star = 0.0;
  double u_star = 0.0;
  double e_star = 0.0;
};

Equilibrium equilibrium_free(const ControllerParams& params, double delta_star);
Equilibrium equilibrium_cf(const ControllerParams& params, double v_P_star,
                           double delta_star);

struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;
};

// Closed-form linearization of the free-driving closed loop around its
// equilibrium. State (v_H, a_H, u, e), input delta.
LinearModel linearize_free(const ControllerParams& params,
                           const BackbonePlantParams& plant);

// Closed-form linearization of the car-following closed loop around the
// uniform flow equilibrium. State (h, v_H, a_H, u, e), inputs (delta, v_P).
// The v_P column includes the range-policy feedback (h_des grows with the
// leader speed), so it matches the numeric Jacobian of the nonlinear loop.
LinearModel linearize_cf(const ControllerParams& params,
                         const BackbonePlantParams& plant);

// Monic characteristic polynomial coefficients of det(sI - A), highest power
// first, via the Faddeev-LeVerrier trace recursion (no eigendecomposition).
std::vector<double> char_poly(const Eigen::MatrixXd& A);

enum class StabilityVerdict { Stable, Unstable, Marginal };

std::string verdict_name(StabilityVerdict verdict);

struct RouthResult {
  StabilityVerdict verdict = StabilityVerdict::Marginal;
  std::vector<std::vector<double>> array;
};

// Routh-Hurwitz test on a coefficient list with positive leading coefficient.
// An exact zero in the first column is reported as Marginal, not resolved.
RouthResult routh_hurwitz(const std::vector<double>& coeffs);

// Roots of the polynomial as eigenvalues of its companion matrix.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs);

// Central-difference Jacobian with per-component relative step.
Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
    const Eigen::VectorXd& point, double step = 1e-5);

// Continuous-time closed-loop vector fields used for residual and Jacobian
// cross-checks. State ordering matches the linear models.
Eigen::VectorXd closed_loop_free(const Eigen::VectorXd& x,
                                 const ControllerParams& params,
                                 const BackbonePlantParams& plant, double delta);
Eigen::VectorXd closed_loop_cf(const Eigen::VectorXd& x,
                               const ControllerParams& params,
                               const BackbonePlantParams& plant, double delta,
                               double v_P);

}  // namespace longctl
