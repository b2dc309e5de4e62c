#include "longctl/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "longctl/controller.hpp"
#include "longctl/plant.hpp"
#include "longctl/shaping.hpp"

namespace longctl {

Equilibrium equilibrium_free(const ControllerParams& params, double delta_star) {
  Equilibrium eq;
  eq.v_H_star = params.v_max;
  eq.a_H_star = 0.0;
  eq.u_star = -delta_star;
  eq.e_star = -delta_star / params.k_i;
  return eq;
}

Equilibrium equilibrium_cf(const ControllerParams& params, double v_P_star,
                           double delta_star) {
  Equilibrium eq = equilibrium_free(params, delta_star);
  eq.v_H_star = v_P_star;
  eq.h_star = desired_distance(v_P_star, params);
  return eq;
}

LinearModel linearize_free(const ControllerParams& p,
                           const BackbonePlantParams& plant) {
  const double a = plant.alpha1 / plant.tau;
  LinearModel m;
  m.A = Eigen::MatrixXd::Zero(4, 4);
  m.A << 0.0, 1.0, 0.0, 0.0,
         0.0, -1.0 / plant.tau, a, 0.0,
         -p.k_u * p.k_v, 0.0, -p.k_u, p.k_u * p.k_i,
         -1.0, 0.0, 0.0, 0.0;
  m.B = Eigen::MatrixXd::Zero(4, 1);
  m.B(1, 0) = a;
  m.state_labels = {"v_H", "a_H", "u", "e"};
  m.input_labels = {"delta"};
  return m;
}

LinearModel linearize_cf(const ControllerParams& p,
                         const BackbonePlantParams& plant) {
  const double a = plant.alpha1 / plant.tau;
  LinearModel m;
  m.A = Eigen::MatrixXd::Zero(5, 5);
  m.A << 0.0, -1.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 1.0, 0.0, 0.0,
         0.0, 0.0, -1.0 / plant.tau, a, 0.0,
         p.k_u * p.k_v * p.k_h, -p.k_u * (p.k_v + p.k_h), 0.0, -p.k_u, p.k_u * p.k_i,
         p.k_h, -1.0, 0.0, 0.0, 0.0;
  // A faster leader raises v_des directly but also lengthens the desired gap
  // through the range policy, which feeds back with weight k_h*t_h.
  const double dv_des = 1.0 - p.k_h * p.t_h;
  m.B = Eigen::MatrixXd::Zero(5, 2);
  m.B(0, 1) = 1.0;
  m.B(2, 0) = a;
  m.B(3, 1) = p.k_u * (p.k_v * dv_des + p.k_h);
  m.B(4, 1) = dv_des;
  m.state_labels = {"h", "v_H", "a_H", "u", "e"};
  m.input_labels = {"delta", "v_P"};
  return m;
}

std::vector<double> char_poly(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("char_poly: matrix must be square");
  }
  if (!A.allFinite()) {
    throw std::invalid_argument("char_poly: non-finite matrix");
  }
  const Eigen::Index n = A.rows();
  std::vector<double> coeffs(static_cast<std::size_t>(n) + 1);
  coeffs[0] = 1.0;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    M = A * M;
    const double c = -M.trace() / static_cast<double>(k);
    coeffs[static_cast<std::size_t>(k)] = c;
    M.diagonal().array() += c;
  }
  return coeffs;
}

std::string verdict_name(StabilityVerdict verdict) {
  switch (verdict) {
    case StabilityVerdict::Stable: return "stable";
    case StabilityVerdict::Unstable: return "unstable";
    case StabilityVerdict::Marginal: return "marginal";
  }
  return "unknown";
}

RouthResult routh_hurwitz(const std::vector<double>& coeffs) {
  if (coeffs.empty() || coeffs[0] == 0.0) {
    throw std::invalid_argument("routh_hurwitz: leading coefficient must be nonzero");
  }
  if (coeffs[0] < 0.0) {
    throw std::invalid_argument("routh_hurwitz: leading coefficient must be positive");
  }
  const std::size_t degree = coeffs.size() - 1;
  RouthResult out;
  if (degree == 0) {
    out.verdict = StabilityVerdict::Stable;
    out.array = {{coeffs[0]}};
    return out;
  }

  const std::size_t width = degree / 2 + 1;
  std::vector<std::vector<double>> rows(degree + 1, std::vector<double>(width, 0.0));
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    rows[i % 2][i / 2] = coeffs[i];
  }
  bool marginal = false;
  bool sign_change = false;
  for (std::size_t r = 2; r <= degree && !marginal; ++r) {
    const double pivot = rows[r - 1][0];
    if (pivot == 0.0) {
      marginal = true;
      break;
    }
    for (std::size_t j = 0; j + 1 < width; ++j) {
      rows[r][j] =
          (pivot * rows[r - 2][j + 1] - rows[r - 2][0] * rows[r - 1][j + 1]) / pivot;
    }
  }
  for (std::size_t r = 0; r <= degree; ++r) {
    if (rows[r][0] == 0.0) {
      marginal = true;
      break;
    }
    if (rows[r][0] < 0.0) sign_change = true;
  }
  out.array = std::move(rows);
  out.verdict = marginal ? StabilityVerdict::Marginal
                         : (sign_change ? StabilityVerdict::Unstable
                                        : StabilityVerdict::Stable);
  return out;
}

std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs) {
  if (coeffs.empty() || coeffs[0] == 0.0) {
    throw std::invalid_argument("poly_roots: leading coefficient must be nonzero");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(coeffs.size()) - 1;
  if (n == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    companion(0, i) = -coeffs[static_cast<std::size_t>(i) + 1] / coeffs[0];
  }
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  }
  return roots;
}

Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
    const Eigen::VectorXd& point, double step) {
  const Eigen::Index n = point.size();
  const Eigen::VectorXd f0 = field(point);
  Eigen::MatrixXd jac(f0.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, std::abs(point(j)));
    Eigen::VectorXd hi = point, lo = point;
    hi(j) += h;
    lo(j) -= h;
    const Eigen::VectorXd fhi = field(hi);
    const Eigen::VectorXd flo = field(lo);
    if (!fhi.allFinite() || !flo.allFinite()) {
      throw std::runtime_error("numeric_jacobian: non-finite field evaluation");
    }
    jac.col(j) = (fhi - flo) / (2.0 * h);
  }
  return jac;
}

namespace {

// Continuous-time command and integrator rates of the full controller.
void controller_rates(const ControllerParams& p, double v_des, double a_des,
                      double v_H, double u, double e, double& u_dot,
                      double& e_dot) {
  const double u_des = a_des + p.k_i * e;
  u_dot = p.r_max * shape_g(p.k_u / p.r_max * (u_des - u)).value;
  e_dot = p.sigma * shape_p((v_des - v_H) / p.sigma, PShape{p.n}).value;
}

}  // namespace

Eigen::VectorXd closed_loop_free(const Eigen::VectorXd& x,
                                 const ControllerParams& params,
                                 const BackbonePlantParams& plant, double delta) {
  const double v_H = x(0), a_H = x(1), u = x(2), e = x(3);
  const Targets t = free_driving_targets(v_H, params);
  double u_dot, e_dot;
  controller_rates(params, t.v_des, t.a_des, v_H, u, e, u_dot, e_dot);
  Eigen::VectorXd dx(4);
  dx(0) = a_H;
  dx(1) = (-a_H + plant.alpha1 * u + plant.alpha1 * delta) / plant.tau;
  dx(2) = u_dot;
  dx(3) = e_dot;
  return dx;
}

Eigen::VectorXd closed_loop_cf(const Eigen::VectorXd& x,
                               const ControllerParams& params,
                               const BackbonePlantParams& plant, double delta,
                               double v_P) {
  const double h = x(0), v_H = x(1), a_H = x(2), u = x(3), e = x(4);
  Measurement meas;
  meas.v_H = v_H;
  meas.leader = LeaderMeasurement{v_P, h};
  const Targets t = car_following_ades(meas, params);
  double u_dot, e_dot;
  controller_rates(params, t.v_des, t.a_des, v_H, u, e, u_dot, e_dot);
  Eigen::VectorXd dx(5);
  dx(0) = v_P - v_H;
  dx(1) = a_H;
  dx(2) = (-a_H + plant.alpha1 * u + plant.alpha1 * delta) / plant.tau;
  dx(3) = u_dot;
  dx(4) = e_dot;
  return dx;
}

}  // namespace longctl
