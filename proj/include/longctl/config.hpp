#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace longctl {

// Thrown on malformed or invariant-violating scenario documents.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// High-level controller parameters. Defaults are the simulation values used
// throughout: h0=5, t_h=1, k_u=10, etc.
struct ControllerParams {
  double h0 = 5.0;      // standstill distance [m]
  double t_h = 1.0;     // time headway [s]
  double h_min = 5.0;   // minimum allowed distance [m]
  double eps = 0.5;     // singularity guard in the collision-free law [m]
  double v_max = 30.0;  // preset maximum speed [m/s]
  double r_max = 5.0;   // maximum command rate [m/s^3]
  double a_sat = 4.0;   // maximum allowed acceleration [m/s^2]
  double a_min = -10.0; // physical minimum acceleration [m/s^2]
  double a_com = 0.5;   // comfortable acceleration [m/s^2]
  double k_v = 0.8;     // speed gain [1/s]
  double k_h = 1.0;     // headway gain [1/s]
  double k_i = 0.08;    // integral gain [1/s]
  double k_u = 10.0;    // rate-limiter gain [1/s]
  double c = 0.5;       // slackness of the approach shaping function [m/s]
  int n = 2;            // order of the integrator shaping function
  double sigma = 1.0;   // effective range of the integrator [m/s]
  double T = 0.02;      // control period [s]

  void validate() const;  // throws ConfigError naming the violated invariant
};

// Piecewise-linear signal over time; constant extrapolation outside the
// breakpoint range (slope 0 there).
struct PiecewiseLinear {
  std::vector<std::array<double, 2>> breakpoints;  // (t, value), t strictly increasing

  double value_at(double t) const;
  double slope_at(double t) const;
  void validate(const char* what) const;
};

struct DisturbanceModel {
  enum class Kind { Constant, GaussianZOH, EmergentFromPhysical };
  Kind kind = Kind::Constant;
  double delta = -0.25;  // Constant value [m/s^2]
  double mean = -0.25;   // GaussianZOH mean [m/s^2]
  double stddev = 0.25;  // GaussianZOH standard deviation [m/s^2]
  std::uint64_t seed = 0;

  void validate() const;
};

struct BackbonePlantParams {
  double tau = 0.5;     // actuator time constant [s]
  double alpha1 = 1.0;  // nominal-to-effective mass ratio

  void validate() const;
};

// Torque-level model. The paper-independent defaults are ordinary
// passenger-car magnitudes.
struct PhysicalPlantParams {
  double m = 1500.0;      // actual mass [kg]
  double m_hat = 1500.0;  // nominal mass used by the low-level controller [kg]
  double J = 2.0;         // rotational inertia [kg m^2]
  double R = 0.3;         // wheel radius [m]
  double eta = 10.0;      // gear ratio
  double mu = 0.01;       // rolling resistance coefficient
  double mu_hat = 0.01;
  double rho = 0.4;       // air drag constant [kg/m]
  double rho_hat = 0.4;
  double g_const = 9.81;  // gravity [m/s^2]
  double tau = 0.5;       // actuator time constant [s]
  PiecewiseLinear grade;  // road inclination phi(t) [rad]; empty means flat
  PiecewiseLinear wind;   // headwind v_w(t) [m/s]; empty means calm

  double effective_mass() const { return m + J / (R * R); }
  void validate() const;
};

// Leader speed profile v_P(t) >= 0 in absolute simulation time.
struct LeaderProfile {
  PiecewiseLinear speed;

  void validate() const;
};

struct ScenarioEvent {
  enum class Kind { CutIn, CutOut, LeaderProfileChange };
  double t = 0.0;
  Kind kind = Kind::CutIn;
  // CutIn: h + leader required. CutOut: optional replacement (h + leader)
  // or none. LeaderProfileChange: leader required.
  std::optional<double> h;
  std::optional<LeaderProfile> leader;

  void validate() const;
};

struct ScenarioSpec {
  std::string name = "custom";
  double duration = 60.0;
  double initial_v_H = 20.0;
  double initial_a_H = 0.0;
  ControllerParams controller;
  std::variant<BackbonePlantParams, PhysicalPlantParams> plant = BackbonePlantParams{};
  DisturbanceModel disturbance;
  std::vector<ScenarioEvent> events;

  bool has_physical_plant() const {
    return std::holds_alternative<PhysicalPlantParams>(plant);
  }
  void validate() const;
};

// Parses and validates a JSON scenario document. Missing parameters take the
// defaults above.
ScenarioSpec load_scenario(const std::string& text);
ScenarioSpec load_scenario_file(const std::string& path);

// Serializes to the same JSON schema; load_scenario(serialize_scenario(s))
// reproduces s.
std::string serialize_scenario(const ScenarioSpec& spec);

// Built-in scenarios: "highway", "local", "freedrive-comparison".
ScenarioSpec builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

}  // namespace longctl
