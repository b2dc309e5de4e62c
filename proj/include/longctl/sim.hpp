#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longctl/config.hpp"
#include "longctl/controller.hpp"

namespace longctl {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One control tick of logged signals. h and v_P are absent in free-driving.
struct TrajectoryRecord {
  double t = 0.0;
  std::optional<double> h;
  std::optional<double> v_P;
  double v_H = 0.0;
  double a_H = 0.0;
  double u = 0.0;
  double u_des = 0.0;
  double a_des = 0.0;
  double v_des = 0.0;
  double e = 0.0;
  double delta = 0.0;
  DrivingMode mode = DrivingMode::FreeDriving;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;  // at t = 0, T, 2T, ..., duration
  std::vector<double> event_times;        // tick-snapped, strictly increasing
  double control_period = 0.02;
};

struct SimOptions {
  int n_sub = 10;  // RK4 substeps per control period
  ControllerVariant variant = ControllerVariant::Nonlinear;
};

// Runs the digital controller at period T over the continuously integrated
// plant. The command is held between ticks (zero-order hold); scenario events
// apply atomically at the first tick at or after their timestamp; v_H is
// clamped at 0 (the vehicle cannot reverse).
Trajectory run_simulation(const ScenarioSpec& spec, std::uint64_t seed,
                          const SimOptions& options = {});

struct Metrics {
  double overshoot = 0.0;    // max(v_H - final v_des, 0) after first crossing [m/s]
  double peak_accel = 0.0;   // max a_H [m/s^2]
  double peak_decel = 0.0;   // min a_H [m/s^2]
  double peak_jerk = 0.0;    // max |da_H/dt| between ticks [m/s^3]
  double min_headway = 0.0;  // min h; +inf when never in car-following [m]
  double settle_time = 0.0;  // last instant |v_H - v_des| > tol, from segment start [s]
  bool collision = false;    // any h <= 0
};

Metrics compute_metrics(std::span<const TrajectoryRecord> records,
                        double tol_settle = 0.2);

// Half-open [start, end) segment boundaries between scenario events; the last
// segment is closed at the final record.
std::vector<std::pair<double, double>> segment_bounds(const Trajectory& traj);

// Records of one segment (includes the final record for the last segment).
std::span<const TrajectoryRecord> segment_records(
    const Trajectory& traj, const std::pair<double, double>& bounds);

// CSV export, fixed column order:
// t,h,v_P,v_H,a_H,u,u_des,a_des,v_des,e,delta,mode
void write_csv(const Trajectory& traj, std::ostream& out);
std::string to_csv(const Trajectory& traj);

// JSON report with per-segment metrics.
std::string metrics_json(const Trajectory& traj, double tol_settle = 0.2);

}  // namespace longctl
