#include "longctl/sim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "longctl/plant.hpp"

namespace longctl {

namespace {

struct LeaderState {
  LeaderProfile profile;
  double h = 0.0;
};

// Backbone plant state advanced by one RK4 substep with u and delta held.
struct BackboneRk {
  const BackbonePlantParams& plant;
  const LeaderProfile* leader;  // null in free-driving
  double u;
  double delta;

  void step(double t, double dt, std::optional<double>& h, double& v_H,
            double& a_H) const {
    auto deriv = [&](double time, double hh, double v, double a) {
      BackboneState s{leader ? std::optional<double>(hh) : std::nullopt, v, a};
      const std::optional<double> v_P =
          leader ? std::optional<double>(leader->speed.value_at(time)) : std::nullopt;
      return backbone_deriv(s, u, delta, v_P, plant);
    };
    const double h0 = h.value_or(0.0);
    const BackboneState k1 = deriv(t, h0, v_H, a_H);
    const BackboneState k2 = deriv(t + dt / 2, h0 + dt / 2 * k1.h.value_or(0.0),
                                   v_H + dt / 2 * k1.v_H, a_H + dt / 2 * k1.a_H);
    const BackboneState k3 = deriv(t + dt / 2, h0 + dt / 2 * k2.h.value_or(0.0),
                                   v_H + dt / 2 * k2.v_H, a_H + dt / 2 * k2.a_H);
    const BackboneState k4 = deriv(t + dt, h0 + dt * k3.h.value_or(0.0),
                                   v_H + dt * k3.v_H, a_H + dt * k3.a_H);
    if (h) {
      *h = h0 + dt / 6 *
                    (k1.h.value_or(0.0) + 2 * k2.h.value_or(0.0) +
                     2 * k3.h.value_or(0.0) + k4.h.value_or(0.0));
    }
    v_H += dt / 6 * (k1.v_H + 2 * k2.v_H + 2 * k3.v_H + k4.v_H);
    a_H += dt / 6 * (k1.a_H + 2 * k2.a_H + 2 * k3.a_H + k4.a_H);
  }
};

// Physical plant state (h, v_H, T) advanced by one RK4 substep; the low-level
// torque law runs continuously inside the derivative.
struct PhysicalRk {
  const PhysicalPlantParams& plant;
  const LeaderProfile* leader;
  double u;

  struct Deriv {
    double h, v_H, torque;
  };

  Deriv deriv(double time, double v, double torque) const {
    const double phi_hat = plant.grade.value_at(time);
    const double T_des = low_level_torque(u, v, plant, phi_hat);
    const PhysicalState d = physical_deriv({v, torque}, T_des, time, plant);
    const double dh = leader ? leader->speed.value_at(time) - v : 0.0;
    return {dh, d.v_H, d.torque};
  }

  void step(double t, double dt, std::optional<double>& h, double& v_H,
            double& torque) const {
    const double h0 = h.value_or(0.0);
    const Deriv k1 = deriv(t, v_H, torque);
    const Deriv k2 = deriv(t + dt / 2, v_H + dt / 2 * k1.v_H, torque + dt / 2 * k1.torque);
    const Deriv k3 = deriv(t + dt / 2, v_H + dt / 2 * k2.v_H, torque + dt / 2 * k2.torque);
    const Deriv k4 = deriv(t + dt, v_H + dt * k3.v_H, torque + dt * k3.torque);
    if (h) *h = h0 + dt / 6 * (k1.h + 2 * k2.h + 2 * k3.h + k4.h);
    v_H += dt / 6 * (k1.v_H + 2 * k2.v_H + 2 * k3.v_H + k4.v_H);
    torque += dt / 6 * (k1.torque + 2 * k2.torque + 2 * k3.torque + k4.torque);
  }
};

long tick_of(double t, double T) {
  return static_cast<long>(std::ceil(t / T - 1e-9));
}

}  // namespace

Trajectory run_simulation(const ScenarioSpec& spec, std::uint64_t seed,
                          const SimOptions& options) {
  spec.validate();
  if (options.n_sub < 1) throw SimulationError("n_sub must be >= 1");

  const ControllerParams& params = spec.controller;
  const double T = params.T;
  const long n_ticks = static_cast<long>(std::llround(spec.duration / T));

  const bool physical = spec.has_physical_plant();
  const BackbonePlantParams* backbone =
      std::get_if<BackbonePlantParams>(&spec.plant);
  const PhysicalPlantParams* phys = std::get_if<PhysicalPlantParams>(&spec.plant);
  const bool emergent =
      spec.disturbance.kind == DisturbanceModel::Kind::EmergentFromPhysical;
  DisturbanceSampler sampler(spec.disturbance, seed);

  std::optional<double> h;
  double v_H = spec.initial_v_H;
  double a_H = spec.initial_a_H;
  double torque = 0.0;
  if (physical) {
    // Torque consistent with the requested initial acceleration.
    const double phi = phys->grade.value_at(0.0);
    const double v_w = phys->wind.value_at(0.0);
    torque = phys->R / phys->eta *
             (phys->effective_mass() * a_H +
              phys->m * phys->g_const * std::sin(phi) +
              phys->mu * phys->m * phys->g_const * std::cos(phi) +
              phys->rho * (v_H + v_w) * (v_H + v_w));
  }

  std::optional<LeaderState> leader;
  ControllerState ctrl;
  std::size_t next_event = 0;

  Trajectory traj;
  traj.control_period = T;
  traj.records.reserve(static_cast<std::size_t>(n_ticks) + 1);

  for (long k = 0; k <= n_ticks; ++k) {
    const double t = static_cast<double>(k) * T;

    while (next_event < spec.events.size() &&
           tick_of(spec.events[next_event].t, T) <= k) {
      const ScenarioEvent& ev = spec.events[next_event];
      switch (ev.kind) {
        case ScenarioEvent::Kind::CutIn:
          leader = LeaderState{*ev.leader, *ev.h};
          break;
        case ScenarioEvent::Kind::CutOut:
          if (ev.leader) {
            leader = LeaderState{*ev.leader, *ev.h};
          } else {
            leader.reset();
          }
          break;
        case ScenarioEvent::Kind::LeaderProfileChange:
          if (leader) leader->profile = *ev.leader;
          break;
      }
      traj.event_times.push_back(t);
      ++next_event;
    }
    h = leader ? std::optional<double>(leader->h) : std::nullopt;

    if (physical) {
      const double phi_hat = phys->grade.value_at(t);
      const double T_des = low_level_torque(ctrl.u, v_H, *phys, phi_hat);
      a_H = physical_deriv({v_H, torque}, T_des, t, *phys).v_H;
    }

    Measurement meas;
    meas.v_H = v_H;
    if (leader) {
      meas.leader = LeaderMeasurement{leader->profile.speed.value_at(t), leader->h};
    }

    const double delta =
        emergent ? emergent_delta(v_H, a_H, t, *phys) : sampler.next();

    const StepResult step = baseline_step(ctrl, meas, T, params, options.variant);
    ctrl = step.state;

    TrajectoryRecord rec;
    rec.t = t;
    rec.h = h;
    if (meas.leader) rec.v_P = meas.leader->v_P;
    rec.v_H = v_H;
    rec.a_H = a_H;
    rec.u = step.u;
    rec.u_des = step.u_des;
    rec.a_des = step.a_des;
    rec.v_des = step.v_des;
    rec.e = ctrl.e;
    rec.delta = delta;
    rec.mode = ctrl.mode;
    traj.records.push_back(rec);

    if (k == n_ticks) break;

    const double dt = T / options.n_sub;
    const LeaderProfile* profile = leader ? &leader->profile : nullptr;
    for (int s = 0; s < options.n_sub; ++s) {
      const double ts = t + s * dt;
      if (physical) {
        PhysicalRk rk{*phys, profile, ctrl.u};
        rk.step(ts, dt, h, v_H, torque);
      } else {
        BackboneRk rk{*backbone, profile, ctrl.u, delta};
        rk.step(ts, dt, h, v_H, a_H);
      }
      if (v_H < 0.0) {
        // Standstill: the plant model would reverse, the vehicle does not.
        v_H = 0.0;
        a_H = std::max(a_H, 0.0);
      }
    }
    if (leader) leader->h = *h;

    const bool finite = std::isfinite(v_H) && std::isfinite(a_H) &&
                        std::isfinite(torque) &&
                        (!h || std::isfinite(*h));
    if (!finite) {
      std::ostringstream msg;
      msg << "simulation diverged at tick " << k << " (t=" << t << " s)";
      throw SimulationError(msg.str());
    }
  }
  return traj;
}

Metrics compute_metrics(std::span<const TrajectoryRecord> records,
                        double tol_settle) {
  if (records.empty()) {
    throw std::invalid_argument("compute_metrics: empty trajectory");
  }
  Metrics m;
  m.peak_accel = -std::numeric_limits<double>::infinity();
  m.peak_decel = std::numeric_limits<double>::infinity();
  m.min_headway = std::numeric_limits<double>::infinity();

  const double v_des_final = records.back().v_des;
  const double diff0 = records.front().v_H - v_des_final;
  bool crossed = diff0 == 0.0;
  const double t0 = records.front().t;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const TrajectoryRecord& r = records[i];
    m.peak_accel = std::max(m.peak_accel, r.a_H);
    m.peak_decel = std::min(m.peak_decel, r.a_H);
    if (i > 0) {
      const double dt = r.t - records[i - 1].t;
      m.peak_jerk = std::max(m.peak_jerk, std::abs(r.a_H - records[i - 1].a_H) / dt);
    }
    if (r.h) {
      m.min_headway = std::min(m.min_headway, *r.h);
      if (*r.h <= 0.0) m.collision = true;
    }
    const double diff = r.v_H - v_des_final;
    if (!crossed && diff * diff0 <= 0.0) crossed = true;
    if (crossed) m.overshoot = std::max(m.overshoot, diff);
    if (std::abs(r.v_H - r.v_des) > tol_settle) m.settle_time = r.t - t0;
  }
  m.overshoot = std::max(m.overshoot, 0.0);
  return m;
}

std::vector<std::pair<double, double>> segment_bounds(const Trajectory& traj) {
  std::vector<std::pair<double, double>> out;
  if (traj.records.empty()) return out;
  const double t_end = traj.records.back().t;
  double start = traj.records.front().t;
  for (double te : traj.event_times) {
    if (te > start && te < t_end) {
      out.emplace_back(start, te);
      start = te;
    }
  }
  out.emplace_back(start, t_end);
  return out;
}

std::span<const TrajectoryRecord> segment_records(
    const Trajectory& traj, const std::pair<double, double>& bounds) {
  const auto& recs = traj.records;
  const double t_end = recs.back().t;
  std::size_t first = 0;
  while (first < recs.size() && recs[first].t < bounds.first - 1e-12) ++first;
  std::size_t last = first;
  const bool closed = bounds.second >= t_end - 1e-12;
  while (last < recs.size() &&
         (recs[last].t < bounds.second - 1e-12 ||
          (closed && recs[last].t <= bounds.second + 1e-12))) {
    ++last;
  }
  return std::span<const TrajectoryRecord>(recs).subspan(first, last - first);
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  out += buf;
}

}  // namespace

std::string to_csv(const Trajectory& traj) {
  std::string out = "t,h,v_P,v_H,a_H,u,u_des,a_des,v_des,e,delta,mode\n";
  for (const auto& r : traj.records) {
    append_number(out, r.t);
    out += ',';
    if (r.h) append_number(out, *r.h);
    out += ',';
    if (r.v_P) append_number(out, *r.v_P);
    out += ',';
    append_number(out, r.v_H);
    out += ',';
    append_number(out, r.a_H);
    out += ',';
    append_number(out, r.u);
    out += ',';
    append_number(out, r.u_des);
    out += ',';
    append_number(out, r.a_des);
    out += ',';
    append_number(out, r.v_des);
    out += ',';
    append_number(out, r.e);
    out += ',';
    append_number(out, r.delta);
    out += ',';
    out += r.mode == DrivingMode::FreeDriving ? "free" : "follow";
    out += '\n';
  }
  return out;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  out << to_csv(traj);
}

std::string metrics_json(const Trajectory& traj, double tol_settle) {
  nlohmann::json j;
  j["control_period"] = traj.control_period;
  j["tol_settle"] = tol_settle;
  bool any_collision = false;
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& b : segment_bounds(traj)) {
    const Metrics m = compute_metrics(segment_records(traj, b), tol_settle);
    nlohmann::json sj;
    sj["start"] = b.first;
    sj["end"] = b.second;
    sj["overshoot"] = m.overshoot;
    sj["peak_accel"] = m.peak_accel;
    sj["peak_decel"] = m.peak_decel;
    sj["peak_jerk"] = m.peak_jerk;
    if (std::isfinite(m.min_headway)) {
      sj["min_headway"] = m.min_headway;
    } else {
      sj["min_headway"] = nullptr;
    }
    sj["settle_time"] = m.settle_time;
    sj["collision"] = m.collision;
    any_collision = any_collision || m.collision;
    segs.push_back(std::move(sj));
  }
  j["segments"] = std::move(segs);
  j["collision"] = any_collision;
  return j.dump(2);
}

}  // namespace longctl
