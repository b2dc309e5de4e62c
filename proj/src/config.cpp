#include "longctl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace longctl {

using nlohmann::json;

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_positive(double v, const char* field) {
  check(v > 0.0 && std::isfinite(v), std::string(field) + " must be positive");
}

}  // namespace

void ControllerParams::validate() const {
  check_positive(h0, "h0");
  check_positive(t_h, "t_h");
  check_positive(h_min, "h_min");
  check_positive(eps, "eps");
  check_positive(v_max, "v_max");
  check_positive(r_max, "r_max");
  check_positive(a_sat, "a_sat");
  check(a_min < 0.0, "a_min must be negative");
  check_positive(a_com, "a_com");
  check(a_com <= a_sat, "a_com <= a_sat violated");
  check_positive(k_v, "k_v");
  check_positive(k_h, "k_h");
  check_positive(k_i, "k_i");
  check_positive(k_u, "k_u");
  check_positive(c, "c");
  check(n >= 1, "n must be >= 1");
  check_positive(sigma, "sigma");
  check_positive(T, "T");
  check(h_min <= h0, "h_min <= h0 violated");
}

void PiecewiseLinear::validate(const char* what) const {
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    check(std::isfinite(breakpoints[i][0]) && std::isfinite(breakpoints[i][1]),
          std::string(what) + ": non-finite breakpoint");
    if (i > 0) {
      check(breakpoints[i][0] > breakpoints[i - 1][0],
            std::string(what) + ": breakpoint times not strictly increasing");
    }
  }
}

double PiecewiseLinear::value_at(double t) const {
  if (breakpoints.empty()) return 0.0;
  if (t <= breakpoints.front()[0]) return breakpoints.front()[1];
  if (t >= breakpoints.back()[0]) return breakpoints.back()[1];
  auto it = std::upper_bound(
      breakpoints.begin(), breakpoints.end(), t,
      [](double lhs, const std::array<double, 2>& bp) { return lhs < bp[0]; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo[0]) / (hi[0] - lo[0]);
  return lo[1] + w * (hi[1] - lo[1]);
}

double PiecewiseLinear::slope_at(double t) const {
  if (breakpoints.size() < 2) return 0.0;
  if (t < breakpoints.front()[0] || t > breakpoints.back()[0]) return 0.0;
  auto it = std::upper_bound(
      breakpoints.begin(), breakpoints.end(), t,
      [](double lhs, const std::array<double, 2>& bp) { return lhs < bp[0]; });
  if (it == breakpoints.begin()) ++it;
  if (it == breakpoints.end()) --it;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  return (hi[1] - lo[1]) / (hi[0] - lo[0]);
}

void DisturbanceModel::validate() const {
  check(stddev >= 0.0 && std::isfinite(stddev), "disturbance stddev must be >= 0");
  check(std::isfinite(delta) && std::isfinite(mean), "disturbance values must be finite");
}

void BackbonePlantParams::validate() const {
  check_positive(tau, "tau");
  check_positive(alpha1, "alpha1");
}

void PhysicalPlantParams::validate() const {
  check_positive(m, "m");
  check_positive(m_hat, "m_hat");
  check_positive(J, "J");
  check_positive(R, "R");
  check_positive(eta, "eta");
  check_positive(tau, "tau");
  check(mu >= 0.0 && mu_hat >= 0.0, "mu must be >= 0");
  check(rho >= 0.0 && rho_hat >= 0.0, "rho must be >= 0");
  check_positive(g_const, "g_const");
  grade.validate("grade");
  wind.validate("wind");
}

void LeaderProfile::validate() const {
  speed.validate("leader profile");
  check(!speed.breakpoints.empty(), "leader profile needs at least one breakpoint");
  for (const auto& bp : speed.breakpoints) {
    check(bp[1] >= 0.0, "leader profile speed must be >= 0");
  }
}

void ScenarioEvent::validate() const {
  check(std::isfinite(t) && t >= 0.0, "event time must be finite and >= 0");
  switch (kind) {
    case Kind::CutIn:
      check(h.has_value() && leader.has_value(), "cut_in event requires h and leader");
      break;
    case Kind::CutOut:
      check(h.has_value() == leader.has_value(),
            "cut_out replacement requires both h and leader or neither");
      break;
    case Kind::LeaderProfileChange:
      check(!h.has_value() && leader.has_value(),
            "leader_profile event requires leader and no h");
      break;
  }
  if (h) check(*h > 0.0, "event h must be positive");
  if (leader) leader->validate();
}

void ScenarioSpec::validate() const {
  check(duration > 0.0 && std::isfinite(duration), "duration must be positive");
  check(initial_v_H >= 0.0 && std::isfinite(initial_v_H), "initial v_H must be >= 0");
  check(std::isfinite(initial_a_H), "initial a_H must be finite");
  controller.validate();
  std::visit([](const auto& p) { p.validate(); }, plant);
  disturbance.validate();
  if (disturbance.kind == DisturbanceModel::Kind::EmergentFromPhysical) {
    check(has_physical_plant(), "emergent disturbance requires a physical plant");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    events[i].validate();
    check(events[i].t <= duration, "event time exceeds duration");
    if (i > 0) {
      check(events[i].t > events[i - 1].t, "events not strictly increasing");
    }
  }
}

namespace {

PiecewiseLinear profile_from_json(const json& j, const char* field) {
  check(j.is_object() && j.contains("breakpoints"),
        std::string(field) + ": expected {breakpoints:[[t,v],...]}");
  PiecewiseLinear out;
  for (const auto& bp : j.at("breakpoints")) {
    check(bp.is_array() && bp.size() == 2, std::string(field) + ": breakpoint must be [t, v]");
    out.breakpoints.push_back({bp[0].get<double>(), bp[1].get<double>()});
  }
  return out;
}

json profile_to_json(const PiecewiseLinear& p) {
  json bps = json::array();
  for (const auto& bp : p.breakpoints) bps.push_back({bp[0], bp[1]});
  return json{{"breakpoints", bps}};
}

template <typename T>
void maybe_get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ControllerParams controller_from_json(const json& j) {
  ControllerParams p;
  maybe_get(j, "h0", p.h0);
  maybe_get(j, "t_h", p.t_h);
  maybe_get(j, "h_min", p.h_min);
  maybe_get(j, "eps", p.eps);
  maybe_get(j, "v_max", p.v_max);
  maybe_get(j, "r_max", p.r_max);
  maybe_get(j, "a_sat", p.a_sat);
  maybe_get(j, "a_min", p.a_min);
  maybe_get(j, "a_com", p.a_com);
  maybe_get(j, "k_v", p.k_v);
  maybe_get(j, "k_h", p.k_h);
  maybe_get(j, "k_i", p.k_i);
  maybe_get(j, "k_u", p.k_u);
  maybe_get(j, "c", p.c);
  maybe_get(j, "n", p.n);
  maybe_get(j, "sigma", p.sigma);
  maybe_get(j, "T", p.T);
  return p;
}

json controller_to_json(const ControllerParams& p) {
  return json{{"h0", p.h0},       {"t_h", p.t_h},     {"h_min", p.h_min},
              {"eps", p.eps},     {"v_max", p.v_max}, {"r_max", p.r_max},
              {"a_sat", p.a_sat}, {"a_min", p.a_min}, {"a_com", p.a_com},
              {"k_v", p.k_v},     {"k_h", p.k_h},     {"k_i", p.k_i},
              {"k_u", p.k_u},     {"c", p.c},         {"n", p.n},
              {"sigma", p.sigma}, {"T", p.T}};
}

}  // namespace

ScenarioSpec load_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  check(j.is_object(), "scenario document must be a JSON object");

  ScenarioSpec spec;
  maybe_get(j, "name", spec.name);
  maybe_get(j, "duration", spec.duration);
  if (j.contains("initial")) {
    const json& init = j.at("initial");
    maybe_get(init, "v_H", spec.initial_v_H);
    maybe_get(init, "a_H", spec.initial_a_H);
  }
  if (j.contains("controller")) {
    spec.controller = controller_from_json(j.at("controller"));
  }
  if (j.contains("plant")) {
    const json& pj = j.at("plant");
    const std::string kind = pj.value("kind", "backbone");
    if (kind == "backbone") {
      BackbonePlantParams p;
      maybe_get(pj, "tau", p.tau);
      maybe_get(pj, "alpha1", p.alpha1);
      spec.plant = p;
    } else if (kind == "physical") {
      PhysicalPlantParams p;
      maybe_get(pj, "m", p.m);
      maybe_get(pj, "m_hat", p.m_hat);
      maybe_get(pj, "J", p.J);
      maybe_get(pj, "R", p.R);
      maybe_get(pj, "eta", p.eta);
      maybe_get(pj, "mu", p.mu);
      maybe_get(pj, "mu_hat", p.mu_hat);
      maybe_get(pj, "rho", p.rho);
      maybe_get(pj, "rho_hat", p.rho_hat);
      maybe_get(pj, "g", p.g_const);
      maybe_get(pj, "tau", p.tau);
      if (pj.contains("grade")) p.grade = profile_from_json(pj.at("grade"), "grade");
      if (pj.contains("wind")) p.wind = profile_from_json(pj.at("wind"), "wind");
      spec.plant = p;
    } else {
      throw ConfigError("plant.kind must be \"backbone\" or \"physical\"");
    }
  }
  if (j.contains("disturbance")) {
    const json& dj = j.at("disturbance");
    const std::string kind = dj.value("kind", "constant");
    if (kind == "constant") {
      spec.disturbance.kind = DisturbanceModel::Kind::Constant;
      maybe_get(dj, "delta", spec.disturbance.delta);
    } else if (kind == "gaussian") {
      spec.disturbance.kind = DisturbanceModel::Kind::GaussianZOH;
      maybe_get(dj, "mean", spec.disturbance.mean);
      maybe_get(dj, "std", spec.disturbance.stddev);
    } else if (kind == "emergent") {
      spec.disturbance.kind = DisturbanceModel::Kind::EmergentFromPhysical;
    } else {
      throw ConfigError("disturbance.kind must be constant, gaussian or emergent");
    }
    maybe_get(dj, "seed", spec.disturbance.seed);
  }
  if (j.contains("events")) {
    for (const auto& ej : j.at("events")) {
      ScenarioEvent ev;
      check(ej.contains("t") && ej.contains("kind"), "event requires t and kind");
      ev.t = ej.at("t").get<double>();
      const std::string kind = ej.at("kind").get<std::string>();
      if (kind == "cut_in") {
        ev.kind = ScenarioEvent::Kind::CutIn;
      } else if (kind == "cut_out") {
        ev.kind = ScenarioEvent::Kind::CutOut;
      } else if (kind == "leader_profile") {
        ev.kind = ScenarioEvent::Kind::LeaderProfileChange;
      } else {
        throw ConfigError("event kind must be cut_in, cut_out or leader_profile");
      }
      if (ej.contains("h")) ev.h = ej.at("h").get<double>();
      if (ej.contains("leader")) {
        ev.leader = LeaderProfile{profile_from_json(ej.at("leader"), "leader")};
      }
      spec.events.push_back(std::move(ev));
    }
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["duration"] = spec.duration;
  j["initial"] = {{"v_H", spec.initial_v_H}, {"a_H", spec.initial_a_H}};
  j["controller"] = controller_to_json(spec.controller);
  if (const auto* bp = std::get_if<BackbonePlantParams>(&spec.plant)) {
    j["plant"] = {{"kind", "backbone"}, {"tau", bp->tau}, {"alpha1", bp->alpha1}};
  } else {
    const auto& p = std::get<PhysicalPlantParams>(spec.plant);
    j["plant"] = {{"kind", "physical"}, {"m", p.m},       {"m_hat", p.m_hat},
                  {"J", p.J},           {"R", p.R},       {"eta", p.eta},
                  {"mu", p.mu},         {"mu_hat", p.mu_hat},
                  {"rho", p.rho},       {"rho_hat", p.rho_hat},
                  {"g", p.g_const},     {"tau", p.tau}};
    if (!p.grade.breakpoints.empty()) j["plant"]["grade"] = profile_to_json(p.grade);
    if (!p.wind.breakpoints.empty()) j["plant"]["wind"] = profile_to_json(p.wind);
  }
  switch (spec.disturbance.kind) {
    case DisturbanceModel::Kind::Constant:
      j["disturbance"] = {{"kind", "constant"}, {"delta", spec.disturbance.delta}};
      break;
    case DisturbanceModel::Kind::GaussianZOH:
      j["disturbance"] = {{"kind", "gaussian"},
                          {"mean", spec.disturbance.mean},
                          {"std", spec.disturbance.stddev}};
      break;
    case DisturbanceModel::Kind::EmergentFromPhysical:
      j["disturbance"] = {{"kind", "emergent"}};
      break;
  }
  j["disturbance"]["seed"] = spec.disturbance.seed;
  json events = json::array();
  for (const auto& ev : spec.events) {
    json ej;
    ej["t"] = ev.t;
    switch (ev.kind) {
      case ScenarioEvent::Kind::CutIn: ej["kind"] = "cut_in"; break;
      case ScenarioEvent::Kind::CutOut: ej["kind"] = "cut_out"; break;
      case ScenarioEvent::Kind::LeaderProfileChange: ej["kind"] = "leader_profile"; break;
    }
    if (ev.h) ej["h"] = *ev.h;
    if (ev.leader) ej["leader"] = profile_to_json(ev.leader->speed);
    events.push_back(std::move(ej));
  }
  j["events"] = std::move(events);
  return j.dump(2);
}

namespace {

LeaderProfile constant_leader(double v) {
  return LeaderProfile{PiecewiseLinear{{{0.0, v}}}};
}

LeaderProfile ramp_leader(double t0, double v0, double t1, double v1) {
  return LeaderProfile{PiecewiseLinear{{{t0, v0}, {t1, v1}}}};
}

ScenarioEvent cut_in(double t, double h, LeaderProfile leader) {
  ScenarioEvent ev;
  ev.t = t;
  ev.kind = ScenarioEvent::Kind::CutIn;
  ev.h = h;
  ev.leader = std::move(leader);
  return ev;
}

ScenarioEvent cut_out(double t, std::optional<double> h = {},
                      std::optional<LeaderProfile> leader = {}) {
  ScenarioEvent ev;
  ev.t = t;
  ev.kind = ScenarioEvent::Kind::CutOut;
  ev.h = h;
  ev.leader = std::move(leader);
  return ev;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"highway", "local", "freedrive-comparison"};
}

ScenarioSpec builtin_scenario(const std::string& name) {
  ScenarioSpec spec;
  spec.name = name;
  if (name == "highway") {
    // Free-driving start at 25 m/s, then cut-in/cut-out changes every 20 s.
    spec.duration = 100.0;
    spec.initial_v_H = 25.0;
    spec.events = {
        cut_in(20.0, 60.0, constant_leader(25.0)),
        cut_in(40.0, 15.0, constant_leader(20.0)),
        cut_out(60.0, 40.0, constant_leader(25.0)),
        cut_in(80.0, 10.0, constant_leader(30.0)),
    };
  } else if (name == "local") {
    // Urban driving: leaders merge in and turn off while accelerating or
    // decelerating. Ramp rates are not prescribed anywhere; these are chosen
    // to keep the speeds in a plausible urban range.
    spec.duration = 100.0;
    spec.initial_v_H = 15.0;
    spec.controller.v_max = 20.0;
    spec.events = {
        cut_in(20.0, 30.0, ramp_leader(20.0, 22.0, 40.0, 10.0)),
        cut_in(40.0, 20.0, ramp_leader(40.0, 8.0, 60.0, 18.0)),
        cut_in(60.0, 30.0, ramp_leader(60.0, 22.0, 76.0, 6.0)),
        cut_in(80.0, 20.0, ramp_leader(80.0, 8.0, 100.0, 20.0)),
    };
  } else if (name == "freedrive-comparison") {
    spec.duration = 60.0;
    spec.initial_v_H = 20.0;
  } else {
    throw ConfigError("unknown builtin scenario: " + name);
  }
  spec.validate();
  return spec;
}

}  // namespace longctl
