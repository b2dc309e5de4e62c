#include "longctl/sim.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"

using namespace longctl;

namespace {

std::string data_path(const std::string& name) {
  return std::string(LONGCTL_TEST_DATA_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ScenarioSpec tiny_spec() { return load_scenario_file(data_path("tiny.json")); }

}  // namespace

TEST_CASE("record grid and event snapping") {
  ScenarioSpec spec = tiny_spec();
  spec.events[0].t = 0.03;  // between ticks, must land on the next one
  const Trajectory traj = run_simulation(spec, 1);

  REQUIRE(traj.records.size() == 51);  // 0..1 s inclusive at T = 0.02
  CHECK(traj.records.front().t == 0.0);
  CHECK(traj.records.back().t == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(traj.event_times.size() == 1);
  CHECK(traj.event_times[0] == doctest::Approx(0.04).epsilon(1e-12));

  // free-driving before the cut-in, car-following after
  for (const auto& rec : traj.records) {
    if (rec.t < 0.04 - 1e-9) {
      CHECK(rec.mode == DrivingMode::FreeDriving);
      CHECK(!rec.h.has_value());
      CHECK(!rec.v_P.has_value());
    } else {
      CHECK(rec.mode == DrivingMode::CarFollowing);
      REQUIRE(rec.h.has_value());
      REQUIRE(rec.v_P.has_value());
    }
  }
}

TEST_CASE("cut-out without a new leader returns to free driving") {
  ScenarioSpec spec = tiny_spec();
  ScenarioEvent out;
  out.t = 0.8;
  out.kind = ScenarioEvent::Kind::CutOut;
  spec.events.push_back(out);
  const Trajectory traj = run_simulation(spec, 1);

  bool saw_follow = false, saw_free_after = false;
  for (const auto& rec : traj.records) {
    if (rec.t >= 0.5 && rec.t < 0.8 - 1e-9) {
      CHECK(rec.mode == DrivingMode::CarFollowing);
      saw_follow = true;
    }
    if (rec.t >= 0.8 - 1e-9) {
      CHECK(rec.mode == DrivingMode::FreeDriving);
      CHECK(!rec.h.has_value());
      saw_free_after = true;
    }
  }
  CHECK(saw_follow);
  CHECK(saw_free_after);
}

TEST_CASE("leader profile drives the gap kinematics") {
  ScenarioSpec spec = tiny_spec();
  const Trajectory traj = run_simulation(spec, 1);

  // gap rate matches v_P - v_H between consecutive ticks (trapezoid accuracy)
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    const auto& a = traj.records[i - 1];
    const auto& b = traj.records[i];
    if (!a.h || !b.h) continue;
    const double dt = b.t - a.t;
    const double pred = *a.h + dt * 0.5 * ((*a.v_P - a.v_H) + (*b.v_P - b.v_H));
    CHECK(*b.h == doctest::Approx(pred).epsilon(1e-4));
  }
}

TEST_CASE("command rate is bounded by r_max") {
  const ScenarioSpec spec = builtin_scenario("highway");
  const Trajectory traj = run_simulation(spec, 7);
  const double bound =
      spec.controller.r_max * spec.controller.T * (1.0 + 1e-9);
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    CHECK(std::abs(traj.records[i].u - traj.records[i - 1].u) <= bound);
  }
}

TEST_CASE("speed clamps at standstill") {
  ScenarioSpec spec = tiny_spec();
  spec.events.clear();
  spec.initial_v_H = 0.2;
  spec.initial_a_H = -3.0;  // braking into the stop
  spec.disturbance.delta = -1.0;
  const Trajectory traj = run_simulation(spec, 1);
  bool stopped = false;
  for (const auto& rec : traj.records) {
    CHECK(rec.v_H >= 0.0);
    if (rec.v_H == 0.0) stopped = true;
  }
  CHECK(stopped);
}

TEST_CASE("determinism") {
  ScenarioSpec spec = tiny_spec();
  spec.disturbance.kind = DisturbanceModel::Kind::GaussianZOH;
  const std::string a = to_csv(run_simulation(spec, 42));
  const std::string b = to_csv(run_simulation(spec, 42));
  CHECK(a == b);
  const std::string c = to_csv(run_simulation(spec, 43));
  CHECK(a != c);
}

TEST_CASE("integration converges under substep refinement") {
  const ScenarioSpec spec = tiny_spec();
  SimOptions coarse, fine;
  coarse.n_sub = 10;
  fine.n_sub = 20;
  const Trajectory a = run_simulation(spec, 1, coarse);
  const Trajectory b = run_simulation(spec, 1, fine);
  REQUIRE(a.records.size() == b.records.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    max_err = std::max(max_err, std::abs(a.records[i].v_H - b.records[i].v_H));
  }
  CHECK(max_err < 1e-6);
}

TEST_CASE("compute_metrics on hand-built records") {
  std::vector<TrajectoryRecord> recs(5);
  for (int i = 0; i < 5; ++i) {
    recs[i].t = 0.02 * i;
    recs[i].v_des = 10.0;
  }
  recs[0].v_H = 9.0;
  recs[1].v_H = 10.5;  // crossed, overshoot 0.5
  recs[2].v_H = 10.2;
  recs[3].v_H = 10.05;
  recs[4].v_H = 10.0;
  recs[1].a_H = 2.0;
  recs[2].a_H = -1.0;  // jerk |Δa|/dt = 150

  const Metrics m = compute_metrics(recs, 0.1);
  CHECK(m.overshoot == doctest::Approx(0.5));
  CHECK(m.peak_accel == doctest::Approx(2.0));
  CHECK(m.peak_decel == doctest::Approx(-1.0));
  CHECK(m.peak_jerk == doctest::Approx(150.0));
  CHECK(m.min_headway == std::numeric_limits<double>::infinity());
  CHECK(!m.collision);
  // last violation of |v_H - v_des| > 0.1 is at index 2
  CHECK(m.settle_time == doctest::Approx(0.04));

  recs[3].h = -0.5;
  const Metrics hit = compute_metrics(recs, 0.1);
  CHECK(hit.collision);
  CHECK(hit.min_headway == -0.5);
}

TEST_CASE("segment bounds split at events") {
  const Trajectory traj = run_simulation(builtin_scenario("highway"), 1);
  const auto bounds = segment_bounds(traj);
  REQUIRE(bounds.size() == 5);
  CHECK(bounds[0].first == 0.0);
  CHECK(bounds[0].second == doctest::Approx(20.0));
  CHECK(bounds[4].second == doctest::Approx(100.0));

  const auto first = segment_records(traj, bounds[0]);
  CHECK(first.front().t == 0.0);
  CHECK(first.back().t < 20.0);
  const auto last = segment_records(traj, bounds[4]);
  CHECK(last.back().t == doctest::Approx(100.0));
}

TEST_CASE("csv format") {
  const Trajectory traj = run_simulation(tiny_spec(), 1);
  const std::string csv = to_csv(traj);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "t,h,v_P,v_H,a_H,u,u_des,a_des,v_des,e,delta,mode");
  // free-driving rows leave h and v_P empty
  CHECK(csv.find("\n0,,,18,") != std::string::npos);
  CHECK(csv.find(",free\n") != std::string::npos);
  CHECK(csv.find(",follow\n") != std::string::npos);
}

TEST_CASE("golden trajectory") {
  const Trajectory traj = run_simulation(tiny_spec(), 1);
  CHECK(to_csv(traj) == slurp(data_path("golden_tiny.csv")));
}

TEST_CASE("metrics_json reports per segment") {
  const std::string json = metrics_json(run_simulation(tiny_spec(), 1));
  CHECK(json.find("\"segments\"") != std::string::npos);
  CHECK(json.find("\"overshoot\"") != std::string::npos);
  CHECK(json.find("\"collision\"") != std::string::npos);
}
