#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "longctl/analysis.hpp"
#include "longctl/config.hpp"
#include "longctl/plot.hpp"
#include "longctl/sim.hpp"

namespace {

using namespace longctl;

struct CommonFlags {
  std::string out_dir = ".";
  bool svg = false;
  std::optional<std::uint64_t> seed;
  std::string disturbance;
  std::optional<double> alpha1;
  std::optional<double> duration;
  double tol_settle = 0.2;
  std::vector<std::string> params;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out", flags.out_dir, "Output directory");
  cmd->add_flag("--svg", flags.svg, "Also emit SVG line plots");
  cmd->add_option("--seed", flags.seed, "RNG seed for the disturbance stream");
  cmd->add_option("--disturbance", flags.disturbance,
                  "Disturbance model: constant|gaussian|emergent")
      ->check(CLI::IsMember({"constant", "gaussian", "emergent"}));
  cmd->add_option("--alpha1", flags.alpha1, "Backbone mass ratio override");
  cmd->add_option("--duration", flags.duration, "Scenario duration override [s]");
  cmd->add_option("--tol-settle", flags.tol_settle,
                  "Settle tolerance for metrics [m/s]");
  cmd->add_option("--param", flags.params,
                  "Controller/plant override key=value (repeatable)");
}

void apply_param(ScenarioSpec& spec, const std::string& kv) {
  const auto pos = kv.find('=');
  if (pos == std::string::npos) {
    throw ConfigError("--param expects key=value, got: " + kv);
  }
  const std::string key = kv.substr(0, pos);
  const double value = std::stod(kv.substr(pos + 1));
  ControllerParams& c = spec.controller;
  const std::map<std::string, double*> fields = {
      {"h0", &c.h0},       {"t_h", &c.t_h},     {"h_min", &c.h_min},
      {"eps", &c.eps},     {"v_max", &c.v_max}, {"r_max", &c.r_max},
      {"a_sat", &c.a_sat}, {"a_min", &c.a_min}, {"a_com", &c.a_com},
      {"k_v", &c.k_v},     {"k_h", &c.k_h},     {"k_i", &c.k_i},
      {"k_u", &c.k_u},     {"c", &c.c},         {"sigma", &c.sigma},
      {"T", &c.T}};
  if (auto it = fields.find(key); it != fields.end()) {
    *it->second = value;
    return;
  }
  if (key == "n") {
    c.n = static_cast<int>(value);
    return;
  }
  if (key == "tau") {
    std::visit([&](auto& p) { p.tau = value; }, spec.plant);
    return;
  }
  if (key == "alpha1") {
    if (auto* bp = std::get_if<BackbonePlantParams>(&spec.plant)) {
      bp->alpha1 = value;
      return;
    }
    throw ConfigError("alpha1 override applies to the backbone plant only");
  }
  if (key == "delta") {
    spec.disturbance.delta = value;
    spec.disturbance.mean = value;
    return;
  }
  throw ConfigError("unknown --param key: " + key);
}

ScenarioSpec resolve_scenario(const std::string& name_or_path,
                              const CommonFlags& flags) {
  ScenarioSpec spec;
  const auto builtins = builtin_scenario_names();
  if (std::find(builtins.begin(), builtins.end(), name_or_path) != builtins.end()) {
    spec = builtin_scenario(name_or_path);
  } else {
    spec = load_scenario_file(name_or_path);
    if (spec.name == "custom") {
      spec.name = std::filesystem::path(name_or_path).stem().string();
    }
  }
  if (flags.duration) spec.duration = *flags.duration;
  if (flags.disturbance == "constant") {
    spec.disturbance.kind = DisturbanceModel::Kind::Constant;
  } else if (flags.disturbance == "gaussian") {
    spec.disturbance.kind = DisturbanceModel::Kind::GaussianZOH;
  } else if (flags.disturbance == "emergent") {
    spec.disturbance.kind = DisturbanceModel::Kind::EmergentFromPhysical;
    if (!spec.has_physical_plant()) spec.plant = PhysicalPlantParams{};
  }
  if (flags.alpha1) {
    if (auto* bp = std::get_if<BackbonePlantParams>(&spec.plant)) {
      bp->alpha1 = *flags.alpha1;
    } else {
      throw ConfigError("--alpha1 applies to the backbone plant only");
    }
  }
  for (const auto& kv : flags.params) apply_param(spec, kv);
  spec.validate();
  return spec;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void print_metrics_table(const Trajectory& traj, double tol_settle,
                         const std::string& label) {
  std::printf("%-18s %9s %10s %10s %10s %10s %12s %9s\n", label.c_str(),
              "overshoot", "peak_acc", "peak_dec", "peak_jerk", "settle",
              "min_headway", "collision");
  const auto bounds = segment_bounds(traj);
  for (const auto& b : bounds) {
    const Metrics m = compute_metrics(segment_records(traj, b), tol_settle);
    std::printf("  [%5.1f,%5.1f) %9.3f %10.3f %10.3f %10.3f %10.2f %12s %9s\n",
                b.first, b.second, m.overshoot, m.peak_accel, m.peak_decel,
                m.peak_jerk, m.settle_time,
                std::isfinite(m.min_headway)
                    ? (std::to_string(m.min_headway).substr(0, 7)).c_str()
                    : "-",
                m.collision ? "YES" : "no");
  }
}

bool any_collision(const Trajectory& traj) {
  for (const auto& r : traj.records) {
    if (r.h && *r.h <= 0.0) return true;
  }
  return false;
}

int run_one(const ScenarioSpec& spec, std::uint64_t seed,
            ControllerVariant variant, const CommonFlags& flags,
            const std::string& suffix, Trajectory* traj_out = nullptr) {
  SimOptions options;
  options.variant = variant;
  const Trajectory traj = run_simulation(spec, seed, options);
  if (traj_out) *traj_out = traj;

  std::filesystem::create_directories(flags.out_dir);
  const std::filesystem::path base =
      std::filesystem::path(flags.out_dir) / (spec.name + suffix);
  write_file(base.string() + ".csv", to_csv(traj));
  write_file(base.string() + "_metrics.json", metrics_json(traj, flags.tol_settle));
  std::printf("wrote %s.csv\nwrote %s_metrics.json\n", base.c_str(), base.c_str());
  if (flags.svg) {
    write_file(base.string() + ".svg",
               render_svg(traj, spec.controller, spec.name + suffix));
    std::printf("wrote %s.svg\n", base.c_str());
  }
  print_metrics_table(traj, flags.tol_settle, spec.name + suffix);
  return any_collision(traj) ? 3 : 0;
}

int cmd_run(const std::string& scenario, const std::string& variant_name_arg,
            const CommonFlags& flags) {
  const ScenarioSpec spec = resolve_scenario(scenario, flags);
  const auto variant = parse_variant(variant_name_arg);
  if (!variant) throw ConfigError("unknown variant: " + variant_name_arg);
  const std::uint64_t seed = flags.seed.value_or(spec.disturbance.seed);
  return run_one(spec, seed, *variant, flags, "");
}

int cmd_compare(const std::string& scenario,
                const std::vector<std::string>& variants,
                const CommonFlags& flags) {
  const ScenarioSpec spec = resolve_scenario(scenario, flags);
  const std::uint64_t seed = flags.seed.value_or(spec.disturbance.seed);
  int rc = 0;
  struct Row {
    std::string name;
    Metrics m;
  };
  std::vector<Row> rows;
  for (const auto& vn : variants) {
    const auto variant = parse_variant(vn);
    if (!variant) throw ConfigError("unknown variant: " + vn);
    Trajectory traj;
    const int r = run_one(spec, seed, *variant, flags, "_" + vn, &traj);
    rc = std::max(rc, r);
    // whole-run metrics for the side-by-side table
    rows.push_back({vn, compute_metrics(traj.records, flags.tol_settle)});
  }
  std::printf("\n%-18s %10s %10s %10s %10s %10s\n", "variant", "overshoot",
              "peak_acc", "peak_dec", "peak_jerk", "settle");
  for (const auto& row : rows) {
    std::printf("%-18s %10.3f %10.3f %10.3f %10.3f %10.2f\n", row.name.c_str(),
                row.m.overshoot, row.m.peak_accel, row.m.peak_decel,
                row.m.peak_jerk, row.m.settle_time);
  }
  return rc;
}

int cmd_stability(const std::string& mode, const CommonFlags& flags,
                  double v_P_star, double delta_star) {
  ScenarioSpec spec;  // Table-parameter defaults, backbone plant
  if (flags.alpha1) std::get<BackbonePlantParams>(spec.plant).alpha1 = *flags.alpha1;
  for (const auto& kv : flags.params) apply_param(spec, kv);
  spec.controller.validate();
  const auto& plant = std::get<BackbonePlantParams>(spec.plant);
  plant.validate();

  const LinearModel model = mode == "free"
                                ? linearize_free(spec.controller, plant)
                                : linearize_cf(spec.controller, plant);
  const auto coeffs = char_poly(model.A);
  const RouthResult routh = routh_hurwitz(coeffs);

  std::printf("mode: %s\n", mode.c_str());
  if (mode == "cf") {
    const Equilibrium eq = equilibrium_cf(spec.controller, v_P_star, delta_star);
    std::printf("equilibrium: h*=%.4f v_H*=%.4f u*=%.4f e*=%.4f\n", *eq.h_star,
                eq.v_H_star, eq.u_star, eq.e_star);
  } else {
    const Equilibrium eq = equilibrium_free(spec.controller, delta_star);
    std::printf("equilibrium: v_H*=%.4f u*=%.4f e*=%.4f\n", eq.v_H_star,
                eq.u_star, eq.e_star);
  }
  std::printf("characteristic coefficients (monic, s^%zu .. s^0):\n ",
              coeffs.size() - 1);
  for (double c : coeffs) std::printf(" %.10g", c);
  std::printf("\nRouth array (first columns):\n");
  for (const auto& row : routh.array) {
    std::printf("  ");
    for (double v : row) std::printf(" %12.6g", v);
    std::printf("\n");
  }
  std::printf("eigenvalues:\n");
  for (const auto& root : poly_roots(coeffs)) {
    std::printf("  %+.8f %+.8fi\n", root.real(), root.imag());
  }
  std::printf("verdict: %s\n", verdict_name(routh.verdict).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Longitudinal controller simulation and analysis toolkit"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_scenario;
  std::string run_variant = "nonlinear";
  CLI::App* run = app.add_subcommand("run", "Simulate a scenario");
  run->add_option("scenario", run_scenario, "Builtin name or scenario file")
      ->required();
  run->add_option("--variant", run_variant,
                  "nonlinear|bang-rate|linear-integrator|linear-p|linear-p-sat");
  add_common(run, run_flags);

  CommonFlags cmp_flags;
  std::string cmp_scenario;
  std::vector<std::string> cmp_variants;
  CLI::App* cmp = app.add_subcommand("compare", "Run several controller variants");
  cmp->add_option("scenario", cmp_scenario, "Builtin name or scenario file")
      ->required();
  cmp->add_option("variants", cmp_variants, "At least two variant names")
      ->required()
      ->expected(2, -1);
  add_common(cmp, cmp_flags);

  CommonFlags stab_flags;
  std::string stab_mode = "free";
  double stab_vp = 20.0;
  double stab_delta = -0.25;
  CLI::App* stab = app.add_subcommand("stability", "Routh-Hurwitz stability report");
  stab->add_option("--mode", stab_mode, "free|cf")
      ->check(CLI::IsMember({"free", "cf"}));
  stab->add_option("--vp", stab_vp, "Leader equilibrium speed (cf mode) [m/s]");
  stab->add_option("--delta", stab_delta, "Equilibrium disturbance [m/s^2]");
  stab->add_option("--alpha1", stab_flags.alpha1, "Backbone mass ratio override");
  stab->add_option("--param", stab_flags.params, "Override key=value (repeatable)");

  CLI::App* scen = app.add_subcommand("scenarios", "List builtin scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_scenario, run_variant, run_flags);
    if (cmp->parsed()) return cmd_compare(cmp_scenario, cmp_variants, cmp_flags);
    if (stab->parsed()) return cmd_stability(stab_mode, stab_flags, stab_vp, stab_delta);
    if (scen->parsed()) {
      for (const auto& name : longctl::builtin_scenario_names()) {
        std::printf("%s\n", name.c_str());
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
