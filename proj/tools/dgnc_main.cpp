// Command-line front end: closed-loop runs, Monte Carlo batches, scenario
// validation and figure-ready CSV extraction.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dgnc/mpc.hpp"
#include "dgnc/reference.hpp"
#include "dgnc/scenario.hpp"
#include "dgnc/sim.hpp"

namespace {

using dgnc::ScenarioConfig;

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = dgnc::load_scenario(scenario_path);
  if (seed) cfg.seed = *seed;
  const dgnc::SimLog log = dgnc::run_closed_loop(cfg);
  dgnc::emit_logs(log, out_dir);
  const dgnc::RunSummary s = dgnc::summarize(log);
  std::printf("scenario %s seed %llu: %zu steps, min z %.6f km, "
              "max |pixel| %.6f, eps activations %ld, solve %.1f ms\n",
              cfg.name.c_str(), static_cast<unsigned long long>(cfg.seed),
              log.steps.size(), s.min_z, s.max_abs_pixel_after_transient,
              s.eps_activations, s.total_solve_ms);
  if (log.aborted) {
    std::fprintf(stderr, "run aborted: %s\n", log.abort_reason.c_str());
    return 2;
  }
  return 0;
}

int cmd_montecarlo(const std::string& scenario_path, int runs,
                   const std::string& out_dir) {
  const ScenarioConfig cfg = dgnc::load_scenario(scenario_path);
  const dgnc::MonteCarloStats stats = dgnc::run_monte_carlo(cfg, runs);
  std::filesystem::create_directories(out_dir);

  dgnc::json doc;
  doc["scenario"] = cfg.name;
  doc["config_hash"] = cfg.config_hash;
  doc["base_seed"] = cfg.seed;
  doc["runs"] = stats.runs;
  doc["checked_steps"] = stats.checked_steps;
  doc["fov_violations"] = stats.fov_violations;
  doc["z_violations"] = stats.z_violations;
  doc["eps_activations"] = stats.eps_activations;
  doc["fov_violation_rate"] =
      stats.checked_steps ? static_cast<double>(stats.fov_violations) /
                                static_cast<double>(stats.checked_steps)
                          : 0.0;
  doc["rms_tracking_km"] = stats.rms_tracking_km;
  std::ofstream out(std::filesystem::path(out_dir) / "mc_summary.json");
  out << doc.dump(2) << "\n";
  std::printf("%d runs: violation rate fov %.4g, z %.4g; rms tracking %.4g km\n",
              stats.runs,
              stats.checked_steps
                  ? static_cast<double>(stats.fov_violations) /
                        static_cast<double>(stats.checked_steps)
                  : 0.0,
              stats.checked_steps
                  ? static_cast<double>(stats.z_violations) /
                        static_cast<double>(stats.checked_steps)
                  : 0.0,
              stats.rms_tracking_km);
  return 0;
}

int cmd_validate(const std::string& scenario_path) {
  int failures = 0;
  const auto check = [&](bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? " ok " : "FAIL", what.c_str());
    if (!ok) ++failures;
  };

  ScenarioConfig cfg;
  try {
    cfg = dgnc::load_scenario(scenario_path);
    check(true, "scenario schema");
  } catch (const std::exception& e) {
    check(false, std::string("scenario schema: ") + e.what());
    return 1;
  }

  try {
    const auto high = dgnc::make_plant_gravity(cfg);
    const auto low = dgnc::make_control_gravity(cfg);
    (void)high.acceleration(cfg.r0_ref_km);
    (void)low.acceleration(cfg.r0_ref_km);
    check(true, "gravity models evaluate at r0_ref");
  } catch (const std::exception& e) {
    check(false, std::string("gravity: ") + e.what());
    return 1;
  }

  try {
    const auto low = dgnc::make_control_gravity(cfg);
    const auto ref = dgnc::build_reference_trajectory(cfg, low);

    dgnc::ControlModels models{low,
                               dgnc::SpacecraftParams(cfg.inertia_kg_km2),
                               dgnc::AsteroidRotation{cfg.spin_rate_rad_s},
                               cfg.features,
                               dgnc::CameraParams{dgnc::init_focal_length(
                                   ref.xi.front(), cfg.features,
                                   dgnc::AsteroidRotation{cfg.spin_rate_rad_s},
                                   0.0)},
                               cfg.g_matrix(),
                               dgnc::MatX(cfg.p_diag.asDiagonal())};
    check(true, "reference trajectory and focal length");

    dgnc::EstimateState est;
    est.xi_hat = ref.xi.front();
    est.sigma = cfg.sigma0_diag.asDiagonal();
    const auto linsys = dgnc::initial_snapshot(est, models, cfg.dt_s, 0.0);
    const auto gain = dgnc::synthesize_gain(
        linsys.a, linsys.b, dgnc::MatX(cfg.mpc.lqr_q_diag.asDiagonal()),
        dgnc::MatX(cfg.mpc.lqr_r_diag.asDiagonal()));
    check(gain.rho < 1.0, "stabilizable at t0 (rho = " +
                              std::to_string(gain.rho) + ")");

    const auto res = dgnc::mpc_step(est, linsys, ref.xi.front(), ref.u.front(),
                                    models, cfg.mpc, 0.0);
    check(res.diag.qp_status == dgnc::QpStatus::kOptimal,
          "QP solves at t0");
    check(!res.diag.output_empty, "tightened output set non-empty at t0");
    check(res.diag.eps <= cfg.eps_activation,
          "no slack needed at t0 (eps = " + std::to_string(res.diag.eps) +
              ")");
  } catch (const std::exception& e) {
    check(false, std::string("feasibility at t0: ") + e.what());
  }
  return failures == 0 ? 0 : 1;
}

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          std::string* header = nullptr) {
  std::ifstream in(path);
  if (!in) throw dgnc::ScenarioError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      if (header) *header = line;
      first = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_plotdata(const std::string& log_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(log_dir);
  dgnc::json summary;
  {
    std::ifstream in(dir / "summary.json");
    if (!in) throw dgnc::ScenarioError("missing summary.json in " + log_dir);
    in >> summary;
  }
  const double s_fov = summary.value("s_fov", 0.0);
  const double z_min = summary["z_min_km"].is_number()
                           ? summary["z_min_km"].get<double>()
                           : std::numeric_limits<double>::quiet_NaN();

  const auto state = read_csv(dir / "state.csv");
  const auto refs = read_csv(dir / "reference.csv");
  const auto pixels = read_csv(dir / "pixels.csv");

  {
    std::ofstream out(dir / "plot_traj3d.csv");
    out << "t,x_km,y_km,z_km,ref_x_km,ref_y_km,ref_z_km\n";
    for (size_t i = 0; i < refs.size() && i < state.size(); ++i) {
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "%g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", state[i][0],
                    state[i][1], state[i][2], state[i][3], refs[i][1],
                    refs[i][2], refs[i][3]);
      out << buf;
    }
  }
  {
    std::ofstream out(dir / "plot_z_vs_t.csv");
    out << "t,z_km,ref_z_km,z_cnstr_km\n";
    for (size_t i = 0; i < refs.size() && i < state.size(); ++i) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%g,%.17g,%.17g,%.17g\n", state[i][0],
                    state[i][3], refs[i][3], z_min);
      out << buf;
    }
  }
  {
    std::ofstream out(dir / "plot_pixel_trace.csv");
    out << "t,c1x,c1y,c2x,c2y,c3x,c3y,c4x,c4y,ref_c1x,ref_c1y,ref_c2x,"
           "ref_c2y,ref_c3x,ref_c3y,ref_c4x,ref_c4y,fov_bound\n";
    for (size_t i = 0; i < pixels.size() && i < refs.size(); ++i) {
      out << pixels[i][0];
      char buf[64];
      for (int j = 1; j <= 8; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", pixels[i][static_cast<size_t>(j)]);
        out << buf;
      }
      for (int j = 7; j <= 14; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", refs[i][static_cast<size_t>(j)]);
        out << buf;
      }
      std::snprintf(buf, sizeof(buf), ",%.17g\n", s_fov);
      out << buf;
    }
  }
  std::printf("wrote plot_traj3d.csv, plot_z_vs_t.csv, plot_pixel_trace.csv "
              "to %s\n",
              log_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic tube LQMPC asteroid-descent GNC simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", log_dir;
  std::uint64_t seed_value = 0;
  bool seed_set = false;
  int runs = 10;

  auto* run = app.add_subcommand("run", "closed-loop simulation");
  run->add_option("--scenario", scenario_path, "scenario JSON")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed_value, "override the scenario seed")
      ->each([&](const std::string&) { seed_set = true; });

  auto* mc = app.add_subcommand("montecarlo", "batch of seeded runs");
  mc->add_option("--scenario", scenario_path, "scenario JSON")->required();
  mc->add_option("--runs", runs, "number of runs")->required();
  mc->add_option("--out", out_dir, "output directory")->required();

  auto* val = app.add_subcommand("validate",
                                 "schema, stabilizability and t0 feasibility");
  val->add_option("--scenario", scenario_path, "scenario JSON")->required();

  auto* plot = app.add_subcommand("plotdata", "figure-ready CSV extraction");
  plot->add_option("--log", log_dir, "directory written by `run`")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(scenario_path, out_dir,
                     seed_set ? std::optional<std::uint64_t>(seed_value)
                              : std::nullopt);
    if (mc->parsed()) return cmd_montecarlo(scenario_path, runs, out_dir);
    if (val->parsed()) return cmd_validate(scenario_path);
    if (plot->parsed()) return cmd_plotdata(log_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
