#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "dgnc/common.hpp"
#include "dgnc/mpc.hpp"
#include "dgnc/navigation.hpp"
#include "dgnc/reference.hpp"
#include "dgnc/scenario.hpp"

namespace dgnc {

struct StepRecord {
  int t = 0;
  StateVector truth;
  StateVector estimate;
  double sigma_trace = 0.0;
  VecX y;            // measurement used this step (15)
  VecX pixels_true;  // noise-free pixels of the true state (8)
  VecX ref_pixels;   // noise-free pixels of the reference state (8)
  Vec3 ref_r = Vec3::Zero();
  Vec3 ref_theta = Vec3::Zero();
  VecX u;  // applied control (6)
  MpcDiagnostics mpc;
  double solve_ms = 0.0;  // diagnostics only; excluded from the CSV streams
};

struct SimLog {
  std::string scenario_name;
  std::string config_hash;
  std::uint64_t seed = 0;
  double dt = 1.0;
  double focal_length = 0.0;
  double s_fov = 0.0;
  double z_min = -std::numeric_limits<double>::infinity();
  int transient_steps = 0;
  double eps_activation = 0.0;
  std::vector<StepRecord> steps;
  StateVector final_truth;
  StateVector final_estimate;
  double total_solve_ms = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

namespace detail {

inline VecX noise_draw(std::mt19937_64& rng, std::normal_distribution<double>& nd,
                       const VecX& sqrt_diag) {
  VecX n(sqrt_diag.size());
  for (int i = 0; i < n.size(); ++i) n(i) = sqrt_diag(i) * nd(rng);
  return n;
}

inline VecX pixels_of(const StateVector& xi, const FeaturePointSet& features,
                      const CameraParams& cam, const AsteroidRotation& rot,
                      double t) {
  const VecX y = measure(xi, VecX::Zero(kNoiseDim), features, cam, rot, t);
  return y.segment(4, 8);
}

}  // namespace detail

/// Closed loop per step: sample n(t), measure, filter, tube MPC, actuate,
/// integrate the plant with high-fidelity gravity plus the discrete G n(t)
/// injection. The focal length is frozen at t = 0.
inline SimLog run_closed_loop(const ScenarioConfig& cfg) {
  const GravityProvider gravity_high = make_plant_gravity(cfg);
  const GravityProvider gravity_low = make_control_gravity(cfg);
  const ReferenceTrajectory ref = build_reference_trajectory(cfg, gravity_low);

  ControlModels models{gravity_low,
                       SpacecraftParams(cfg.inertia_kg_km2),
                       AsteroidRotation{cfg.spin_rate_rad_s},
                       cfg.features,
                       CameraParams{1.0},
                       cfg.g_matrix(),
                       MatX(cfg.p_diag.asDiagonal())};

  SimLog log;
  log.scenario_name = cfg.name;
  log.config_hash = cfg.config_hash;
  log.seed = cfg.seed;
  log.dt = cfg.dt_s;
  log.s_fov = cfg.mpc.s_fov;
  for (const auto& b : cfg.mpc.state_bounds)
    if (b.index == 2) log.z_min = b.lower;
  log.transient_steps = cfg.transient_steps;
  log.eps_activation = cfg.eps_activation;

  StateVector truth = ref.xi.front();
  models.camera.focal_length = init_focal_length(
      truth, cfg.features, models.rotation, 0.0);
  log.focal_length = models.camera.focal_length;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const VecX sigma0_sqrt = cfg.sigma0_diag.cwiseSqrt();
  const VecX p_sqrt = cfg.p_diag.cwiseSqrt();

  EstimateState est;
  est.xi_hat = truth;
  if (cfg.perturb_initial_estimate) {
    const VecX delta = detail::noise_draw(rng, nd, sigma0_sqrt);
    est.xi_hat = StateVector::from_vector(truth.to_vector() + delta);
  }
  est.sigma = cfg.sigma0_diag.asDiagonal();

  VecX n_t = detail::noise_draw(rng, nd, p_sqrt);
  VecX y = measure(truth, n_t, cfg.features, models.camera, models.rotation,
                   0.0);

  try {
    // Initial measurement update at t = 0, then the first linearization.
    {
      MatX h, v;
      measurement_jacobians(est.xi_hat, cfg.features, models.camera,
                            models.rotation, 0.0, h, v);
      const VecX h0 = measure(est.xi_hat, VecX::Zero(kNoiseDim), cfg.features,
                              models.camera, models.rotation, 0.0);
      est = ekf_update(est, y, h, v, models.p, h0);
    }
    LinearizedSystem linsys = initial_snapshot(est, models, cfg.dt_s, 0.0);

    MatX dare_warm;
    for (int t = 0; t < cfg.steps; ++t) {
      const double time = t * cfg.dt_s;
      const auto tic = std::chrono::steady_clock::now();
      const MpcResult res =
          mpc_step(est, linsys, ref.xi[static_cast<size_t>(t)],
                   ref.u[static_cast<size_t>(t)], models, cfg.mpc, time,
                   &dare_warm);
      const auto toc = std::chrono::steady_clock::now();

      StepRecord rec;
      rec.t = t;
      rec.truth = truth;
      rec.estimate = est.xi_hat;
      rec.sigma_trace = est.sigma.trace();
      rec.y = y;
      rec.pixels_true = detail::pixels_of(truth, cfg.features, models.camera,
                                          models.rotation, time);
      rec.ref_pixels =
          detail::pixels_of(ref.xi[static_cast<size_t>(t)], cfg.features,
                            models.camera, models.rotation, time);
      rec.ref_r = ref.xi[static_cast<size_t>(t)].r_a;
      rec.ref_theta = ref.xi[static_cast<size_t>(t)].theta;
      rec.u = res.u.to_vector();
      rec.mpc = res.diag;
      rec.solve_ms =
          std::chrono::duration<double, std::milli>(toc - tic).count();
      log.total_solve_ms += rec.solve_ms;
      log.steps.push_back(std::move(rec));

      // Plant advance with the shared n(t) injected at the discrete level.
      const StateVector integrated =
          rk4_step(truth, res.u, cfg.dt_s, gravity_high, models.spacecraft,
                   models.rotation, time);
      truth = StateVector::from_vector(integrated.to_vector() +
                                       models.g * n_t);

      // Next measurement and filter cycle.
      n_t = detail::noise_draw(rng, nd, p_sqrt);
      y = measure(truth, n_t, cfg.features, models.camera, models.rotation,
                  time + cfg.dt_s);
      const LinearizedSystem prev = linsys;
      est = ekf_step(est, res.u, y, cfg.dt_s, models, prev, time + cfg.dt_s,
                     linsys);
    }
  } catch (const std::exception& e) {
    log.aborted = true;
    log.abort_reason = e.what();
  }
  log.final_truth = truth;
  log.final_estimate = est.xi_hat;
  return log;
}

namespace detail {

inline void csv_value(std::FILE* f, double v, bool comma) {
  std::fprintf(f, comma ? ",%.17g" : "%.17g", v);
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header) {
    f_ = std::fopen(path.string().c_str(), "w");
    if (!f_) throw ScenarioError("cannot write " + path.string());
    std::fprintf(f_, "%s\n", header.c_str());
  }
  ~CsvFile() {
    if (f_) std::fclose(f_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  void row(int t, const VecX& values) {
    std::fprintf(f_, "%d", t);
    for (int i = 0; i < values.size(); ++i) csv_value(f_, values(i), true);
    std::fprintf(f_, "\n");
  }

 private:
  std::FILE* f_ = nullptr;
};

}  // namespace detail

struct RunSummary {
  long fov_violations = 0;   // true pixels beyond s_fov after the transient
  long z_violations = 0;     // true z below the floor after the transient
  long eps_activations = 0;  // eps above the activation threshold
  long saturations = 0;
  long checked_steps = 0;
  double min_z = std::numeric_limits<double>::infinity();
  double max_abs_pixel_after_transient = 0.0;
  double rms_tracking_km = 0.0;
  double total_solve_ms = 0.0;
  bool aborted = false;
};

inline RunSummary summarize(const SimLog& log) {
  RunSummary s;
  s.aborted = log.aborted;
  s.total_solve_ms = log.total_solve_ms;
  double acc = 0.0;
  for (const auto& rec : log.steps) {
    s.min_z = std::min(s.min_z, rec.truth.r_a.z());
    if (rec.t >= log.transient_steps) {
      ++s.checked_steps;
      const double worst_pixel = rec.pixels_true.cwiseAbs().maxCoeff();
      s.max_abs_pixel_after_transient =
          std::max(s.max_abs_pixel_after_transient, worst_pixel);
      if (worst_pixel > log.s_fov) ++s.fov_violations;
      if (std::isfinite(log.z_min) && rec.truth.r_a.z() < log.z_min)
        ++s.z_violations;
    }
    if (rec.mpc.eps > log.eps_activation) ++s.eps_activations;
    if (rec.mpc.saturated) ++s.saturations;
    acc += (rec.truth.r_a - rec.ref_r).squaredNorm();
  }
  s.min_z = std::min(s.min_z, log.final_truth.r_a.z());
  if (!log.steps.empty())
    s.rms_tracking_km = std::sqrt(acc / static_cast<double>(log.steps.size()));
  return s;
}

/// CSV per stream plus one JSON run summary, deterministic field order.
/// Wall-clock timing appears only in the summary, keeping the CSV streams
/// bit-reproducible for a fixed scenario + seed.
inline void emit_logs(const SimLog& log, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);

  {
    detail::CsvFile state(base / "state.csv",
                          "t,x_km,y_km,z_km,vx_km_s,vy_km_s,vz_km_s,phi_rad,"
                          "theta_rad,psi_rad,wx_rad_s,wy_rad_s,wz_rad_s");
    for (const auto& rec : log.steps) state.row(rec.t, rec.truth.to_vector());
    state.row(static_cast<int>(log.steps.size()), log.final_truth.to_vector());
  }
  {
    detail::CsvFile est(base / "estimate.csv",
                        "t,x_km,y_km,z_km,vx_km_s,vy_km_s,vz_km_s,phi_rad,"
                        "theta_rad,psi_rad,wx_rad_s,wy_rad_s,wz_rad_s,"
                        "sigma_trace");
    for (const auto& rec : log.steps) {
      VecX v(13);
      v << rec.estimate.to_vector(), rec.sigma_trace;
      est.row(rec.t, v);
    }
  }
  {
    detail::CsvFile meas(base / "measurement.csv",
                         "t,d1_km,d2_km,d3_km,d4_km,c1x,c1y,c2x,c2y,c3x,c3y,"
                         "c4x,c4y,wx_rad_s,wy_rad_s,wz_rad_s");
    for (const auto& rec : log.steps) meas.row(rec.t, rec.y);
  }
  {
    detail::CsvFile pix(base / "pixels.csv",
                        "t,c1x,c1y,c2x,c2y,c3x,c3y,c4x,c4y");
    for (const auto& rec : log.steps) pix.row(rec.t, rec.pixels_true);
  }
  {
    detail::CsvFile ref(base / "reference.csv",
                        "t,x_km,y_km,z_km,phi_rad,theta_rad,psi_rad,"
                        "c1x,c1y,c2x,c2y,c3x,c3y,c4x,c4y");
    for (const auto& rec : log.steps) {
      VecX v(14);
      v << rec.ref_r, rec.ref_theta, rec.ref_pixels;
      ref.row(rec.t, v);
    }
  }
  {
    detail::CsvFile ctl(base / "control.csv",
                        "t,ux_km_s2,uy_km_s2,uz_km_s2,mx,my,mz");
    for (const auto& rec : log.steps) ctl.row(rec.t, rec.u);
  }
  {
    detail::CsvFile diag(base / "mpc_diag.csv",
                         "t,eps,margin_y_max,margin_u_max,rho,active_rows,"
                         "qp_status,kkt_stationarity,kkt_primal,"
                         "kkt_complementarity,qp_iterations,saturated,"
                         "output_empty");
    for (const auto& rec : log.steps) {
      VecX v(12);
      v << rec.mpc.eps, rec.mpc.margin_y_max, rec.mpc.margin_u_max,
          rec.mpc.rho, static_cast<double>(rec.mpc.active_rows),
          static_cast<double>(static_cast<int>(rec.mpc.qp_status)),
          rec.mpc.kkt_stationarity, rec.mpc.kkt_primal,
          rec.mpc.kkt_complementarity,
          static_cast<double>(rec.mpc.qp_iterations),
          rec.mpc.saturated ? 1.0 : 0.0, rec.mpc.output_empty ? 1.0 : 0.0;
      diag.row(rec.t, v);
    }
  }

  const RunSummary s = summarize(log);
  json summary;
  summary["scenario"] = log.scenario_name;
  summary["config_hash"] = log.config_hash;
  summary["seed"] = log.seed;
  summary["steps"] = log.steps.size();
  summary["focal_length_km"] = log.focal_length;
  summary["s_fov"] = log.s_fov;
  summary["z_min_km"] =
      std::isfinite(log.z_min) ? json(log.z_min) : json(nullptr);
  summary["transient_steps"] = log.transient_steps;
  summary["aborted"] = log.aborted;
  summary["abort_reason"] = log.abort_reason;
  summary["violations"] = {{"fov", s.fov_violations},
                           {"z_floor", s.z_violations}};
  summary["eps_activations"] = s.eps_activations;
  summary["saturations"] = s.saturations;
  summary["min_z_km"] = s.min_z;
  summary["max_abs_pixel_after_transient"] = s.max_abs_pixel_after_transient;
  summary["rms_tracking_km"] = s.rms_tracking_km;
  summary["total_solve_time_ms"] = s.total_solve_ms;
  std::ofstream out(base / "summary.json");
  out << summary.dump(2) << "\n";
}

struct MonteCarloStats {
  int runs = 0;
  long checked_steps = 0;
  long fov_violations = 0;
  long z_violations = 0;
  long eps_activations = 0;
  double rms_tracking_km = 0.0;  // RMS over runs of per-run RMS
  std::vector<RunSummary> per_run;
};

/// Independent seeded runs (seed + run index); aggregation is order
/// independent by construction (pure sums over per-run summaries).
inline MonteCarloStats run_monte_carlo(const ScenarioConfig& cfg, int n_runs) {
  if (n_runs < 1) throw DomainError("monte carlo requires n_runs >= 1");
  MonteCarloStats stats;
  stats.runs = n_runs;
  double rms_acc = 0.0;
  for (int i = 0; i < n_runs; ++i) {
    ScenarioConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(i);
    const SimLog log = run_closed_loop(c);
    const RunSummary s = summarize(log);
    stats.checked_steps += s.checked_steps;
    stats.fov_violations += s.fov_violations;
    stats.z_violations += s.z_violations;
    stats.eps_activations += s.eps_activations;
    rms_acc += s.rms_tracking_km * s.rms_tracking_km;
    stats.per_run.push_back(s);
  }
  stats.rms_tracking_km = std::sqrt(rms_acc / n_runs);
  return stats;
}

}  // namespace dgnc
