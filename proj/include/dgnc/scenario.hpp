#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "dgnc/common.hpp"
#include "dgnc/dynamics.hpp"
#include "dgnc/gravity.hpp"
#include "dgnc/mpc.hpp"
#include "dgnc/sensors.hpp"

namespace dgnc {

using nlohmann::json;

/// Low-fidelity gravity selection for the control model.
struct LowFidelityChoice {
  enum class Kind { kTruncatedHarmonic, kEllipsoid } kind =
      Kind::kTruncatedHarmonic;
  int cap_degree = 2;
  EllipsoidField ellipsoid;
};

/// Everything a closed-loop run needs; mirrors the scenario JSON document.
struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  double dt_s = 1.0;
  int steps = 100;

  double spin_rate_rad_s = 0.0;
  std::string gravity_file;  // resolved against the scenario file directory
  BrillouinPolicy brillouin_policy = BrillouinPolicy::kError;
  LowFidelityChoice low_fidelity;

  Mat3 inertia_kg_km2 = Mat3::Identity();
  FeaturePointSet features;

  Vec3 r0_ref_km = Vec3::Zero();
  Vec3 rend_ref_km = Vec3::Zero();
  double descent_rate_km_s = 0.005;
  Vec3 branch_seed_rad = Vec3::Zero();

  MpcConfig mpc;
  VecX p_diag = VecX::Constant(kNoiseDim, 1e-6);
  double g_scale = 1e-5;
  VecX sigma0_diag = VecX::Constant(12, 1e-4);
  bool perturb_initial_estimate = true;

  int transient_steps = 20;
  double eps_activation = 1e-6;

  std::string config_hash;  // FNV-1a over the canonical seedless document

  MatX g_matrix() const {
    return g_scale * MatX::Ones(12, kNoiseDim);
  }
};

namespace detail {

inline VecX json_diag(const json& j, int n, const char* what) {
  VecX out(n);
  if (j.is_number()) {
    out.setConstant(j.get<double>());
    return out;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ScenarioError(std::string("expected scalar or length-") +
                        std::to_string(n) + " array for " + what);
  for (int i = 0; i < n; ++i) out(i) = j[static_cast<size_t>(i)].get<double>();
  return out;
}

inline Vec3 json_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw ScenarioError(std::string("expected length-3 array for ") + what);
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

/// Block-diagonal expansion used by the Table-1 style keys: Q partitioned
/// along [r, v, Theta, omega], R along [u_x, u_y, u_z, M].
inline VecX expand_q_blocks(const json& j) {
  if (!j.is_array() || j.size() != 4)
    throw ScenarioError("q_block_diag must have 4 entries");
  VecX q(12);
  for (int blk = 0; blk < 4; ++blk)
    q.segment(3 * blk, 3).setConstant(j[static_cast<size_t>(blk)].get<double>());
  return q;
}

inline VecX expand_r_blocks(const json& j) {
  if (!j.is_array() || j.size() != 4)
    throw ScenarioError("r_block_diag must have 4 entries");
  VecX r(6);
  r(0) = j[0].get<double>();
  r(1) = j[1].get<double>();
  r(2) = j[2].get<double>();
  r.segment(3, 3).setConstant(j[3].get<double>());
  return r;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }

  ScenarioConfig cfg;
  try {
    cfg.name = doc.at("name").get<std::string>();
    cfg.seed = doc.value("seed", 0ull);
    cfg.dt_s = doc.at("dt_s").get<double>();
    cfg.steps = doc.at("steps").get<int>();
    if (!(cfg.dt_s > 0.0)) throw ScenarioError("dt_s must be positive");
    if (cfg.steps < 1) throw ScenarioError("steps must be >= 1");

    const json& ast = doc.at("asteroid");
    cfg.spin_rate_rad_s = ast.at("spin_rate_rad_s").get<double>();
    cfg.gravity_file = ast.at("gravity_file").get<std::string>();
    const std::string policy = ast.value("brillouin_policy", "error");
    if (policy == "error")
      cfg.brillouin_policy = BrillouinPolicy::kError;
    else if (policy == "extrapolate")
      cfg.brillouin_policy = BrillouinPolicy::kExtrapolate;
    else
      throw ScenarioError("brillouin_policy must be error|extrapolate");

    const json& low = doc.at("control_gravity");
    const std::string kind = low.at("type").get<std::string>();
    if (kind == "truncated_harmonic") {
      cfg.low_fidelity.kind = LowFidelityChoice::Kind::kTruncatedHarmonic;
      cfg.low_fidelity.cap_degree = low.value("cap_degree", 2);
    } else if (kind == "ellipsoid") {
      cfg.low_fidelity.kind = LowFidelityChoice::Kind::kEllipsoid;
      cfg.low_fidelity.ellipsoid =
          EllipsoidField(low.at("a_km").get<double>(),
                         low.at("b_km").get<double>(),
                         low.at("c_km").get<double>(),
                         low.at("mu_km3_s2").get<double>());
    } else {
      throw ScenarioError("control_gravity.type must be "
                          "truncated_harmonic|ellipsoid");
    }

    const json& sc = doc.at("spacecraft");
    const json& jj = sc.at("inertia_kg_km2");
    if (!jj.is_array() || jj.size() != 3)
      throw ScenarioError("inertia_kg_km2 must be a 3x3 array");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        cfg.inertia_kg_km2(r, c) =
            jj[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();

    const json& feats = doc.at("features_km");
    if (!feats.is_array() || feats.size() != kNumFeatures)
      throw ScenarioError("features_km must list exactly 4 points");
    for (int k = 0; k < kNumFeatures; ++k)
      cfg.features.points[static_cast<size_t>(k)] =
          detail::json_vec3(feats[static_cast<size_t>(k)], "feature point");
    for (int i = 0; i < kNumFeatures; ++i)
      for (int j2 = i + 1; j2 < kNumFeatures; ++j2)
        if ((cfg.features[i] - cfg.features[j2]).norm() < 1e-12)
          throw ScenarioError("feature points must be pairwise distinct");

    const json& ref = doc.at("reference");
    cfg.r0_ref_km = detail::json_vec3(ref.at("r0_ref_km"), "r0_ref_km");
    cfg.rend_ref_km = detail::json_vec3(ref.at("rend_ref_km"), "rend_ref_km");
    cfg.descent_rate_km_s = ref.value("descent_rate_km_s", 0.005);
    cfg.branch_seed_rad =
        detail::json_vec3(ref.at("branch_seed_rad"), "branch_seed_rad");
    if (!(cfg.descent_rate_km_s > 0.0))
      throw ScenarioError("descent_rate_km_s must be positive");

    const json& mpc = doc.at("mpc");
    cfg.mpc.horizon = mpc.at("horizon_steps").get<int>();
    cfg.mpc.beta = mpc.at("beta").get<double>();
    if (!(cfg.mpc.beta > 0.0 && cfg.mpc.beta < 1.0))
      throw ScenarioError("beta must lie in (0,1)");
    if (cfg.mpc.horizon < 1) throw ScenarioError("horizon_steps must be >= 1");
    cfg.mpc.q_diag = mpc.contains("q_block_diag")
                         ? detail::expand_q_blocks(mpc.at("q_block_diag"))
                         : detail::json_diag(mpc.at("q_diag"), 12, "q_diag");
    cfg.mpc.r_diag = mpc.contains("r_block_diag")
                         ? detail::expand_r_blocks(mpc.at("r_block_diag"))
                         : detail::json_diag(mpc.at("r_diag"), 6, "r_diag");
    cfg.mpc.w_slack = mpc.at("w_slack").get<double>();
    cfg.mpc.s_fov = mpc.at("s_fov").get<double>();
    cfg.mpc.m_trans = mpc.at("m_trans_km_s2").get<double>();
    cfg.mpc.m_rot = mpc.at("m_rot").get<double>();
    if (cfg.mpc.q_diag.minCoeff() < 0.0 || cfg.mpc.r_diag.minCoeff() <= 0.0 ||
        cfg.mpc.w_slack <= 0.0)
      throw ScenarioError("weights must satisfy Q >= 0, R > 0, W > 0");
    StateBound zb;
    zb.index = 2;
    zb.lower = mpc.value("z_min_km", -std::numeric_limits<double>::infinity());
    zb.upper = mpc.value("z_max_km", std::numeric_limits<double>::infinity());
    if (std::isfinite(zb.lower) || std::isfinite(zb.upper))
      cfg.mpc.state_bounds.push_back(zb);
    cfg.mpc.lqr_q_diag =
        detail::json_diag(mpc.at("lqr_q_diag"), 12, "lqr_q_diag");
    cfg.mpc.lqr_r_diag =
        detail::json_diag(mpc.at("lqr_r_diag"), 6, "lqr_r_diag");
    cfg.mpc.chi2_dof_override = mpc.value("chi2_dof_override", 0);

    const json& noise = doc.at("noise");
    cfg.p_diag = detail::json_diag(noise.at("p_diag"), kNoiseDim, "p_diag");
    cfg.g_scale = noise.at("g_scale").get<double>();
    if (cfg.p_diag.minCoeff() < 0.0)
      throw ScenarioError("p_diag entries must be >= 0");

    const json& ekf = doc.at("ekf");
    cfg.sigma0_diag =
        detail::json_diag(ekf.at("sigma0_diag"), 12, "sigma0_diag");
    cfg.perturb_initial_estimate = ekf.value("perturb_initial_estimate", true);
    if (cfg.sigma0_diag.minCoeff() < 0.0)
      throw ScenarioError("sigma0_diag entries must be >= 0");

    cfg.transient_steps = doc.value("transient_steps", 20);
    cfg.eps_activation = doc.value("eps_activation", 1e-6);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario field error: ") + e.what());
  }

  // Resolve the gravity file against the scenario location.
  const auto dir = std::filesystem::path(path).parent_path();
  const std::filesystem::path gf(cfg.gravity_file);
  if (gf.is_relative()) cfg.gravity_file = (dir / gf).string();

  // Canonical hash over the document without the seed (nlohmann orders keys).
  json seedless = doc;
  seedless.erase("seed");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(detail::fnv1a(seedless.dump())));
  cfg.config_hash = buf;
  return cfg;
}

/// Plant-side (high fidelity) gravity per the scenario.
inline GravityProvider make_plant_gravity(const ScenarioConfig& cfg) {
  HarmonicField field = HarmonicField::load(cfg.gravity_file);
  const int cap = field.degree;
  return GravityProvider::harmonic(std::move(field), cap,
                                   cfg.brillouin_policy);
}

/// Control-side (low fidelity) gravity per the scenario.
inline GravityProvider make_control_gravity(const ScenarioConfig& cfg) {
  if (cfg.low_fidelity.kind == LowFidelityChoice::Kind::kEllipsoid)
    return GravityProvider::ellipsoid(cfg.low_fidelity.ellipsoid);
  HarmonicField field = HarmonicField::load(cfg.gravity_file);
  return GravityProvider::harmonic(std::move(field),
                                   cfg.low_fidelity.cap_degree,
                                   cfg.brillouin_policy);
}

}  // namespace dgnc
