#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conclab/structure.hpp"

namespace conclab {

// Identity labels for suite records.  Constant-free identities carry
// pass/fail; constant-parameterized ones carry ratios only.
//   regularity          Q(F,mu) <= (1+strict_floor(mu/lambda))^d Q(F,lambda)
//   scaling             Q(F_a,tau) == Q(F_va, v*tau)
//   cf-bound            |W^(t)| <= exp(-(1-|W^(t)|^2)/2)
//   sandwich-band       exact Q / Esseen ratio band for symmetric positive-cf laws
//   smoothing-q         Q(F_a,tau) vs Q(H, kappa)
//   smoothing-q-floored same with the (1+strict_floor(kappa/delta))^d prefactor
//   smoothing-zero      Q(F_a,0) vs the smoothing law's mass at 0
//   arak-spectral       Q(F_a,tau) vs the spectral right-hand side
//   inverse-shape       Q(F_a,tau) vs the floored spectral right-hand side at beta_upper
//   cube-shape          residual mass vs the cubed log target
inline constexpr const char* kIdentityRegularity = "regularity";
inline constexpr const char* kIdentityScaling = "scaling";
inline constexpr const char* kIdentityCfBound = "cf-bound";
inline constexpr const char* kIdentitySandwich = "sandwich-band";
inline constexpr const char* kIdentitySmoothingQ = "smoothing-q";
inline constexpr const char* kIdentitySmoothingQFloored = "smoothing-q-floored";
inline constexpr const char* kIdentitySmoothingZero = "smoothing-zero";
inline constexpr const char* kIdentityArakSpectral = "arak-spectral";
inline constexpr const char* kIdentityInverseShape = "inverse-shape";
inline constexpr const char* kIdentityCubeShape = "cube-shape";

struct SuiteRecord {
  std::string case_id;
  std::string digest;  // FNV-1a hash of the case inputs
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> ratio;  // lhs/rhs when rhs > 0
  std::string identity;
  std::optional<bool> pass;  // null for ratio-only identities
};

struct IdentityStats {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
};

using CalibrationTable = std::map<std::string, IdentityStats>;

struct SuiteConfig {
  std::uint64_t seed = 7;
  int threads = 1;
  // family sizes; the defaults match the acceptance criteria
  std::size_t cases_regularity = 200;
  std::size_t cases_scaling = 50;
  std::size_t cases_cf_bound = 50;
  std::size_t cf_grid_points = 200;  // per case; 50 cases x 200 points = 1e4
  std::size_t cases_smoothing = 30;
  std::size_t cases_sandwich = 110;
  std::size_t cases_arak = 30;
  std::size_t cases_inverse_shape = 20;
  std::size_t cases_cube_shape = 20;
  double quadrature_tol = 1e-9;
};

struct PlantedInstance {
  CoefficientVector coefficients;
  CGAP truth;  // the planted progression (product of rank-1 blocks)
  std::vector<std::size_t> outlier_indices;
  long long volume = 1;
};

// rank = number of coordinates, each carrying a rank-1 progression with the
// given step; n - outliers entries land within noise_tau (max-norm) of the
// progression, outliers land at >= 10x its diameter and away from the step
// lattice.  Deterministic given seed.
PlantedInstance planted_instance(int rank, const std::vector<double>& step_profile,
                                 long long volume, std::size_t n, std::size_t outliers,
                                 double noise_tau, std::uint64_t seed);

std::vector<SuiteRecord> run_suite(const SuiteConfig& config);

// Per-identity ratio statistics; identities listed in `require` must be
// present with at least one ratio-bearing record.
CalibrationTable calibrate(const std::vector<SuiteRecord>& records,
                           const std::vector<std::string>& require = {});

struct HSuiteMember {
  CompoundPoissonSpec spec;
  double tau;
};

// Ratio band of exact Q over the Esseen value across the suite; throws when
// the exact path is unavailable for a member.  band_low > 0 is asserted.
std::pair<double, double> verify_sandwich_band(const std::vector<HSuiteMember>& suite,
                                               double tol);

// Ratio-drift gate: identities whose observed max exceeds the baseline max by
// more than drift_tol (relative), or whose observed min falls below baseline
// min by more than drift_tol.
std::vector<std::string> check_drift(const CalibrationTable& observed,
                                     const CalibrationTable& baseline,
                                     double drift_tol = 0.05);

// CSV with columns case_id, identity, lhs, rhs, ratio, pass; all numerics at
// 17 significant digits.  Byte-identical across runs and thread counts.
std::string suite_csv(const std::vector<SuiteRecord>& records);

}  // namespace conclab
