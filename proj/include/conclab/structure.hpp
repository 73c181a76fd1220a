#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conclab/charfn.hpp"
#include "conclab/progressions.hpp"

namespace conclab {

// ---------------------------------------------------------------------------
// beta_{r,m}(W, tau): infimum over rank-r, volume-<=m progressions of the
// W-mass outside the closed tau-neighborhood.  Search routines return valid
// upper bounds (any witness certifies one).
// ---------------------------------------------------------------------------
struct BetaResult {
  double upper = 0.0;
  CGAP witness;
  bool exact = false;
  int r = 1;
  long long m = 1;
  double tau = 0.0;
};

// Heuristic witness search (r <= 3); deterministic given seed.  On an empty
// candidate set the total mass with the trivial witness {0} is returned.
BetaResult beta_upper(const SpectralMeasure& w, int r, long long m, double tau,
                      std::size_t budget = 200'000, std::uint64_t seed = 0);

// Exhaustive exact value at r = 1 over rational-support measures: candidate
// steps are divisors of pairwise support differences after rescaling to a
// common integer grid, candidate offsets are support points.
BetaResult beta_exact_rank1(const SpectralMeasure& w, long long m, double tau,
                            std::int64_t max_den = 1'000'000);

// c^{r+1} * (1/(m*sqrt(ab)) + (r+1)^{5r/2} / ab^{(r+1)/2}); decreasing in ab
// and in m.
double arak_bound_rhs(double alpha_beta, int r, long long m, double c);
// Variant with the (1 + strict_floor(kappa/delta)) regularity prefactor.
double arak_bound_rhs_floored(double alpha_beta, int r, long long m, double c,
                              double kappa, double delta);

// ---------------------------------------------------------------------------
// One-dimensional progression fitting: the rank-1 shifted progression
// {offset + j*h : |j| <= L}, 2L+1 <= m_cap, minimizing outliers at tolerance
// tau; ties broken by smaller volume, then smaller |h|.
// ---------------------------------------------------------------------------
struct Fit1D {
  CGAP progression;   // one rank-1 block
  std::vector<std::size_t> outliers;
  double step = 0.0;
  double offset = 0.0;
  long long volume = 1;
};

Fit1D fit_progression_1d(std::span<const double> values, double tau, long long m_cap,
                         std::size_t outlier_budget = 0);

// ---------------------------------------------------------------------------
// Structure reports
// ---------------------------------------------------------------------------
struct BoundTarget {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

struct StructureReport {
  std::variant<CGAP, SignedCube> progression;
  int rank = 0;
  long long volume = 0;
  std::size_t covered = 0;
  std::vector<std::size_t> outliers;
  double residual_mass = 0.0;
  bool degenerate = false;  // vanishing mass factor: bounds hold trivially
  std::vector<BoundTarget> bound_targets;
  std::vector<double> coordinate_q;   // q_j per coordinate
  std::vector<int> coordinate_rank;   // r_j per coordinate
  std::vector<long long> coordinate_volume;

  bool all_satisfied() const {
    for (const auto& t : bound_targets) {
      if (!t.satisfied) return false;
    }
    return true;
  }
};

struct DetectConfig {
  double calibration_c = 1.0;   // stands in for the unknown absolute constant
  long long m_cap_default = 101;
  long long m_cap_max = 100'001;
  std::size_t support_cap = kDefaultAtomCap;
  std::size_t outlier_budget = 0;  // per-coordinate early-stop threshold
  std::uint64_t seed = 0;          // reserved; the default path is exhaustive
};

// Constructive inverse detection: per-coordinate rank-1 fits at tolerance
// tau*rho assembled into a product progression, with the cardinality and
// volume targets evaluated at the configured calibration constant.  With
// tau = 0 the convention 0/0 = 1 applies to the tolerance ratio.
StructureReport inverse_detect(const CoefficientVector& a, const DiscreteDistribution& x,
                               double tau, double rho, std::size_t n_prime,
                               const DetectConfig& config = {});

struct K1Config {
  double rank_cap_c = 4.0;        // cap r_j at c * (|log q_j| + log ratio + 1)
  int rank_cap_abs = 24;
  double residual_target = 0.0;   // stop growing once residual mass <= target
  double calibration_c = 1.0;
  std::size_t support_cap = kDefaultAtomCap;
  std::optional<double> thm_a;    // optional polylog specialization: A
  std::optional<double> thm_b;    // and B with q_j >= n^-A, ratio <= n^B
};

// Greedy signed-cube cover of the coordinate spectral measures; residual is
// the tail-factor-weighted two-sided measure outside the product
// neighborhood.  With every tau_j = 0 the factor is p(0) instead of p(1).
StructureReport k1_structure_report(const CoefficientVector& a,
                                    const DiscreteDistribution& x,
                                    std::span<const double> tau,
                                    std::span<const double> delta,
                                    const K1Config& config = {});

// Variant driven by a compound Poisson law: factor 1, measure = Levy measure,
// q_j computed from the coordinate laws of the spec.
StructureReport k1_structure_report(const CompoundPoissonSpec& spec,
                                    std::span<const double> tau,
                                    std::span<const double> delta,
                                    const K1Config& config = {});

// Variant for n-fold convolution powers: factor n, measure = law f itself,
// q_j computed from the n-th convolution power of each coordinate law.
StructureReport k1_structure_report(const DiscreteDistribution& f, int n_power,
                                    std::span<const double> tau,
                                    std::span<const double> delta,
                                    const K1Config& config = {});

}  // namespace conclab
