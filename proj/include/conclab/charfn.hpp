#pragma once

#include <complex>
#include <optional>

#include "conclab/concentration.hpp"
#include "conclab/measures.hpp"

namespace conclab {

// Finite Fourier sum of an atomic law.
std::complex<double> cf_eval(const DiscreteDistribution& f, std::span<const double> t);

// Characteristic function of a symmetric compound Poisson spec:
// exp(sum_j w_j (cos<t, x_j> - 1)); real and in (0, 1].  The optional z
// rescales the jump points (equivalently evaluates at z*t).
double cf_eval(const CompoundPoissonSpec& spec, std::span<const double> t, double z = 1.0);

struct EsseenEstimate {
  double value = 0.0;             // tau^d * integral of |cf| over the cube |t| <= 1/tau
  double quadrature_error = 0.0;  // certified bound on the quadrature error of value
  double tau = 0.0;
  std::size_t panels = 0;
};

struct QuadratureLimits {
  double tol = 1e-9;
  std::size_t panel_budget = 1u << 18;
};

// tau^d * integral_{|t| <= 1/tau} |F^(t)| dt over the max-norm cube; adaptive
// Gauss-Kronrod panels, certified for d <= 2.
EsseenEstimate esseen_integral(const DiscreteDistribution& f, double tau,
                               QuadratureLimits lim = {});
EsseenEstimate esseen_integral(const CompoundPoissonSpec& spec, double tau,
                               QuadratureLimits lim = {});

// Common scale g > 0 with every value an integer multiple of g (rational
// reconstruction of ratios, denominators capped); nullopt when none exists.
std::optional<double> common_lattice_scale(std::span<const double> values,
                                           std::int64_t max_den = 1'000'000);
std::optional<double> common_lattice_scale(const SpectralMeasure& m,
                                           std::int64_t max_den = 1'000'000);

// Probability mass of the compound Poisson law at lattice point g*k, via
// (2pi)^{-d} * integral over [-pi,pi]^d of cos(<k,theta>) * cf(theta/g);
// requires all Levy atoms on a common lattice g*Z^d and d <= 2.
double lattice_inversion(const CompoundPoissonSpec& spec, std::span<const long long> k,
                         double tol, QuadratureLimits lim = {});

// Full lattice law of a compound Poisson spec with lattice support, computed
// by torus trapezoid sums with the aliasing tail below tol per mass; the
// returned law is renormalized to total mass 1.
DiscreteDistribution lattice_law(const CompoundPoissonSpec& spec, double tol,
                                 std::size_t atom_cap = kDefaultAtomCap);

// Poisson-series oracle: D = sum_j e^{-L} L^j / j! W^{*j}, truncated once the
// Poisson tail drops below tail_tol; the defect is redistributed
// proportionally.
DiscreteDistribution compound_poisson_exact(const CompoundPoissonSpec& spec,
                                            double tail_tol,
                                            std::size_t atom_cap = kDefaultAtomCap);

enum class QPath { degenerate, inversion_exact, esseen_surrogate };
std::string to_string(QPath p);

struct SmoothedConcentration {
  double value = 0.0;
  double error = 0.0;
  QPath path = QPath::degenerate;
};

// Q(H, kappa) for the smoothing law H with Levy measure (lambda/4) *
// sum_k(E_{a_k} + E_{-a_k}): exact (lattice inversion + sliding window) when
// the coefficients share a lattice, otherwise the Esseen functional as a
// surrogate equivalent up to a dimensional constant.
SmoothedConcentration smoothed_concentration(const CoefficientVector& a, double lambda,
                                             double kappa, double tol = 1e-9);

// regularity_factor(kappa, delta, d) * smoothed_concentration(a, p(tau/kappa), delta)
// where p is the symmetrized tail of X.
double smoothed_concentration_bound(const CoefficientVector& a,
                                    const DiscreteDistribution& x, double tau,
                                    double kappa, double delta, double tol = 1e-9);

}  // namespace conclab
