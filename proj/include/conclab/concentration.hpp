#pragma once

#include <optional>
#include <string>

#include "conclab/measures.hpp"

namespace conclab {

// Largest integer k with k < x (strict floor; differs from std::floor at
// integers: strict_floor(2) == 1).
long long strict_floor(double x);
std::int64_t strict_floor(const Rational& x);

// (1 + strict_floor(mu/lambda))^d; requires lambda > 0.  Overflow-checked.
long long regularity_factor(double mu, double lambda, int d);
long long regularity_factor(const Rational& mu, const Rational& lambda, int d);

enum class ConcentrationMethod { exact_window, bracket_candidates, quadrature };

std::string to_string(ConcentrationMethod m);

// Q(F, tau) = sup_x P(Y in x + tau*B), B the closed Euclidean ball of radius
// 1/2.  In d = 1 the window x + tau*B is a closed interval of length tau.
struct ConcentrationResult {
  double lower = 0.0;
  double upper = 0.0;
  double tau = 0.0;
  ConcentrationMethod method = ConcentrationMethod::exact_window;
  std::optional<std::vector<double>> witness_center;

  bool exact() const { return method == ConcentrationMethod::exact_window; }
};

// Exact law of S_a = sum_k X_k a_k via iterated convolution (X scalar,
// coefficients d-dimensional).  Convolution proceeds over coefficients in
// increasing max-norm order, merging after each step; throws cap_exceeded
// when an intermediate support would exceed support_cap.
DiscreteDistribution exact_sum_distribution(const CoefficientVector& a,
                                            const DiscreteDistribution& x,
                                            std::size_t support_cap = kDefaultAtomCap);
RationalDistribution exact_sum_distribution(const RationalCoefficients& a,
                                            const RationalDistribution& x,
                                            std::size_t support_cap = kDefaultAtomCap);

// d = 1 and tau = 0 are exact; d >= 2 with tau > 0 returns a certified
// bracket (best candidate center vs. a grid covering bound).
ConcentrationResult concentration(const DiscreteDistribution& f, double tau);

struct ExactConcentration {
  Rational value;
  Rational witness_center;
};
// Exact sliding-window concentration for one-dimensional rational laws.
ExactConcentration concentration_exact(const RationalDistribution& f, const Rational& tau);

CoefficientVector scale_coefficients(const CoefficientVector& a, double v);
RationalCoefficients scale_coefficients(const RationalCoefficients& a, const Rational& v);

}  // namespace conclab
