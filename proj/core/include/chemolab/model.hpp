#pragma once

#include <string_view>

namespace chemolab {

/// Radial problem on the ball B_R(0) in R^n with flux exponents p (species u)
/// and q (species w).
struct ProblemParams {
  int n = 3;
  double R = 1.0;
  double p = 0.0;
  double q = 0.0;

  /// Throws Error{InvalidDimension} for n < 2 and Error{Domain} for R <= 0 or
  /// non-finite exponents.
  void validate() const;
  double kappa() const;
};

enum class Regime { BlowupCandidate, GlobalBounded, CriticalBoundary, Uncovered };

std::string_view to_string(Regime regime) noexcept;

/// Exponents closer than this to the critical value are reported as
/// CriticalBoundary.
inline constexpr double kCriticalBand = 1e-12;

/// (n-2)/(n-1), the critical flux exponent.
double critical_exponent(int n);

Regime classify(const ProblemParams& params);

/// Flux limiter (1 + xi)^(-e/2).
double limiter(double xi, double e);

/// h(x) = x (1 + x^2)^(-p/2) for x >= 0.
double h(double x, double p);
/// Exact derivative (1 + x^2)^(-p/2-1) (1 + (1-p) x^2).
double h_prime(double x, double p);

}  // namespace chemolab
