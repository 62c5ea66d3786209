#include "chemolab/model.hpp"

#include <cmath>
#include <string>

#include "chemolab/error.hpp"

namespace chemolab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Regime: return "regime";
    case ErrorKind::NonTermination: return "non-termination";
    case ErrorKind::ConstantsOverflow: return "constants-overflow";
    case ErrorKind::InternalConsistency: return "internal-consistency";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::BlowupCandidate: return "BlowupCandidate";
    case Regime::GlobalBounded: return "GlobalBounded";
    case Regime::CriticalBoundary: return "CriticalBoundary";
    case Regime::Uncovered: return "Uncovered";
  }
  return "unknown";
}

void ProblemParams::validate() const {
  if (n < 2) {
    throw Error(ErrorKind::InvalidDimension,
                "dimension n must be >= 2, got " + std::to_string(n));
  }
  if (!(R > 0.0) || !std::isfinite(R)) {
    throw Error(ErrorKind::Domain, "radius R must be positive and finite");
  }
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw Error(ErrorKind::Domain, "flux exponents p, q must be finite");
  }
}

double ProblemParams::kappa() const { return critical_exponent(n); }

double critical_exponent(int n) {
  if (n < 2) {
    throw Error(ErrorKind::InvalidDimension,
                "critical exponent needs n >= 2, got " + std::to_string(n));
  }
  return static_cast<double>(n - 2) / static_cast<double>(n - 1);
}

namespace {

enum class Side { Below, At, Above };

// Compares e against (n-2)/(n-1) through e*(n-1) - (n-2), which fma evaluates
// with a single rounding, so exact rationals such as 0.5 at n=3 land on zero.
Side side_of_critical(double e, int n) {
  const double scaled = std::fma(e, static_cast<double>(n - 1),
                                 -static_cast<double>(n - 2));
  const double offset = scaled / static_cast<double>(n - 1);
  if (std::abs(offset) <= kCriticalBand) return Side::At;
  return offset < 0.0 ? Side::Below : Side::Above;
}

}  // namespace

Regime classify(const ProblemParams& params) {
  params.validate();
  const Side sp = side_of_critical(params.p, params.n);
  const Side sq = side_of_critical(params.q, params.n);
  if (sp == Side::Above || sq == Side::Above) return Regime::GlobalBounded;
  if (sp == Side::At || sq == Side::At) return Regime::CriticalBoundary;
  return params.n >= 3 ? Regime::BlowupCandidate : Regime::Uncovered;
}

double limiter(double xi, double e) {
  if (!(xi >= 0.0)) {
    throw Error(ErrorKind::Domain, "limiter argument must be nonnegative");
  }
  return std::exp(-0.5 * e * std::log1p(xi));
}

namespace {

// log(1 + x^2) without overflowing x^2.
double log1p_square(double x) {
  const double ax = std::abs(x);
  if (ax > 1e150) return 2.0 * std::log(ax) + std::log1p(1.0 / (ax * ax));
  return std::log1p(ax * ax);
}

}  // namespace

double h(double x, double p) {
  if (!(x >= 0.0)) throw Error(ErrorKind::Domain, "h requires x >= 0");
  if (x == 0.0) return 0.0;
  return x * std::exp(-0.5 * p * log1p_square(x));
}

double h_prime(double x, double p) {
  if (!(x >= 0.0)) throw Error(ErrorKind::Domain, "h_prime requires x >= 0");
  const double l = log1p_square(x);
  // (1 + (1-p) x^2) = (1 + x^2) - p x^2; split to keep large x finite.
  if (x > 1e150) {
    return (1.0 - p) * std::exp((-0.5 * p) * l + 2.0 * std::log(x) - l);
  }
  return std::exp((-0.5 * p - 1.0) * l) * (1.0 + (1.0 - p) * x * x);
}

}  // namespace chemolab
