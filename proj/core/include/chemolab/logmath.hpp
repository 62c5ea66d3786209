#pragma once

#include <cmath>
#include <limits>

namespace chemolab::logmath {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  if (x > 35.0) return x + std::exp(-x);
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

// log(e^a + e^b).
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// A real number stored as sign * exp(mag); sign 0 means exactly zero.
struct SignedLog {
  int sign = 0;
  double mag = kNegInf;

  static SignedLog positive(double log_mag) { return {1, log_mag}; }
  static SignedLog negative(double log_mag) { return {-1, log_mag}; }
  static SignedLog zero() { return {}; }
  double value() const { return sign == 0 ? 0.0 : sign * std::exp(mag); }
};

// e^a - e^b as a signed log.
inline SignedLog log_diff(double a, double b) {
  if (a == b) return SignedLog::zero();
  if (a > b) {
    if (b == kNegInf) return SignedLog::positive(a);
    return SignedLog::positive(a + std::log(-std::expm1(b - a)));
  }
  if (a == kNegInf) return SignedLog::negative(b);
  return SignedLog::negative(b + std::log(-std::expm1(a - b)));
}

// log(expm1(z) + a) for z >= 0, a in (0, 1]; stays finite for large z.
inline double log_expm1_plus(double z, double a) {
  if (z < 30.0) return std::log(std::expm1(z) + a);
  return z + std::log1p((a - 1.0) * std::exp(-z));
}

}  // namespace chemolab::logmath
