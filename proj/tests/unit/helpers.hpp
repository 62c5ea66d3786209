#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "chemolab/error.hpp"
#include "chemolab/model.hpp"

namespace testing {

// Kind of the chemolab::Error thrown by f, or nullopt if nothing is thrown.
inline std::optional<chemolab::ErrorKind> error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const chemolab::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline chemolab::ProblemParams params(int n, double R, double p, double q) {
  chemolab::ProblemParams pp;
  pp.n = n;
  pp.R = R;
  pp.p = p;
  pp.q = q;
  return pp;
}

}  // namespace testing
