#include "chemolab/subsolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "chemolab/error.hpp"
#include "chemolab/logmath.hpp"

namespace chemolab {

using logmath::kNegInf;
using logmath::log_diff;
using logmath::log_expm1_plus;
using logmath::SignedLog;
using logmath::softplus;

namespace {

constexpr double kLogUp = 0.04879016416943205;     // log(1.05)
constexpr double kLogDown = -0.05129329438755058;  // log(0.95)
constexpr double kLog2 = std::numbers::ln2;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_finite(double v, const char* tag) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::ConstantsOverflow,
                std::string("constant not representable: ") + tag);
  }
}

// Lower bounds (as logs) on y* from the inner-region constraints on y*.
std::array<double, 6> y_star_roots(double a, double b, double log_l,
                                   double mu_sup, double n, double log_Rn) {
  const double t1 = kLog2 + std::log(mu_sup) + 1.0 - std::log(n) - log_l;
  const double t2 = kLog2 + 1.0 - log_l;
  return {t1 / (1.0 - b), t2 / (1.0 - b - 1.0 / n),
          t1 / (1.0 - a), t2 / (1.0 - a - 1.0 / n),
          0.0,            -log_Rn};
}

double log_c(double self_exp, double other_exp, double e, double n,
             double log_l) {
  // c1 with (self, other, e) = (alpha, beta, p); c2 with (beta, alpha, q).
  const double first = (e - 1.0) * kLog2 - (1.0 - 1.0 / n) * e * std::log(self_exp);
  const double second = (e / 2.0 - 1.0) * kLog2;
  const double log_cs = std::min(std::log(other_exp / self_exp), 0.0);
  return std::min(first, second) + other_exp * (1.0 - e) * log_cs + std::log(n) +
         (e - 2.0) + (1.0 - self_exp) * std::log(self_exp) +
         (2.0 - e) * log_l - other_exp * (1.0 - e) * std::log(other_exp);
}

// Upper bounds (as logs) on s* from the middle-region constraints. `a` is the
// exponent of the profile under the operator, `b` its partner's, e the flux
// exponent of the operator.
std::array<double, 4> s_star_roots(double a, double b, double d, double e,
                                   double n, double log_l, double mu_sup,
                                   double log_c) {
  const double r1 = (log_l + std::log(n) + (1.0 - b) * std::log(b) - kLog2 - 1.0 -
                     std::log(mu_sup)) /
                    (1.0 - b);
  const double r2 = (log_l - kLog2 - 1.0) / (1.0 - b - 1.0 / n);
  const double e1 = (1.0 / n + b - 1.0) * e + 1.0 - b - d;
  const double e2 = (1.0 / n + b - 1.0) * e + 1.0 - b - 2.0 / n;
  const double r3 = -(kLog2 + (d - a) * std::log(a) + log_l - log_c) / e1;
  const double r4 =
      -(kLog2 + 2.0 * std::log(n) + (2.0 / n - a - 1.0) * std::log(a) + log_l - log_c) /
      e2;
  return {r1, r2, r3, r4};
}

// Lower bound (log) on theta* from the outer-region constraint for the
// profile with exponent a, its partner exponent b and flux exponent e.
double theta_root(double a, double b, double d, double e, double n, double log_R,
                  double log_s, double mu_sup, double log_l) {
  const double arg = 2.0 * ((1.0 / n - 1.0) * log_s + log_l - b * std::log(b) +
                            n * b * log_R);
  const double log_cap = std::min(0.0, -(e / 2.0) * softplus(arg));
  double acc = -d * log_s;
  acc = logmath::log_add(acc, 2.0 * std::log(n) + (2.0 * n - 2.0) * log_R -
                                  2.0 * log_s - std::log(a));
  acc = logmath::log_add(acc, log_cap + std::log(mu_sup) - log_s + n * log_R);
  return 1.0 + acc;
}

double log_gamma_bound(double e, double n, double log_l, double log_R) {
  const double first = std::min(-kLog2, (-e / 2.0 - 1.0) * kLog2) + std::log(n) - 2.0 + log_l;
  const double second = (e / 2.0 - 1.0) * kLog2 + std::log(n) + (e - 2.0) +
                        (1.0 - e) * log_l - e * log_R;
  return std::min(first, second);
}

}  // namespace

std::array<double, 4> exponent_margins(const ShapeExponents& e, double p, double q,
                                       int n) {
  const double nn = n;
  return {(1.0 - e.beta) * (1.0 - p) - e.delta, (1.0 - e.alpha) * (1.0 - q) - e.delta,
          (1.0 / nn + e.beta - 1.0) * p + 1.0 - e.beta - 2.0 / nn,
          (1.0 / nn + e.alpha - 1.0) * q + 1.0 - e.alpha - 2.0 / nn};
}

ShapeExponents choose_shape_exponents(double p, double q, int n) {
  if (n < 3) throw Error(ErrorKind::InvalidDimension, "subsolutions need n >= 3");
  const ProblemParams probe{n, 1.0, p, q};
  if (classify(probe) != Regime::BlowupCandidate) {
    throw Error(ErrorKind::Regime, "(p, q) outside the blow-up quadrant");
  }
  const double nn = n;
  for (int k = 0; k <= 60; ++k) {
    const double scale = std::ldexp(1.0, -k);
    ShapeExponents e{scale * (1.0 - 1.0 / nn) / 4.0, scale * (1.0 - 1.0 / nn) / 4.0,
                     scale / (2.0 * nn), k};
    const auto m = exponent_margins(e, p, q, n);
    if (std::all_of(m.begin(), m.end(), [](double v) { return v > 0.0; })) return e;
  }
  throw Error(ErrorKind::NonTermination, "no admissible exponents after 60 halvings");
}

double compute_l(double mu_star, double R, int n) {
  if (!(mu_star > 0.0) || !(R > 0.0)) throw Error(ErrorKind::Domain, "l needs mu, R > 0");
  if (n < 2) throw Error(ErrorKind::InvalidDimension, "n must be >= 2");
  const double Rn = std::pow(R, n);
  return mu_star * Rn / (n * std::exp(1.0 / std::numbers::e) * (Rn + 1.0));
}

double blowup_time(double gamma, double delta, double y0) {
  if (!(gamma > 0.0) || !(delta > 0.0) || !(y0 > 0.0)) {
    throw Error(ErrorKind::Domain, "blowup_time needs positive arguments");
  }
  return std::pow(y0, -delta) / (gamma * delta);
}

double y_of_t(double t, double gamma, double delta, double y0) {
  const double T = blowup_time(gamma, delta, y0);
  if (!(t < T)) throw Error(ErrorKind::Domain, "t is past the blow-up time");
  if (t < 0.0) throw Error(ErrorKind::Domain, "negative time");
  return y0 * std::exp(-std::log1p(-t / T) / delta);
}

double SubsolutionSpec::y0() const { return std::exp(log_y0); }
double SubsolutionSpec::y_star() const { return std::exp(log_y_star); }
double SubsolutionSpec::s_star() const { return std::exp(log_s_star); }
double SubsolutionSpec::theta_star() const { return std::exp(log_theta_star); }
double SubsolutionSpec::theta() const { return std::exp(log_theta); }
double SubsolutionSpec::T() const { return std::exp(log_T); }
double SubsolutionSpec::log_t_max() const { return std::min(log_T, -log_theta); }

SubsolutionSpec assemble_constants(const ProblemParams& params, double mu_u,
                                   double mu_w) {
  params.validate();
  if (!(mu_u > 0.0) || !(mu_w > 0.0) || !std::isfinite(mu_u) || !std::isfinite(mu_w)) {
    throw Error(ErrorKind::Domain, "mean densities must be positive");
  }
  SubsolutionSpec spec;
  spec.params = params;
  spec.mu_u = mu_u;
  spec.mu_w = mu_w;
  spec.mu_star = std::min(mu_u, mu_w);
  spec.mu_sup = std::max(mu_u, mu_w);
  spec.exponents = choose_shape_exponents(params.p, params.q, params.n);

  const double n = params.n;
  const double a = spec.exponents.alpha;
  const double b = spec.exponents.beta;
  const double d = spec.exponents.delta;
  const double p = params.p;
  const double q = params.q;
  const double log_R = std::log(params.R);
  const double log_Rn = n * log_R;

  spec.l = compute_l(spec.mu_star, params.R, params.n);
  const double log_l = std::log(spec.l);

  const auto yr = y_star_roots(a, b, log_l, spec.mu_sup, n, log_Rn);
  spec.log_y_star = kLogUp + *std::max_element(yr.begin(), yr.end());
  require_finite(spec.log_y_star, "y_star");

  spec.log_c1 = log_c(a, b, p, n, log_l);
  spec.log_c2 = log_c(b, a, q, n, log_l);
  const auto su = s_star_roots(a, b, d, p, n, log_l, spec.mu_sup, spec.log_c1);
  const auto sw = s_star_roots(b, a, d, q, n, log_l, spec.mu_sup, spec.log_c2);
  double s_min = log_Rn;
  for (double v : su) s_min = std::min(s_min, v);
  for (double v : sw) s_min = std::min(s_min, v);
  spec.log_s_star = kLogDown + s_min;
  require_finite(spec.log_s_star, "s_star");

  spec.log_theta_star =
      std::max(theta_root(a, b, d, p, n, log_R, spec.log_s_star, spec.mu_sup, log_l),
               theta_root(b, a, d, q, n, log_R, spec.log_s_star, spec.mu_sup, log_l));
  spec.log_theta = kLogUp + spec.log_theta_star;
  require_finite(spec.log_theta, "theta");

  const double log_gamma = std::min(
      {0.0, log_gamma_bound(p, n, log_l, log_R), log_gamma_bound(q, n, log_l, log_R)});
  spec.gamma = std::exp(log_gamma);

  const double mono_b = std::log1p(b / (n - 1.0 - n * b)) - log_Rn;
  const double mono_a = std::log1p(a / (n - 1.0 - n * a)) - log_Rn;
  const double ode = (spec.log_theta - log_gamma - std::log(d)) / d;
  spec.log_y0 = kLogUp + std::max({0.0, -spec.log_s_star, mono_b, mono_a,
                                   spec.log_y_star, ode});
  require_finite(spec.log_y0, "y0");
  spec.log_T = -d * spec.log_y0 - log_gamma - std::log(d);
  require_finite(spec.log_T, "T");
  if (!(spec.log_T + spec.log_theta < 0.0)) {
    throw Error(ErrorKind::InternalConsistency, "T >= 1/theta");
  }
  return spec;
}

std::vector<std::string> audit_spec(const SubsolutionSpec& spec) {
  std::vector<std::string> bad;
  const double n = spec.params.n;
  const double a = spec.exponents.alpha;
  const double b = spec.exponents.beta;
  const double d = spec.exponents.delta;
  const double p = spec.params.p;
  const double q = spec.params.q;
  const double log_R = std::log(spec.params.R);
  const double log_Rn = n * log_R;
  const double log_l = std::log(spec.l);
  auto check = [&](bool ok, const char* tag) {
    if (!ok) bad.emplace_back(tag);
  };

  const auto m = exponent_margins(spec.exponents, p, q, spec.params.n);
  check(m[0] > 0 && m[1] > 0, "exponents: first pair");
  check(m[2] > 0 && m[3] > 0, "exponents: second pair");
  check(a > 0 && a < 1 - 1 / n && b > 0 && b < 1 - 1 / n, "exponents: range of alpha, beta");
  check(d > 0 && d < 1 / n, "exponents: range of delta");

  const double l_ref = spec.mu_star * std::exp(log_Rn) /
                       (n * std::exp(1.0 / std::numbers::e) * (std::exp(log_Rn) + 1.0));
  check(std::abs(spec.l - l_ref) <= 1e-14 * l_ref, "l");

  // y* constraints, checked as inequalities on logs.
  const double Ly = spec.log_y_star;
  const double lhs1 = kLog2 + std::log(spec.mu_sup) + 1.0 - std::log(n) - log_l;
  const double lhs2 = kLog2 + 1.0 - log_l;
  check((1 - b) * Ly > lhs1 && (1 - b - 1 / n) * Ly > lhs2, "y_star: beta side");
  check((1 - a) * Ly > lhs1 && (1 - a - 1 / n) * Ly > lhs2, "y_star: alpha side");
  check(Ly > 0.0 && Ly > -log_Rn, "y_star: > max{1, R^-n}");

  const double Ls = spec.log_s_star;
  check(Ls < log_Rn, "s_star: < R^n");
  auto middle = [&](double self, double other, double e, double lc, const char* tag) {
    const bool c1 = (1 - other) * Ls < log_l + std::log(n) + (1 - other) * std::log(other) -
                                           kLog2 - 1.0 - std::log(spec.mu_sup);
    const bool c2 = (1 - other - 1 / n) * Ls < log_l - kLog2 - 1.0;
    const double e1 = (1 / n + other - 1) * e + 1 - other - d;
    const double e2 = (1 / n + other - 1) * e + 1 - other - 2 / n;
    const bool c3 = kLog2 + (d - self) * std::log(self) + log_l - lc < -e1 * Ls;
    const bool c4 = kLog2 + 2 * std::log(n) + (2 / n - self - 1) * std::log(self) + log_l - lc <
                    -e2 * Ls;
    check(c1 && c2 && c3 && c4, tag);
  };
  middle(a, b, p, spec.log_c1, "s_star: P side");
  middle(b, a, q, spec.log_c2, "s_star: Q side");
  check(std::abs(spec.log_c1 - log_c(a, b, p, n, log_l)) <= 1e-12 * std::abs(spec.log_c1) + 1e-300,
        "c1");
  check(std::abs(spec.log_c2 - log_c(b, a, q, n, log_l)) <= 1e-12 * std::abs(spec.log_c2) + 1e-300,
        "c2");

  const double th1 = theta_root(a, b, d, p, n, log_R, Ls, spec.mu_sup, log_l);
  const double th2 = theta_root(b, a, d, q, n, log_R, Ls, spec.mu_sup, log_l);
  check(spec.log_theta_star >= th1 && spec.log_theta_star >= th2, "theta_star");
  check(spec.log_theta > spec.log_theta_star, "theta > theta_star");

  const double lg = std::log(spec.gamma);
  check(lg <= 1e-15 && lg <= log_gamma_bound(p, n, log_l, log_R) + 1e-12 &&
            lg <= log_gamma_bound(q, n, log_l, log_R) + 1e-12,
        "gamma");

  const double Y = spec.log_y0;
  check(Y > 0.0 && Y > -Ls && Y > std::log1p(b / (n - 1 - n * b)) - log_Rn &&
            Y > std::log1p(a / (n - 1 - n * a)) - log_Rn && Y > spec.log_y_star &&
            d * Y > spec.log_theta - lg - std::log(d),
        "y0");
  check(std::abs(spec.log_T - (-d * Y - lg - std::log(d))) <= 1e-12 * std::abs(spec.log_T),
        "T");
  check(spec.log_T + spec.log_theta < 0.0, "T < 1/theta");
  return bad;
}

SubsolutionSpec with_log_theta(SubsolutionSpec spec, double log_theta) {
  spec.log_theta = log_theta;
  return spec;
}

SubsolutionSpec with_log_y0(SubsolutionSpec spec, double log_y0) {
  spec.log_y0 = log_y0;
  spec.log_T = -spec.exponents.delta * log_y0 - std::log(spec.gamma) -
               std::log(spec.exponents.delta);
  return spec;
}

ProfileLogs profile_logs(const SubsolutionSpec& spec, Species species, bool outer_branch,
                         double z, double log_y) {
  const double a = species == Species::U ? spec.exponents.alpha : spec.exponents.beta;
  const double d = spec.exponents.delta;
  const double log_l = std::log(spec.l);
  const double log_s = z - log_y;
  const double log_yprime = std::log(spec.gamma) + (1.0 + d) * log_y;
  if (!outer_branch) {
    return {log_l + (1.0 - a) * log_y + log_s, log_l + (1.0 - a) * log_y, kNegInf,
            log_l + std::log(1.0 - a) - a * log_y + log_yprime + log_s};
  }
  const double log_d = -log_y + log_expm1_plus(z, a);
  const double log_a = std::log(a);
  const double base = log_l + (1.0 - a) * log_a;
  return {log_l - a * log_a + a * log_d, base + (a - 1.0) * log_d,
          base + std::log(1.0 - a) + (a - 2.0) * log_d,
          base + std::log(1.0 - a) + (a - 1.0) * log_d + log_yprime - 2.0 * log_y};
}

double log_y_at(const SubsolutionSpec& spec, double t) {
  if (t < 0.0) throw Error(ErrorKind::Domain, "negative time");
  if (t == 0.0) return spec.log_y0;
  const double frac = std::exp(std::log(t) - spec.log_T);
  if (!(frac < 1.0)) throw Error(ErrorKind::Domain, "t is past the blow-up time");
  return spec.log_y0 - std::log1p(-frac) / spec.exponents.delta;
}

namespace {

double theta_times(const SubsolutionSpec& spec, double t) {
  return t == 0.0 ? 0.0 : std::exp(std::log(t) + spec.log_theta);
}

}  // namespace

ProfilePartials profile_partials(const SubsolutionSpec& spec, Species species, double s,
                                 double t) {
  if (s < 0.0) throw Error(ErrorKind::Domain, "s must be nonnegative");
  const double log_y = log_y_at(spec, t);
  const double z = std::log(s) + log_y;
  const bool outer = z > 0.0;
  const ProfileLogs L = profile_logs(spec, species, outer, z, log_y);
  return {std::exp(L.value), std::exp(L.ds), outer ? -std::exp(L.dss_abs) : 0.0,
          std::exp(L.dt)};
}

double phi(const SubsolutionSpec& spec, double s, double t) {
  return profile_partials(spec, Species::U, s, t).value;
}
double psi(const SubsolutionSpec& spec, double s, double t) {
  return profile_partials(spec, Species::W, s, t).value;
}

double lower_U(const SubsolutionSpec& spec, double s, double t) {
  const double log_y = log_y_at(spec, t);
  const double z = std::log(s) + log_y;
  const ProfileLogs L = profile_logs(spec, Species::U, z > 0.0, z, log_y);
  return std::exp(L.value - theta_times(spec, t));
}

double lower_W(const SubsolutionSpec& spec, double s, double t) {
  const double log_y = log_y_at(spec, t);
  const double z = std::log(s) + log_y;
  const ProfileLogs L = profile_logs(spec, Species::W, z > 0.0, z, log_y);
  return std::exp(L.value - theta_times(spec, t));
}

namespace {

// Sum of signed terms divided by the largest magnitude.
double normalised_sum(const SignedLog* terms, int count) {
  double top = kNegInf;
  for (int i = 0; i < count; ++i) {
    if (terms[i].sign != 0) top = std::max(top, terms[i].mag);
  }
  if (top == kNegInf) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < count; ++i) {
    if (terms[i].sign != 0) acc += terms[i].sign * std::exp(terms[i].mag - top);
  }
  return acc;
}

double operator_residual(const SubsolutionSpec& spec, const ProfileLogs& self,
                         const ProfileLogs& partner, bool outer, double log_s,
                         double theta_t, double e) {
  const double n = spec.params.n;
  SignedLog terms[4];
  int k = 0;
  terms[k++] = SignedLog::positive(self.dt - theta_t);
  terms[k++] = SignedLog::negative(spec.log_theta + self.value - theta_t);
  if (outer) {
    terms[k++] = SignedLog::positive(2.0 * std::log(n) + (2.0 - 2.0 / n) * log_s +
                                     self.dss_abs - theta_t);
  }
  const SignedLog X =
      log_diff(partner.value - theta_t, std::log(spec.mu_sup / n) + log_s);
  if (X.sign != 0) {
    const double g = (1.0 / n - 1.0) * log_s + X.mag;
    const double log_f = -(e / 2.0) * softplus(2.0 * g);
    terms[k++] = SignedLog{-X.sign, std::log(n) - theta_t + self.ds + X.mag + log_f};
  }
  return normalised_sum(terms, k);
}

}  // namespace

PointResidual residual_at(const SubsolutionSpec& spec, double z, double log_y,
                          double theta_t) {
  const bool outer = z > 0.0;
  const double log_s = z - log_y;
  const ProfileLogs lu = profile_logs(spec, Species::U, outer, z, log_y);
  const ProfileLogs lw = profile_logs(spec, Species::W, outer, z, log_y);
  return {operator_residual(spec, lu, lw, outer, log_s, theta_t, spec.params.p),
          operator_residual(spec, lw, lu, outer, log_s, theta_t, spec.params.q)};
}

namespace {

struct RowResult {
  std::array<double, 3> max_P{kNegInf, kNegInf, kNegInf};
  std::array<double, 3> max_Q{kNegInf, kNegInf, kNegInf};
  std::array<std::size_t, 3> counts{};
  std::vector<ResidualSample> samples;
};

double axis(std::size_t i, std::size_t count, double lo, double hi) {
  return lo + (hi - lo) * ((static_cast<double>(i) + 0.5) / static_cast<double>(count));
}

void verify_row(const SubsolutionSpec& spec, std::size_t N, std::size_t i, RowResult& out) {
  const double log_tmax = spec.log_t_max();
  const double xt = axis(i, N, -20.0, 40.0);
  const double tau = logistic(xt);
  const double t = tau * std::exp(log_tmax);
  const double theta_t = tau * std::exp(log_tmax + spec.log_theta);
  double log_one_minus;  // log(1 - t/T)
  if (log_tmax == spec.log_T) {
    log_one_minus = -softplus(xt);
  } else {
    log_one_minus = std::log1p(-tau * std::exp(log_tmax - spec.log_T));
  }
  const double log_y = spec.log_y0 - log_one_minus / spec.exponents.delta;
  const double log_Rn = spec.params.n * std::log(spec.params.R);

  auto record = [&](int region, double z) {
    const PointResidual r = residual_at(spec, z, log_y, theta_t);
    out.max_P[region] = std::max(out.max_P[region], r.P);
    out.max_Q[region] = std::max(out.max_Q[region], r.Q);
    ++out.counts[region];
    out.samples.push_back({region, z - log_y, t, r.P, r.Q});
  };

  for (std::size_t j = 0; j < N; ++j) {
    record(0, -softplus(-axis(j, N, -120.0, 30.0)));
  }
  const double width = spec.log_s_star + log_y;
  if (width > 0.0) {
    for (std::size_t j = 0; j < N; ++j) {
      record(1, width * logistic(axis(j, N, -40.0, 20.0)));
    }
  }
  for (std::size_t j = 0; j < N; ++j) {
    const double sig = logistic(axis(j, N, -15.0, 15.0));
    const double log_s = spec.log_s_star + sig * (log_Rn - spec.log_s_star);
    record(2, log_s + log_y);
  }
}

}  // namespace

VerificationReport verify_nonpositivity(const SubsolutionSpec& spec,
                                        const VerifyOptions& opts) {
  if (opts.samples < 1) throw Error(ErrorKind::Precondition, "samples must be positive");
  const std::size_t N = opts.samples;
  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.workers, N));
  std::vector<RowResult> rows(N);
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < N; i += workers) verify_row(spec, N, i, rows[i]);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  VerificationReport rep;
  rep.tolerance = opts.tolerance;
  rep.region_max_P.fill(kNegInf);
  rep.region_max_Q.fill(kNegInf);
  std::vector<ResidualSample> all;
  for (auto& row : rows) {
    for (int r = 0; r < 3; ++r) {
      rep.region_max_P[r] = std::max(rep.region_max_P[r], row.max_P[r]);
      rep.region_max_Q[r] = std::max(rep.region_max_Q[r], row.max_Q[r]);
      rep.sample_counts[r] += row.counts[r];
    }
    all.insert(all.end(), row.samples.begin(), row.samples.end());
  }
  rep.pass = true;
  for (int r = 0; r < 3; ++r) {
    rep.region_max[r] = std::max(rep.region_max_P[r], rep.region_max_Q[r]);
    if (rep.region_max[r] > opts.tolerance) rep.pass = false;
  }
  const std::size_t keep = std::min(opts.worst, all.size());
  auto worse = [](const ResidualSample& x, const ResidualSample& y) {
    const double vx = std::max(x.P, x.Q);
    const double vy = std::max(y.P, y.Q);
    if (vx != vy) return vx > vy;
    if (x.region != y.region) return x.region < y.region;
    if (x.t != y.t) return x.t < y.t;
    return x.log_s < y.log_s;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    worse);
  all.resize(keep);
  rep.worst = std::move(all);
  return rep;
}

double omega_n(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "n must be positive");
  const double h = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

MassThresholds initial_mass_thresholds(const SubsolutionSpec& spec) {
  const double w = omega_n(spec.params.n);
  const int n = spec.params.n;
  MassThresholds m;
  m.M1 = [spec, w, n](double r) { return r <= 0.0 ? 0.0 : w * lower_U(spec, std::pow(r, n), 0.0); };
  m.M2 = [spec, w, n](double r) { return r <= 0.0 ? 0.0 : w * lower_W(spec, std::pow(r, n), 0.0); };
  return m;
}

BlowupData generate_blowup_initial_data(const SubsolutionSpec& spec, double margin,
                                        std::size_t nodes) {
  if (!(margin > 0.0)) throw Error(ErrorKind::Domain, "margin must be positive");
  const int n = spec.params.n;
  const std::vector<double> r = uniform_radial_grid(spec.params.R, nodes);
  const double log_y = spec.log_y0;
  const double scale = 1.0 + margin;
  BlowupData out;
  out.u0.r = r;
  out.w0.r = r;
  std::vector<double> Uv(nodes), Wv(nodes);
  out.u0.values.resize(nodes);
  out.w0.values.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double z = r[j] > 0.0 ? n * std::log(r[j]) + log_y : kNegInf;
    const bool outer = z > 0.0;
    const ProfileLogs lu = profile_logs(spec, Species::U, outer, z, log_y);
    const ProfileLogs lw = profile_logs(spec, Species::W, outer, z, log_y);
    out.u0.values[j] = scale * n * std::exp(lu.ds);
    out.w0.values[j] = scale * n * std::exp(lw.ds);
    Uv[j] = scale * std::exp(lu.value);
    Wv[j] = scale * std::exp(lw.value);
    if (!std::isfinite(out.u0.values[j]) || !std::isfinite(out.w0.values[j])) {
      throw Error(ErrorKind::ConstantsOverflow,
                  "initial density not representable at r = " + std::to_string(r[j]));
    }
  }
  out.U0 = mass_profile_from_values(r, std::move(Uv), n);
  out.W0 = mass_profile_from_values(r, std::move(Wv), n);

  const MassThresholds th = initial_mass_thresholds(spec);
  const double w = omega_n(n);
  for (std::size_t j = 0; j < nodes; ++j) {
    const bool ok = out.u0.values[j] > 0.0 && out.w0.values[j] > 0.0 &&
                    w * out.U0.values[j] >= th.M1(r[j]) &&
                    w * out.W0.values[j] >= th.M2(r[j]) &&
                    (j == 0 || (out.U0.values[j] >= out.U0.values[j - 1] &&
                                out.W0.values[j] >= out.W0.values[j - 1]));
    if (!ok) {
      throw Error(ErrorKind::InternalConsistency,
                  "generated data violates the mass threshold at node " + std::to_string(j));
    }
  }
  return out;
}

}  // namespace chemolab
