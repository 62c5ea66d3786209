#include "chemolab/radial.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "chemolab/error.hpp"
#include "chemolab/numfmt.hpp"

namespace chemolab {

namespace {

void check_grid(std::span<const double> g, std::string_view what) {
  if (g.size() < 2) {
    throw Error(ErrorKind::Structural, std::string(what) + ": fewer than 2 nodes");
  }
  if (g.front() != 0.0) {
    throw Error(ErrorKind::Structural, std::string(what) + ": grid must start at 0");
  }
  for (std::size_t j = 1; j < g.size(); ++j) {
    if (!(g[j] > g[j - 1])) {
      throw Error(ErrorKind::Structural,
                  std::string(what) + ": grid not strictly increasing at node " +
                      std::to_string(j));
    }
  }
}

void check_n(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidDimension, "n must be >= 2");
}

// Gauss-Legendre rule on [0, 1] with m points (Newton on P_m).
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

GaussRule gauss_legendre01(int m) {
  GaussRule rule;
  rule.x.resize(m);
  rule.w.resize(m);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (m == 1) { p1 = z; p0 = 1.0; }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.x[i] = 0.5 * (1.0 - z);
    rule.w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

}  // namespace

void RadialProfile::validate() const {
  check_grid(r, "radial profile");
  if (values.size() != r.size()) {
    throw Error(ErrorKind::Structural, "radial profile: values/grid size mismatch");
  }
}

void MassProfile::validate() const {
  check_grid(s, "mass profile");
  if (values.size() != s.size() || r.size() != s.size()) {
    throw Error(ErrorKind::Structural, "mass profile: values/grid size mismatch");
  }
}

double dirichlet_value(double mu, double s_end, int n) {
  return mu * s_end / static_cast<double>(n);
}

std::vector<double> uniform_radial_grid(double R, std::size_t nodes) {
  if (nodes < 2) throw Error(ErrorKind::Structural, "grid needs >= 2 nodes");
  if (!(R > 0.0)) throw Error(ErrorKind::Domain, "radius must be positive");
  std::vector<double> r(nodes);
  const double last = static_cast<double>(nodes - 1);
  for (std::size_t j = 0; j < nodes; ++j) r[j] = R * (static_cast<double>(j) / last);
  r.back() = R;
  return r;
}

std::vector<double> mass_grid(std::span<const double> r, int n) {
  std::vector<double> s(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) s[j] = std::pow(r[j], n);
  return s;
}

RadialProfile sample_radial(const std::function<double(double)>& u, double R,
                            std::size_t nodes) {
  RadialProfile out;
  out.r = uniform_radial_grid(R, nodes);
  out.values.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) out.values[j] = u(out.r[j]);
  return out;
}

MassProfile to_mass_profile(const RadialProfile& u, int n) {
  check_n(n);
  u.validate();
  const GaussRule rule = gauss_legendre01(n / 2 + 1);
  MassProfile U;
  U.r = u.r;
  U.s = mass_grid(u.r, n);
  U.values.assign(u.size(), 0.0);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    const double a = u.r[j];
    const double d = u.r[j + 1] - a;
    double cell = 0.0;
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      const double x = rule.x[k];
      const double rr = a + d * x;
      const double interp = u.values[j] * (1.0 - x) + u.values[j + 1] * x;
      cell += rule.w[k] * std::pow(rr, n - 1) * interp;
    }
    acc += cell * d;
    U.values[j + 1] = acc;
  }
  return mass_profile_from_values(std::move(U.r), std::move(U.values), n);
}

MassProfile mass_profile_from_values(std::vector<double> r,
                                     std::vector<double> values, int n) {
  check_n(n);
  MassProfile U;
  U.s = mass_grid(r, n);
  U.r = std::move(r);
  U.values = std::move(values);
  U.validate();
  const double s_end = U.s.back();
  U.mu = static_cast<double>(n) * U.values.back() / s_end;
  U.values.front() = 0.0;
  U.values.back() = dirichlet_value(U.mu, s_end, n);
  return U;
}

Stencil3 three_point(std::span<const double> x, std::span<const double> f,
                     std::size_t j) {
  const double h1 = x[j] - x[j - 1];
  const double h2 = x[j + 1] - x[j];
  const double fm = f[j - 1];
  const double f0 = f[j];
  const double fp = f[j + 1];
  const double d1 = (-h2 / (h1 * (h1 + h2))) * fm + ((h2 - h1) / (h1 * h2)) * f0 +
                    (h1 / (h2 * (h1 + h2))) * fp;
  const double d2 = 2.0 * ((fp - f0) / h2 - (f0 - fm) / h1) / (h1 + h2);
  return {d1, d2};
}

RadialProfile from_mass_profile(const MassProfile& U, int n) {
  check_n(n);
  U.validate();
  const std::size_t m = U.size();
  if (m < 3) throw Error(ErrorKind::Structural, "from_mass_profile needs >= 3 nodes");
  RadialProfile u;
  u.r = U.r;
  u.values.resize(m);
  const auto& s = U.s;
  const auto& f = U.values;
  {
    const double h1 = s[1] - s[0];
    const double h2 = s[2] - s[1];
    const double d = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] +
                     (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
    u.values[0] = n * d;
  }
  for (std::size_t j = 1; j + 1 < m; ++j) u.values[j] = n * three_point(s, f, j).d1;
  {
    const std::size_t k = m - 1;
    const double h1 = s[k - 1] - s[k - 2];
    const double h2 = s[k] - s[k - 1];
    const double d = h2 / (h1 * (h1 + h2)) * f[k - 2] - (h1 + h2) / (h1 * h2) * f[k - 1] +
                     (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[k];
    u.values[k] = n * d;
  }
  return u;
}

RadialProfile radial_gradient(const MassProfile& W, int n) {
  check_n(n);
  W.validate();
  RadialProfile g;
  g.r = W.r;
  g.values.assign(W.size(), 0.0);
  for (std::size_t j = 1; j < W.size(); ++j) {
    const double excess = W.values[j] - W.mu * W.s[j] / n;
    g.values[j] = -excess * std::pow(W.r[j], 1 - n);
  }
  return g;
}

double sup_density(std::span<const double> s, std::span<const double> U, int n) {
  double best = 0.0;
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    best = std::max(best, (U[j + 1] - U[j]) / (s[j + 1] - s[j]));
  }
  return n * best;
}

double drift_factor(double W, double s, double x, double p, int n) {
  const double excess = W - x * s / n;
  const double g = std::pow(s, 1.0 / n - 1.0) * excess;
  return excess * std::exp(-0.5 * p * std::log1p(g * g));
}

OperatorResidual eval_P(const MassProfile& phi, const MassProfile& psi,
                        std::span<const double> phi_t, double mu_ref, double p,
                        int n) {
  check_n(n);
  phi.validate();
  psi.validate();
  if (phi.s != psi.s) throw Error(ErrorKind::Structural, "eval_P: grids differ");
  if (phi_t.size() != phi.size()) {
    throw Error(ErrorKind::Structural, "eval_P: time derivative size mismatch");
  }
  OperatorResidual res;
  const std::size_t m = phi.size();
  if (m < 3) return res;
  res.s.reserve(m - 2);
  res.values.reserve(m - 2);
  res.scale.reserve(m - 2);
  const double nn = static_cast<double>(n);
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const double s = phi.s[j];
    const Stencil3 st = three_point(phi.s, phi.values, j);
    const double diffusion = nn * nn * std::pow(s, 2.0 - 2.0 / nn) * st.d2;
    const double drift = nn * st.d1 * drift_factor(psi.values[j], s, mu_ref, p, n);
    res.s.push_back(s);
    res.values.push_back(phi_t[j] - diffusion - drift);
    res.scale.push_back(std::abs(phi_t[j]) + std::abs(diffusion) + std::abs(drift));
  }
  return res;
}

OperatorResidual eval_Q(const MassProfile& phi, const MassProfile& psi,
                        std::span<const double> psi_t, double mu_ref, double q,
                        int n) {
  return eval_P(psi, phi, psi_t, mu_ref, q, n);
}

namespace {

std::string csv_body(std::string_view kind, int n, double R, double mu,
                     std::span<const double> grid, std::span<const double> values) {
  std::string out = "# kind,n,R,mu\n# ";
  out += kind;
  out += ',' + std::to_string(n) + ',' + fmt_double(R) + ',' + fmt_double(mu) + '\n';
  out += "grid,value\n";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out += fmt_double(grid[j]);
    out += ',';
    out += fmt_double(values[j]);
    out += '\n';
  }
  return out;
}

double parse_number(std::string_view tok) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(ErrorKind::Parse, "profile csv: bad number '" + std::string(tok) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string to_csv(const RadialProfile& u, std::string_view kind, int n, double mu) {
  u.validate();
  return csv_body(kind, n, u.radius(), mu, u.r, u.values);
}

std::string to_csv(const MassProfile& U, std::string_view kind, int n) {
  U.validate();
  return csv_body(kind, n, U.r.back(), U.mu, U.s, U.values);
}

CsvProfile parse_profile_csv(std::string_view text) {
  CsvProfile out;
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.size() < 3 || lines[0] != "# kind,n,R,mu" || lines[2] != "grid,value") {
    throw Error(ErrorKind::Parse, "profile csv: missing header");
  }
  auto meta = lines[1];
  if (!meta.starts_with("# ")) throw Error(ErrorKind::Parse, "profile csv: bad metadata");
  meta.remove_prefix(2);
  const auto fields = split(meta, ',');
  if (fields.size() != 4) throw Error(ErrorKind::Parse, "profile csv: bad metadata");
  out.kind = std::string(fields[0]);
  out.n = static_cast<int>(parse_number(fields[1]));
  out.R = parse_number(fields[2]);
  out.mu = parse_number(fields[3]);
  for (std::size_t i = 3; i < lines.size(); ++i) {
    const auto cols = split(lines[i], ',');
    if (cols.size() != 2) {
      throw Error(ErrorKind::Parse, "profile csv: line " + std::to_string(i + 1));
    }
    out.grid.push_back(parse_number(cols[0]));
    out.values.push_back(parse_number(cols[1]));
  }
  return out;
}

}  // namespace chemolab
