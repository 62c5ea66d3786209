#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chemolab {

/// Samples of a radial density u(r) on a grid 0 = r_0 < ... < r_N = R.
struct RadialProfile {
  std::vector<double> r;
  std::vector<double> values;

  std::size_t size() const noexcept { return r.size(); }
  double radius() const { return r.back(); }
  /// Throws Error{Structural} on empty, mismatched or non-increasing grids
  /// and on endpoints other than 0.
  void validate() const;
};

/// Cumulative mass U(s) = \int_0^{s^{1/n}} r^{n-1} u dr on s_j = r_j^n.
/// `mu` is the mean density of the generating species, so that
/// values.back() == dirichlet_value(mu, s.back(), n) bit for bit.
struct MassProfile {
  std::vector<double> r;
  std::vector<double> s;
  std::vector<double> values;
  double mu = 0.0;

  std::size_t size() const noexcept { return s.size(); }
  void validate() const;
};

/// P or Q sampled at interior nodes. `scale` holds the sum of the absolute
/// values of the three terms at each node, for relative thresholds.
struct OperatorResidual {
  std::vector<double> s;
  std::vector<double> values;
  std::vector<double> scale;
};

/// Boundary value mu s_end / n of U at s = R^n.
double dirichlet_value(double mu, double s_end, int n);

std::vector<double> uniform_radial_grid(double R, std::size_t nodes);
std::vector<double> mass_grid(std::span<const double> r, int n);

RadialProfile sample_radial(const std::function<double(double)>& u, double R,
                            std::size_t nodes);

/// Builds (U, mu) by integrating the piecewise-linear interpolant of u
/// against r^{n-1} exactly on each cell (trapezoidal product rule):
/// exact for constant and linear u, second order otherwise.
MassProfile to_mass_profile(const RadialProfile& u, int n);

/// Builds a mass profile from closed-form values U(s_j) on the grid `r`; the
/// end value is snapped onto the Dirichlet pin for mu = n U(R^n) / R^n.
MassProfile mass_profile_from_values(std::vector<double> r,
                                     std::vector<double> values, int n);

/// u = n dU/ds with three-point Lagrange differences (one-sided at the ends).
RadialProfile from_mass_profile(const MassProfile& U, int n);

/// v_r(r) = -r^{1-n} (W(r^n) - mu_w r^n / n); zero at the origin.
RadialProfile radial_gradient(const MassProfile& W, int n);

/// n max_j (U_{j+1} - U_j) / (s_{j+1} - s_j): the largest cell-averaged
/// density represented by a mass profile.
double sup_density(std::span<const double> s, std::span<const double> U,
                   int n);

/// F_W(x) = (W - x s/n) (1 + s^{2/n-2} (W - x s/n)^2)^{-p/2}, the drift factor
/// at one node; nonincreasing in x for p < 1.
double drift_factor(double W, double s, double x, double p, int n);

/// P[phi, psi] with mean mu_ref and exponent p; `phi_t` holds the time
/// derivative at every node (interior entries are used).
OperatorResidual eval_P(const MassProfile& phi, const MassProfile& psi,
                        std::span<const double> phi_t, double mu_ref,
                        double p, int n);
/// Q[phi, psi] = P[psi, phi] with exponent q.
OperatorResidual eval_Q(const MassProfile& phi, const MassProfile& psi,
                        std::span<const double> psi_t, double mu_ref,
                        double q, int n);

/// Nonuniform three-point first and second derivatives at interior node j.
struct Stencil3 {
  double d1;
  double d2;
};
Stencil3 three_point(std::span<const double> x, std::span<const double> f,
                     std::size_t j);

// CSV: "# kind,n,R,mu", "# <kind>,<n>,<R>,<mu>", "grid,value", rows.
std::string to_csv(const RadialProfile& u, std::string_view kind, int n,
                   double mu);
std::string to_csv(const MassProfile& U, std::string_view kind, int n);

struct CsvProfile {
  std::string kind;
  int n = 0;
  double R = 0.0;
  double mu = 0.0;
  std::vector<double> grid;
  std::vector<double> values;
};
CsvProfile parse_profile_csv(std::string_view text);

}  // namespace chemolab
