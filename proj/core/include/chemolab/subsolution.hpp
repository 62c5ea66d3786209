#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "chemolab/model.hpp"
#include "chemolab/radial.hpp"

namespace chemolab {

struct ShapeExponents {
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  int halvings = 0;
};

/// Margins of the four admissibility inequalities, in the order
/// (1-b)(1-p)-d, (1-a)(1-q)-d, (1/n+b-1)p+1-b-2/n, (1/n+a-1)q+1-a-2/n.
std::array<double, 4> exponent_margins(const ShapeExponents& e, double p,
                                       double q, int n);

/// First admissible triple of the halving sequence starting from
/// ((1-1/n)/4, (1-1/n)/4, 1/(2n)).
ShapeExponents choose_shape_exponents(double p, double q, int n);

double compute_l(double mu_star, double R, int n);

/// y(t) = (y0^{-d} - g d t)^{-1/d}; throws Domain for t >= blow-up time.
double y_of_t(double t, double gamma, double delta, double y0);
double blowup_time(double gamma, double delta, double y0);

/// Constant set of the explicit subsolution pair. Quantities that leave the
/// double range for realistic inputs are stored as natural logarithms.
struct SubsolutionSpec {
  ProblemParams params;
  double mu_u = 0.0;
  double mu_w = 0.0;
  double mu_star = 0.0;  // min{mu_u, mu_w}
  double mu_sup = 0.0;   // max{mu_u, mu_w}
  ShapeExponents exponents;
  double l = 0.0;
  double gamma = 0.0;
  double log_c1 = 0.0;
  double log_c2 = 0.0;
  double log_y_star = 0.0;
  double log_s_star = 0.0;
  double log_theta_star = 0.0;
  double log_theta = 0.0;
  double log_y0 = 0.0;
  double log_T = 0.0;

  double y0() const;
  double y_star() const;
  double s_star() const;
  double theta_star() const;
  double theta() const;
  double T() const;
  /// log of min(T, 1/theta), the verified time window.
  double log_t_max() const;
};

/// Builds the full constant set. Throws Regime outside the blow-up quadrant
/// and ConstantsOverflow if a constant is not representable even in log form.
SubsolutionSpec assemble_constants(const ProblemParams& params, double mu_u,
                                   double mu_w);

/// Re-runs every closed-form constraint against the stored constants and
/// returns the names of the ones that fail (empty when the spec is sound).
std::vector<std::string> audit_spec(const SubsolutionSpec& spec);

/// Replaces theta (T and y0 untouched).
SubsolutionSpec with_log_theta(SubsolutionSpec spec, double log_theta);
/// Replaces y0 and recomputes T from it.
SubsolutionSpec with_log_y0(SubsolutionSpec spec, double log_y0);

enum class Species { U, W };

/// Natural logs of Phi, Phi_s, |Phi_ss| and Phi_t (or the Psi analogues) on
/// one branch. The point is given by z = log(y s) and log y; the outer branch
/// requires z >= 0. |Phi_ss| is -inf on the inner branch.
struct ProfileLogs {
  double value;
  double ds;
  double dss_abs;
  double dt;
};
ProfileLogs profile_logs(const SubsolutionSpec& spec, Species species,
                         bool outer_branch, double z, double log_y);

double log_y_at(const SubsolutionSpec& spec, double t);

struct ProfilePartials {
  double value;
  double ds;
  double dss;
  double dt;
};
/// Phi(s,t) and its partials (Species::U) or Psi (Species::W), evaluated in
/// double precision; the branch is chosen by s <= 1/y(t).
ProfilePartials profile_partials(const SubsolutionSpec& spec, Species species,
                                 double s, double t);
double phi(const SubsolutionSpec& spec, double s, double t);
double psi(const SubsolutionSpec& spec, double s, double t);
/// e^{-theta t} Phi and e^{-theta t} Psi.
double lower_U(const SubsolutionSpec& spec, double s, double t);
double lower_W(const SubsolutionSpec& spec, double s, double t);

struct VerifyOptions {
  std::size_t samples = 400;  // per axis and region
  double tolerance = 1e-9;
  std::size_t workers = 1;
  std::size_t worst = 100;
};

struct ResidualSample {
  int region;
  double log_s;
  double t;
  double P;
  double Q;
};

/// Per-region maxima of P and Q normalised by the largest term magnitude at
/// each sample. Regions: 0 inner (0,1/y), 1 middle (1/y,s*], 2 outer (s*,R^n).
struct VerificationReport {
  std::array<double, 3> region_max{};
  std::array<double, 3> region_max_P{};
  std::array<double, 3> region_max_Q{};
  std::array<std::size_t, 3> sample_counts{};
  double tolerance = 0.0;
  bool pass = false;
  std::vector<ResidualSample> worst;
};

VerificationReport verify_nonpositivity(const SubsolutionSpec& spec,
                                        const VerifyOptions& opts = {});

/// Normalised P and Q at one point (z = log(y s)); exposed for tests.
struct PointResidual {
  double P;
  double Q;
};
PointResidual residual_at(const SubsolutionSpec& spec, double z, double log_y,
                          double theta_t);

/// Surface area of the unit sphere in R^n.
double omega_n(int n);

struct MassThresholds {
  std::function<double(double)> M1;
  std::function<double(double)> M2;
};
MassThresholds initial_mass_thresholds(const SubsolutionSpec& spec);

/// Densities (1+margin) n Phi_s(r^n, 0) and (1+margin) n Psi_s(r^n, 0) on a
/// uniform grid, together with their exact mass profiles (1+margin) Phi(s, 0).
struct BlowupData {
  RadialProfile u0;
  RadialProfile w0;
  MassProfile U0;
  MassProfile W0;
};
BlowupData generate_blowup_initial_data(const SubsolutionSpec& spec,
                                        double margin, std::size_t nodes);

}  // namespace chemolab
