#pragma once

// Weibullian radial laws P(R > u) ~ C u^beta exp(-L u^gamma) and the quantities
// derived from them: marginal tails of the elliptical vector, quantile and
// threshold expansions, and exact results for the power-exponential family.

#include <optional>
#include <string>
#include <string_view>

namespace elltail {

// Radius density proportional to r^{dim-1} exp(-r^{2 kappa} / 2).
struct PowerExponentialSpec {
  int dim = 2;
  double kappa = 1.0;

  double gamma() const { return 2.0 * kappa; }
  // Shape of the Gamma law followed by R^gamma / 2.
  double gamma_shape() const { return dim / gamma(); }
};

struct RadialLaw {
  double C = 1.0;
  double beta = 0.0;
  double L = 0.5;
  double gamma = 2.0;
  std::optional<PowerExponentialSpec> exact;

  double log_survival_asymptotic(double u) const;
};

// Checks C, L, gamma > 0.
RadialLaw make_radial_law(double C, double beta, double L, double gamma);

struct MarginalTail {
  double Cp = 1.0;
  double betap = 0.0;
  double Lp = 0.5;
  double gammap = 2.0;

  // log(C' z^{beta'} exp(-L' z^{gamma'})), z > 0.
  double log_survival_asymptotic(double z) const;
};

// l(t) = c, or l(t) = c * (log t)^a.
class SlowlyVarying {
 public:
  enum class Kind { constant, log_power };

  static SlowlyVarying constant(double c = 1.0);
  static SlowlyVarying log_power(double a, double c = 1.0);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  double c() const { return c_; }
  double a() const { return a_; }
  double log_value(double t) const;

 private:
  SlowlyVarying(Kind kind, double a, double c) : kind_(kind), a_(a), c_(c) {}
  Kind kind_;
  double a_;
  double c_;
};

// F-bar(t) ~ c (t^alpha l(t))^{-1} for one coordinate.
struct RegularlyVaryingMargin {
  double alpha = 2.0;
  double c = 1.0;
  SlowlyVarying ell = SlowlyVarying::constant();
};

RadialLaw power_exponential_radial(int dim, double kappa);

// "gaussian", "laplace" or "pe:<gamma>".
RadialLaw radial_preset(std::string_view name, int dim);
PowerExponentialSpec preset_spec(std::string_view name, int dim);

// Radial law of a k-dimensional sub-vector of a dim-dimensional elliptical
// vector with radius `law` (R * sqrt(Beta(k/2, (dim-k)/2)) tail transfer).
// Returns `law` unchanged when k == dim.
RadialLaw sub_vector_law(const RadialLaw& law, int dim, int k);

double radial_survival_exact(const RadialLaw& law, double r);
double radial_survival_exact(const PowerExponentialSpec& spec, double r);
double radial_density_exact(const PowerExponentialSpec& spec, double r);

MarginalTail marginal_tail(const RadialLaw& law, int dim);

// P(Z_1 > z), exact up to quadrature error.
double marginal_survival_exact(const PowerExponentialSpec& spec, double z);
double marginal_survival_exact(const RadialLaw& law, double z);

// G_1^{<-}(1 - 1/t) to the order of the first correction; t > e.
double quantile_expansion(const MarginalTail& mt, double t);

// G-bar_1^{<-}(c F-bar_0(t x)) to the order of the first correction.
double threshold_z(const MarginalTail& mt, const RegularlyVaryingMargin& margin, double x, double t);

struct MillsBounds {
  double lower;
  double upper;
};

MillsBounds mills_bounds(const PowerExponentialSpec& spec, double r);

}  // namespace elltail
