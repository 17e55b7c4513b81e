#include "elltail/radial.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "elltail/error.hpp"

namespace elltail {

double RadialLaw::log_survival_asymptotic(double u) const {
  return std::log(C) + beta * std::log(u) - L * std::pow(u, gamma);
}

RadialLaw make_radial_law(double C, double beta, double L, double gamma) {
  require(C > 0 && L > 0 && gamma > 0 && std::isfinite(beta), ErrorCode::InvalidArgument,
          "radial law needs C, L, gamma > 0");
  return RadialLaw{C, beta, L, gamma, std::nullopt};
}

double MarginalTail::log_survival_asymptotic(double z) const {
  return std::log(Cp) + betap * std::log(z) - Lp * std::pow(z, gammap);
}

SlowlyVarying SlowlyVarying::constant(double c) {
  require(c > 0, ErrorCode::InvalidArgument, "slowly varying constant must be positive");
  return SlowlyVarying(Kind::constant, 0.0, c);
}

SlowlyVarying SlowlyVarying::log_power(double a, double c) {
  require(c > 0 && std::isfinite(a), ErrorCode::InvalidArgument, "bad log-power slowly varying function");
  return SlowlyVarying(Kind::log_power, a, c);
}

double SlowlyVarying::log_value(double t) const {
  if (kind_ == Kind::constant) return std::log(c_);
  return std::log(c_) + a_ * std::log(std::log(t));
}

RadialLaw power_exponential_radial(int dim, double kappa) {
  require(dim >= 2, ErrorCode::InvalidArgument, "power-exponential radius needs dim >= 2");
  require(kappa > 0, ErrorCode::InvalidArgument, "kappa must be positive");
  const double gamma = 2.0 * kappa;
  const double shape = dim / gamma;
  RadialLaw law;
  law.gamma = gamma;
  law.L = 0.5;
  law.beta = dim - gamma;
  law.C = std::exp(-boost::math::lgamma(shape) - (shape - 1.0) * std::numbers::ln2);
  law.exact = PowerExponentialSpec{dim, kappa};
  return law;
}

PowerExponentialSpec preset_spec(std::string_view name, int dim) {
  if (name == "gaussian") return {dim, 1.0};
  if (name == "laplace") return {dim, 0.5};
  if (name.starts_with("pe:")) {
    const std::string value(name.substr(3));
    double gamma = 0.0;
    try {
      std::size_t used = 0;
      gamma = std::stod(value, &used);
      require(used == value.size(), ErrorCode::UsageError, "");
    } catch (const std::exception&) {
      throw Error(ErrorCode::UsageError, "bad copula preset '" + std::string(name) + "'");
    }
    require(gamma > 0, ErrorCode::UsageError, "pe:<gamma> needs gamma > 0");
    return {dim, gamma / 2.0};
  }
  throw Error(ErrorCode::UsageError, "unknown copula preset '" + std::string(name) + "'");
}

RadialLaw radial_preset(std::string_view name, int dim) {
  const auto spec = preset_spec(name, dim);
  return power_exponential_radial(spec.dim, spec.kappa);
}

RadialLaw sub_vector_law(const RadialLaw& law, int dim, int k) {
  require(k >= 1 && k <= dim, ErrorCode::InvalidArgument, "sub-vector size out of range");
  if (k == dim) return law;
  const double m = dim - k;
  RadialLaw out = law;
  out.exact.reset();
  out.C = law.C * std::exp(boost::math::lgamma(dim / 2.0) - boost::math::lgamma(k / 2.0) -
                           0.5 * m * std::log(law.gamma * law.L / 2.0));
  out.beta = law.beta - law.gamma * m / 2.0;
  return out;
}

double radial_survival_exact(const PowerExponentialSpec& spec, double r) {
  require(r >= 0, ErrorCode::InvalidArgument, "radius must be non-negative");
  if (r == 0) return 1.0;
  return boost::math::gamma_q(spec.gamma_shape(), 0.5 * std::pow(r, spec.gamma()));
}

double radial_survival_exact(const RadialLaw& law, double r) {
  require(law.exact.has_value(), ErrorCode::NoExactSpec, "law carries asymptotic parameters only");
  return radial_survival_exact(*law.exact, r);
}

double radial_density_exact(const PowerExponentialSpec& spec, double r) {
  if (r <= 0) return 0.0;
  const double a = spec.dim / (2.0 * spec.kappa);
  const double log_norm = std::log(static_cast<double>(spec.dim)) - boost::math::lgamma(1.0 + a) -
                          a * std::numbers::ln2;
  return std::exp(log_norm + (spec.dim - 1) * std::log(r) - 0.5 * std::pow(r, 2.0 * spec.kappa));
}

MarginalTail marginal_tail(const RadialLaw& law, int dim) {
  require(dim >= 2, ErrorCode::InvalidArgument, "dimension must be at least 2");
  MarginalTail mt;
  mt.Cp = law.C * std::exp(boost::math::lgamma(dim / 2.0) - std::log(2.0 * std::sqrt(std::numbers::pi)) -
                           0.5 * (dim - 1) * std::log(law.gamma * law.L / 2.0));
  mt.betap = law.beta - law.gamma * (dim - 1) / 2.0;
  mt.Lp = law.L;
  mt.gammap = law.gamma;
  return mt;
}

double marginal_survival_exact(const PowerExponentialSpec& spec, double z) {
  if (z == 0) return 0.5;
  if (z < 0) return 1.0 - marginal_survival_exact(spec, -z);
  // Z_1^2 = R^2 B with B ~ Beta(1/2, (d-1)/2). Writing B = cos^2(phi) turns the
  // Beta density into sin^{d-2}(phi) up to normalization, removing the endpoint
  // singularity.
  const int d = spec.dim;
  const double shape = spec.gamma_shape();
  const double gamma = spec.gamma();
  const double norm = 1.0 / boost::math::beta(0.5, (d - 1) / 2.0);
  auto integrand = [&](double phi) {
    const double c = std::cos(phi);
    if (c <= 0) return 0.0;
    const double s = std::sin(phi);
    const double weight = d == 2 ? 1.0 : std::pow(s, d - 2);
    return weight * boost::math::gamma_q(shape, 0.5 * std::pow(z / c, gamma));
  };
  double error = 0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, std::numbers::pi / 2, 12, 1e-12, &error);
  // 0.5 for the sign of Z_1, 2 from the change of variables.
  return norm * integral;
}

double marginal_survival_exact(const RadialLaw& law, double z) {
  require(law.exact.has_value(), ErrorCode::NoExactSpec, "law carries asymptotic parameters only");
  return marginal_survival_exact(*law.exact, z);
}

double quantile_expansion(const MarginalTail& mt, double t) {
  require(t > std::numbers::e, ErrorCode::InvalidArgument, "quantile expansion needs t > e");
  const double log_t = std::log(t);
  const double lead = std::pow(log_t / mt.Lp, 1.0 / mt.gammap);
  // log C' + (beta'/gamma)(log log t - log L): the additive form stays finite at beta' = 0.
  const double constant = std::log(mt.Cp) + mt.betap / mt.gammap * (std::log(log_t) - std::log(mt.Lp));
  return lead + constant / (mt.gammap * mt.Lp) * std::pow(log_t / mt.Lp, 1.0 / mt.gammap - 1.0);
}

double threshold_z(const MarginalTail& mt, const RegularlyVaryingMargin& margin, double x, double t) {
  require(margin.alpha > 0 && margin.c > 0 && x > 0, ErrorCode::InvalidArgument,
          "threshold needs alpha, c, x > 0");
  require(t > std::numbers::e, ErrorCode::InvalidArgument, "threshold expansion needs t > e");
  const double g = mt.gammap;
  const double l = mt.Lp;
  const double log_t = std::log(t);
  const double base = margin.alpha * log_t / l;
  const double shift_x = margin.alpha * std::log(x) - std::log(margin.c) + std::log(mt.Cp) +
                         mt.betap / g * (std::log(margin.alpha) - std::log(l));
  const double shift_t = margin.ell.log_value(t) + mt.betap / g * std::log(log_t);
  return std::pow(base, 1.0 / g) + (shift_x + shift_t) / (g * l) / std::pow(base, 1.0 - 1.0 / g);
}

MillsBounds mills_bounds(const PowerExponentialSpec& spec, double r) {
  require(r > 0, ErrorCode::InvalidArgument, "Mills bounds need r > 0");
  const double h = radial_density_exact(spec, r);
  const double k = spec.kappa;
  return {h * r / (k * (std::pow(r, 2 * k) + 2.0)), h / (k * std::pow(r, 2 * k - 1))};
}

}  // namespace elltail
