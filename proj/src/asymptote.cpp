#include "elltail/asymptote.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "elltail/error.hpp"

namespace elltail {
namespace {

constexpr double kDegenerateH = 1e-12;

// log of Upsilon * base^{beta*} * u^{-|I|} * exp(-L base^{gamma/2}), base = lambda u^2 + 2 u s.
double log_joint(double log_ups, double beta_star, double lambda, int size_i, double L, double gamma, double u,
                 double s) {
  const double base = lambda * u * u + 2.0 * u * s;
  require(base > 0, ErrorCode::InvalidArgument, "threshold shift outside the expansion's regime");
  return log_ups + beta_star * std::log(base) - size_i * std::log(u) - L * std::pow(base, gamma / 2.0);
}

}  // namespace

double beta_exponent(double beta, double gamma, int size_i, int size_j) {
  require(size_i >= 1 && size_j >= 0, ErrorCode::InvalidArgument, "need |I| >= 1 and |J| >= 0");
  const int d = size_i + size_j;
  return (beta + size_i + gamma * (1.0 + size_j / 2.0 - d)) / 2.0;
}

std::map<int, LimitThreshold> limit_thresholds(const QPSolution& qp) {
  std::map<int, LimitThreshold> out;
  for (int j : qp.inactive) {
    out[j] = qp.e_star_at(j) <= 1.0 + kQpFaceTolerance ? LimitThreshold::zero : LimitThreshold::neg_infinity;
  }
  return out;
}

double log_upsilon(const CorrelationMatrix& sigma, const RadialLaw& block_law, const QPSolution& qp,
                   const OrthantOptions& options) {
  const int d = static_cast<int>(qp.block.size());
  const int ni = static_cast<int>(qp.active.size());
  const int nj = static_cast<int>(qp.inactive.size());
  double log_h = 0;
  for (const auto& [label, h] : qp.h) {
    require(h > kDegenerateH, ErrorCode::DegenerateH, "h_" + std::to_string(label) + " = " + std::to_string(h));
    log_h += std::log(h);
  }
  const double orthant =
      nj == 0 ? 1.0 : orthant_factor(sigma, qp.active, qp.inactive, limit_thresholds(qp), options);
  const double log_det_ii = ni == 1 ? 0.0 : spd_log_det(sub_block(sigma, qp.active, qp.active));
  return std::log(block_law.C) + (1.0 + nj / 2.0 - d) * std::log(block_law.gamma * block_law.L) +
         boost::math::lgamma(d / 2.0) + (d / 2.0 - 1.0) * std::numbers::ln2 + std::log(orthant) -
         ni / 2.0 * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_ii - log_h;
}

double upsilon(const CorrelationMatrix& sigma, const RadialLaw& block_law, const QPSolution& qp,
               const OrthantOptions& options) {
  return std::exp(log_upsilon(sigma, block_law, qp, options));
}

double joint_elliptical_tail(const CorrelationMatrix& sigma, const RadialLaw& law, double u, const Vector& x_shift,
                             const OrthantOptions& options) {
  require(u > 0, ErrorCode::InvalidArgument, "u must be positive");
  require(x_shift.size() == sigma.dim(), ErrorCode::InvalidArgument, "shift length must match the dimension");
  const QPSolution qp = solve_qp(sigma);
  // x^T Sigma^{-1} e* = x_I^T Sigma_II^{-1} 1_I = sum_i h_i x_i
  double s = 0;
  for (const auto& [label, h] : qp.h) s += h * x_shift(label - 1);
  const double beta_star = beta_exponent(law.beta, law.gamma, static_cast<int>(qp.active.size()),
                                         static_cast<int>(qp.inactive.size()));
  return log_joint(log_upsilon(sigma, law, qp, options), beta_star, qp.lambda, static_cast<int>(qp.active.size()),
                   law.L, law.gamma, u, s);
}

double MarginSpec::c_of(int label) const {
  if (c.empty()) return 1.0;
  auto it = c.find(label);
  require(it != c.end(), ErrorCode::IndexOutOfRange, "no tail constant c_" + std::to_string(label));
  return it->second;
}

TailQuery make_tail_query(IndexSet set, std::map<int, double> x, double t) {
  require(!set.empty(), ErrorCode::InvalidArgument, "tail set needs at least one coordinate");
  for (int j : set) {
    auto it = x.find(j);
    require(it != x.end() && it->second > 0 && std::isfinite(it->second), ErrorCode::InvalidArgument,
            "threshold x_" + std::to_string(j) + " must be given and positive");
  }
  require(x.size() == set.size(), ErrorCode::InvalidArgument, "thresholds given outside the tail set");
  require(t > 1 && std::isfinite(t), ErrorCode::InvalidArgument, "scale t must exceed 1");
  return TailQuery{std::move(set), std::move(x), t};
}

ExpansionResult tail_set_prob(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins,
                              const TailQuery& query, const OrthantOptions& options) {
  const int d = sigma.dim();
  const auto& s_set = query.set;
  require(s_set.size() >= 2, ErrorCode::InvalidArgument, "tail set expansion needs |S| >= 2");
  s_set.check_within(d);
  require(margins.alpha > 0, ErrorCode::InvalidArgument, "alpha must be positive");
  require(!(law.gamma == 1.0 && !margins.ell.is_constant()), ErrorCode::GammaOneRequiresConstantEll,
          "gamma = 1 needs a constant slowly varying function");
  require(query.t > 1, ErrorCode::InvalidArgument, "scale t must exceed 1");

  const QPSolution qp = solve_qp_subset(sigma, s_set);
  const RadialLaw block_law = sub_vector_law(law, d, static_cast<int>(s_set.size()));
  const MarginalTail mt = marginal_tail(law, d);
  const double alpha = margins.alpha;
  const double g = law.gamma;
  const double L = law.L;
  const int ni = static_cast<int>(qp.active.size());
  const int ns = static_cast<int>(s_set.size());
  const double lambda = qp.lambda;
  const double lam_g = std::pow(lambda, g / 2.0);

  ExpansionFactors f;
  f.log_upsilon = log_upsilon(sigma, block_law, qp, options);
  f.lambda = lambda;
  f.beta_exp = beta_exponent(block_law.beta, g, ni, static_cast<int>(qp.inactive.size()));
  f.active = qp.active;
  f.h = qp.h;
  const double e1 = block_law.beta / g + 1.0 - ni / 2.0 - ns / 2.0;
  f.power_of_logt = e1 - mt.betap / g * lam_g;
  f.power_of_t = -alpha * lam_g;
  // log(C' alpha^{beta'/gamma} L^{-beta'/gamma})
  const double log_marginal_const = std::log(mt.Cp) + mt.betap / g * (std::log(alpha) - std::log(L));
  double log_x_term = 0;
  for (const auto& [j, h] : qp.h) {
    log_x_term += h * std::pow(lambda, g / 2.0 - 1.0) * (alpha * std::log(query.x.at(j)) - std::log(margins.c_of(j)));
  }
  f.log_constants = e1 * std::log(alpha / L) - lam_g * log_marginal_const - log_x_term;

  const double log_t = std::log(query.t);
  ExpansionResult out;
  out.factors = f;
  out.log_prob = f.log_upsilon + f.beta_exp * std::log(lambda) + f.log_constants +
                 f.power_of_logt * std::log(log_t) + f.power_of_t * log_t - lam_g * margins.ell.log_value(query.t);

  // Threshold shifts z_j and log L(t) of the transformed problem.
  auto weighted_shift = [&](double t) {
    const double lt = std::log(t);
    const double log_script_l = (margins.ell.log_value(t) + mt.betap / g * std::log(lt)) / (g * L);
    double acc = 0;
    for (const auto& [j, h] : qp.h) {
      const double z = (alpha * std::log(query.x.at(j)) - std::log(margins.c_of(j)) + log_marginal_const) / (g * L);
      acc += h * (z + log_script_l);
    }
    return acc;
  };
  const double u = std::pow(alpha * log_t / L, 1.0 / g);
  out.log_prob_unexpanded = log_joint(f.log_upsilon, f.beta_exp, lambda, ni, L, g, u,
                                      weighted_shift(query.t) / std::pow(u, g - 1.0));

  // Relative size of the first dropped term, 2 beta* (z + log L)^T Sigma^{-1} e* / (lambda u^gamma).
  out.validity_threshold = std::numeric_limits<double>::infinity();
  for (int step = 6000; step >= 10; --step) {
    const double t = std::pow(10.0, step * 0.05);
    const double rel = 2.0 * f.beta_exp * weighted_shift(t) / (lambda * alpha * std::log(t) / L);
    if (!(std::abs(rel) < 0.1)) break;
    out.validity_threshold = t;
  }
  return out;
}

}  // namespace elltail
