#pragma once

// Joint-tail expansions for elliptical vectors with Weibullian radius and for
// heavy-tailed vectors sharing their copula. All probabilities are returned on
// the log scale; they underflow long before the expansions become accurate.

#include <cstdint>
#include <map>

#include "elltail/corelin.hpp"
#include "elltail/qpsolve.hpp"
#include "elltail/radial.hpp"

namespace elltail {

struct OrthantOptions {
  std::uint64_t seed = 0x6f7274686e74ULL;
  double abs_tolerance = 1e-4;
  // Use the lattice rule even where a closed form exists.
  bool force_qmc = false;
};

// P(Y > 0) for a centered Gaussian vector with covariance `cov`; 1 for an empty matrix.
double orthant_probability(const Matrix& cov, const OrthantOptions& options = {});

enum class LimitThreshold { zero, neg_infinity };

// P(Y_J > u~_J | Y_I = 0_I) with Y ~ N(0, sigma); components at -infinity drop out.
double orthant_factor(const CorrelationMatrix& sigma, const IndexSet& given, const IndexSet& target,
                      const std::map<int, LimitThreshold>& utilde, const OrthantOptions& options = {});

// (beta + |I| + gamma (1 + |J|/2 - d)) / 2 with d = |I| + |J|.
double beta_exponent(double beta, double gamma, int size_i, int size_j);

// u~_J classification from the minimizer: zero where e*_j sits on 1.
std::map<int, LimitThreshold> limit_thresholds(const QPSolution& qp);

// log Upsilon for the block qp.block of sigma; `block_law` is the radial law of
// that |block|-dimensional sub-vector.
double log_upsilon(const CorrelationMatrix& sigma, const RadialLaw& block_law, const QPSolution& qp,
                   const OrthantOptions& options = {});
double upsilon(const CorrelationMatrix& sigma, const RadialLaw& block_law, const QPSolution& qp,
               const OrthantOptions& options = {});

// log P(Z > u 1 + x_shift) for the elliptical vector with radius `law` and
// dispersion sigma, evaluated with the un-expanded exponent base.
double joint_elliptical_tail(const CorrelationMatrix& sigma, const RadialLaw& law, double u,
                             const Vector& x_shift, const OrthantOptions& options = {});

struct MarginSpec {
  double alpha = 2.0;
  // Tail-equivalence constants c_j by label; an empty map means c_j = 1 throughout.
  std::map<int, double> c;
  SlowlyVarying ell = SlowlyVarying::constant();

  double c_of(int label) const;
};

struct TailQuery {
  IndexSet set;
  std::map<int, double> x;  // thresholds by label, all > 0
  double t = 0.0;
};

TailQuery make_tail_query(IndexSet set, std::map<int, double> x, double t);

struct ExpansionFactors {
  double log_upsilon = 0;
  double lambda = 0;
  double beta_exp = 0;       // beta_{gamma, I_S, J_S}
  double power_of_logt = 0;  // exponent of log t
  double power_of_t = 0;     // -alpha lambda^{gamma/2}
  double log_constants = 0;  // (alpha/L), C', x and c contributions
  IndexSet active;
  std::map<int, double> h;
};

struct ExpansionResult {
  double log_prob = 0;
  // Same quantity with the exponent base (lambda u^2 + 2 u x^T Sigma^{-1} e*) kept un-expanded.
  double log_prob_unexpanded = 0;
  ExpansionFactors factors;
  // Smallest t (on a log10 grid) from which the dropped first-order correction stays below 0.1.
  double validity_threshold = 0;
};

ExpansionResult tail_set_prob(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins,
                              const TailQuery& query, const OrthantOptions& options = {});

}  // namespace elltail
