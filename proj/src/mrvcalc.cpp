#include "elltail/mrvcalc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>

#include "elltail/error.hpp"

namespace elltail {
namespace {

bool in_family(double lambda_s, double lambda_i) { return lambda_s <= lambda_i * (1.0 + kMrvLambdaTolerance); }

// log nu_i(A_{x_S}) on the nonzero branch, nullopt on the zero branch.
std::optional<double> log_nu(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins,
                             const MrvIndexReport& report, const TailQuery& query, const OrthantOptions& options) {
  const int d = sigma.dim();
  if (report.i == 1) {
    if (query.set.size() != 1) return std::nullopt;
    const int j = query.set[0];
    return std::log(margins.c_of(j)) - margins.alpha * std::log(query.x.at(j));
  }
  const QPSolution qp = solve_qp_subset(sigma, query.set);
  if (!in_family(qp.lambda, report.lambda_i) || qp.active.size() != report.active_set.size()) return std::nullopt;
  const RadialLaw block_law = sub_vector_law(law, d, static_cast<int>(query.set.size()));
  const double g = law.gamma;
  double out = log_upsilon(sigma, block_law, qp, options) +
               beta_exponent(block_law.beta, g, static_cast<int>(qp.active.size()),
                             static_cast<int>(qp.inactive.size())) *
                   std::log(qp.lambda);
  for (const auto& [j, h] : qp.h) {
    out -= h * std::pow(qp.lambda, g / 2.0 - 1.0) *
           (margins.alpha * std::log(query.x.at(j)) - std::log(margins.c_of(j)));
  }
  return out;
}

bool is_monotone(const std::vector<double>& ratio, bool zero_branch) {
  constexpr double kSlack = 1e-12;
  for (std::size_t k = 1; k < ratio.size(); ++k) {
    if (zero_branch) {
      if (ratio[k] > ratio[k - 1] * (1.0 + kSlack)) return false;
    } else if (std::abs(ratio[k] - 1.0) > std::abs(ratio[k - 1] - 1.0) + kSlack) {
      return false;
    }
  }
  return !zero_branch || ratio.back() < ratio.front();
}

void check_query(const CorrelationMatrix& sigma, int i, const TailQuery& query) {
  query.set.check_within(sigma.dim());
  require(static_cast<int>(query.set.size()) >= i, ErrorCode::InvalidArgument,
          "tail set " + query.set.to_string() + " smaller than i = " + std::to_string(i));
}

}  // namespace

double BInverseDescriptor::log_value(double t, double alpha, double L, const SlowlyVarying& ell) const {
  const double log_t = std::log(t);
  double out = log_const + b_inv_power * (alpha * log_t + ell.log_value(t));
  if (logt_power != 0) out += logt_power * std::log(alpha * log_t / L);
  return out;
}

MrvIndexReport mrv_index(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins, int i) {
  const int d = sigma.dim();
  require(i >= 1 && i <= d, ErrorCode::InvalidArgument, "i must lie in 1.." + std::to_string(d));
  require(d <= kQpMaxDim, ErrorCode::DimensionTooLarge, "subset enumeration limited to d <= 20");
  require(margins.alpha > 0, ErrorCode::InvalidArgument, "alpha must be positive");

  MrvIndexReport report;
  report.i = i;
  if (i == 1) {
    report.lambda_i = 1.0;
    report.alpha_i = margins.alpha;
    for (int j = 1; j <= d; ++j) report.family.push_back(IndexSet{j});
    report.argmin_set = IndexSet{1};
    report.active_set = IndexSet{1};
    return report;
  }

  struct Entry {
    IndexSet set;
    IndexSet active;
    double lambda;
  };
  std::vector<Entry> entries;
  const unsigned long limit = 1UL << d;
  for (unsigned long mask = 1; mask < limit; ++mask) {
    if (std::popcount(mask) < i) continue;
    std::vector<int> labels;
    for (int p = 0; p < d; ++p)
      if ((mask >> p) & 1UL) labels.push_back(p + 1);
    IndexSet s(std::move(labels));
    QPSolution qp = solve_qp_subset(sigma, s);
    entries.push_back({std::move(s), std::move(qp.active), qp.lambda});
  }
  double lambda_min = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) lambda_min = std::min(lambda_min, e.lambda);

  const Entry* best = nullptr;
  for (const auto& e : entries) {
    if (!in_family(e.lambda, lambda_min)) continue;
    report.family.push_back(e.set);
    if (best == nullptr || e.active.size() < best->active.size() ||
        (e.active.size() == best->active.size() && e.set < best->set)) {
      best = &e;
    }
  }
  std::sort(report.family.begin(), report.family.end());

  const double g = law.gamma;
  const double lam_g = std::pow(lambda_min, g / 2.0);
  const MarginalTail mt = marginal_tail(law, d);
  report.lambda_i = lambda_min;
  report.alpha_i = margins.alpha * lam_g;
  report.argmin_set = best->set;
  report.active_set = best->active;
  report.b_inv.log_const = lam_g * std::log(mt.Cp);
  report.b_inv.logt_power = (static_cast<double>(best->active.size()) - 1.0) / 2.0 - mt.betap / g * (1.0 - lam_g);
  report.b_inv.b_inv_power = lam_g;
  return report;
}

double nu_1(const Vector& x, double alpha) {
  require(x.size() > 0 && (x.array() > 0).all(), ErrorCode::InvalidArgument, "thresholds must be positive");
  return x.array().pow(-alpha).sum();
}

double nu_i(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins, int i,
            const TailQuery& query, const OrthantOptions& options) {
  check_query(sigma, i, query);
  const MrvIndexReport report = mrv_index(sigma, law, margins, i);
  const auto value = log_nu(sigma, law, margins, report, query, options);
  return value ? std::exp(*value) : 0.0;
}

ConsistencyReport consistency_check(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins,
                                    int i, const TailQuery& query, const OrthantOptions& options) {
  check_query(sigma, i, query);
  const MrvIndexReport report = mrv_index(sigma, law, margins, i);
  const auto lnu = log_nu(sigma, law, margins, report, query, options);

  ConsistencyReport out;
  out.zero_branch = !lnu.has_value();
  out.limit = lnu ? std::exp(*lnu) : 0.0;
  const double norm = lnu.value_or(0.0);
  for (int e = 6; e <= 12; ++e) {
    const double t = std::pow(10.0, e);
    const double log_b = report.b_inv.log_value(t, margins.alpha, law.L, margins.ell);
    double log_p = 0, log_p_unexpanded = 0;
    if (query.set.size() == 1) {
      // F-bar_j(t x) = c_j ((t x)^alpha l(t x))^{-1}
      const int j = query.set[0];
      const double tx = t * query.x.at(j);
      log_p = log_p_unexpanded = std::log(margins.c_of(j)) - margins.alpha * std::log(tx) - margins.ell.log_value(tx);
    } else {
      const ExpansionResult rt = tail_set_prob(sigma, law, margins, TailQuery{query.set, query.x, t}, options);
      log_p = rt.log_prob;
      log_p_unexpanded = rt.log_prob_unexpanded;
    }
    out.t.push_back(t);
    out.ratio.push_back(std::exp(log_b + log_p - norm));
    out.ratio_unexpanded.push_back(std::exp(log_b + log_p_unexpanded - norm));
  }

  out.monotone = is_monotone(out.ratio, out.zero_branch);
  out.monotone_unexpanded = is_monotone(out.ratio_unexpanded, out.zero_branch);
  return out;
}

}  // namespace elltail
