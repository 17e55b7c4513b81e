// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "elltail/asymptote.hpp"
#include "elltail/error.hpp"
#include "elltail/lossdata.hpp"
#include "elltail/mrvcalc.hpp"
#include "elltail/qpsolve.hpp"
#include "elltail/radial.hpp"
#include "elltail/simulate.hpp"
#include "oracles.hpp"

using namespace elltail;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1
Outcome qp_closed_forms() {
  Outcome o;
  double worst = 0;
  for (double rho : {-0.45, -0.2, 0.0, 0.3, 0.6, 0.8, 0.95}) {
    const auto sigma = CorrelationMatrix::equicorrelation(3, rho);
    const double l2 = solve_qp_subset(sigma, IndexSet{1, 2}).lambda;
    const double l3 = solve_qp(sigma).lambda;
    const auto law = power_exponential_radial(3, 1.0);
    const double m2 = mrv_index(sigma, law, MarginSpec{}, 2).lambda_i;
    worst = std::max({worst, std::abs(l2 - 2 / (1 + rho)), std::abs(m2 - 2 / (1 + rho)),
                      std::abs(l3 - 3 / (1 + 2 * rho))});
  }
  o.pass = worst <= 1e-12;
  o.detail = "max |error| " + fmt("%.2e", worst);
  return o;
}

// 2
Outcome qp_oracle() {
  Outcome o;
  double worst = 0;
  int mismatched = 0;
  for (int k = 0; k < 200; ++k) {
    const int d = 3 + k % 3;
    const Matrix raw = oracle::random_correlation(d, 1000 + static_cast<unsigned>(k));
    const auto sol = solve_qp(validate_correlation(raw));
    const auto ref = oracle::brute_force_qp(raw);
    worst = std::max(worst, std::abs(sol.lambda - ref.lambda));
    if (sol.active.labels() != ref.active) ++mismatched;
  }
  o.pass = worst <= 1e-6 && mismatched == 0;
  o.detail = "max |lambda error| " + fmt("%.2e", worst) + ", active-set mismatches " + std::to_string(mismatched);
  return o;
}

// 3
Outcome gaussian_reduction() {
  Outcome o;
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> ux(0.3, 4.0), ue(3.0, 20.0), ua(0.5, 5.0);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const int d = 2 + k % 4;
    const Matrix raw = oracle::random_correlation(d, 5000 + static_cast<unsigned>(k));
    std::vector<int> labels;
    while (labels.size() < 2) {
      labels.clear();
      for (int j = 1; j <= d; ++j)
        if (gen() & 1u) labels.push_back(j);
    }
    std::map<int, double> x;
    for (int j : labels) x[j] = ux(gen);
    const double t = std::pow(10.0, ue(gen));
    MarginSpec m;
    m.alpha = ua(gen);
    const auto r = tail_set_prob(validate_correlation(raw), power_exponential_radial(d, 1.0), m,
                                 make_tail_query(IndexSet(labels), x, t));
    const double ref = oracle::pair_copula_log_prob(raw, labels, x, t, m.alpha);
    worst = std::max(worst, std::abs(r.log_prob - ref) / std::abs(ref));
  }
  o.pass = worst <= 1e-12;
  o.detail = "max relative error in log space " + fmt("%.2e", worst);
  return o;
}

// 4
Outcome marginal_constants() {
  Outcome o;
  double worst = 0;
  for (int d = 2; d <= 8; ++d) {
    const auto mt = marginal_tail(power_exponential_radial(d, 1.0), d);
    worst = std::max({worst, std::abs(mt.Cp - 1 / std::sqrt(2 * M_PI)), std::abs(mt.betap + 1),
                      std::abs(mt.Lp - 0.5), std::abs(mt.gammap - 2)});
  }
  o.pass = worst <= 1e-12;
  o.detail = "d = 2..8, max |error| " + fmt("%.2e", worst);
  return o;
}

// 5
Outcome mills_bracket() {
  Outcome o;
  std::ostringstream detail;
  for (const PowerExponentialSpec s : {PowerExponentialSpec{2, 1.0}, PowerExponentialSpec{3, 1.0},
                                       PowerExponentialSpec{3, 0.5}, PowerExponentialSpec{3, 1.5}}) {
    // Right end where the survival is near 1e-250.
    const double r_max = std::pow(2 * 250 * std::log(10.0), 1 / (2 * s.kappa));
    const double r_min = 0.1;
    int lower_bad = 0, upper_bad = 0;
    double worst_upper = 1e300;
    double end_ratio = 0;
    for (int k = 0; k < 100; ++k) {
      const double r = r_min * std::pow(r_max / r_min, k / 99.0);
      const auto b = mills_bounds(s, r);
      const double exact = radial_survival_exact(s, r);
      if (b.lower > exact * (1 + 1e-12)) ++lower_bad;
      if (b.upper < exact * (1 - 1e-12)) {
        ++upper_bad;
        worst_upper = std::min(worst_upper, b.upper / exact);
      }
      if (k == 99) end_ratio = b.upper / exact;
    }
    const bool ok = lower_bad == 0 && upper_bad == 0 && end_ratio >= 0.99 && end_ratio <= 1.01;
    o.pass = o.pass && ok;
    detail << "(" << s.dim << "," << s.kappa << "): upper/exact at end " << fmt("%.4f", end_ratio);
    if (lower_bad) detail << ", lower above exact at " << lower_bad << " points";
    if (upper_bad) detail << ", upper below exact at " << upper_bad << " points (min ratio " << fmt("%.4f", worst_upper) << ")";
    detail << "; ";
  }
  o.detail = detail.str();
  return o;
}

// 6
Outcome threshold_convergence() {
  Outcome o;
  std::ostringstream detail;
  for (const PowerExponentialSpec s : {PowerExponentialSpec{3, 1.0}, PowerExponentialSpec{3, 1.5}}) {
    const auto mt = marginal_tail(power_exponential_radial(s.dim, s.kappa), s.dim);
    const RegularlyVaryingMargin margin{2.0, 1.0, SlowlyVarying::constant()};
    std::vector<double> scaled;
    for (double t : {1e6, 1e8, 1e10}) {
      const double target = -2.0 * std::log(t);
      const double exact = oracle::bisect_decreasing(
          [&](double z) { return std::log(marginal_survival_exact(s, z)); }, target, 0.0, 100.0);
      scaled.push_back(std::abs(threshold_z(mt, margin, 1.0, t) - exact) * std::pow(std::log(t), 1 - 1 / mt.gammap));
    }
    const bool ok = scaled[0] > scaled[1] && scaled[1] > scaled[2];
    o.pass = o.pass && ok;
    detail << "gamma " << mt.gammap << ": " << fmt("%.4g", scaled[0]) << " > " << fmt("%.4g", scaled[1]) << " > "
           << fmt("%.4g", scaled[2]) << "; ";
  }
  o.detail = detail.str();
  return o;
}

// 7
Outcome hill_replication() {
  Outcome o;
  std::ostringstream detail;
  const std::vector<std::string> series = {"X(1)", "X(2)", "X(3)"};
  for (const auto& fc : figure_grid()) {
    const auto sigma = CorrelationMatrix::equicorrelation(3, fc.rho);
    const auto spec = preset_spec(fc.copula, 3);
    const auto law = power_exponential_radial(3, spec.kappa);
    MarginSpec m;
    m.alpha = 2.0;
    std::vector<double> mean(3, 0.0);
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      const auto table = figure_experiment(sigma, spec, 2.0, 20000, 7000 + static_cast<std::uint64_t>(s), series);
      for (int i = 0; i < 3; ++i) mean[static_cast<std::size_t>(i)] += table.curves[static_cast<std::size_t>(i)].stable_mean() / seeds;
    }
    detail << fc.name << " (";
    for (int i = 0; i < 3; ++i) {
      const double theory = mrv_index(sigma, law, m, i + 1).alpha_i;
      const double got = mean[static_cast<std::size_t>(i)];
      if (std::abs(got - theory) > 0.3) o.pass = false;
      detail << (i ? ", " : "") << fmt("%.2f", got) << "/" << fmt("%.2f", theory);
    }
    detail << ") ";
  }
  o.detail = "estimate/theory " + detail.str();
  return o;
}

// 8
Outcome slope_property() {
  Outcome o;
  std::ostringstream detail;
  const auto sigma = CorrelationMatrix::equicorrelation(2, 0.6);
  for (const char* copula : {"gaussian", "laplace"}) {
    const auto spec = preset_spec(copula, 2);
    MarginSpec m;
    m.alpha = 2.0;
    std::vector<double> xs, ys;
    for (double t : {10.0, 20.0, 40.0, 80.0}) {
      const auto q = make_tail_query(IndexSet{1, 2}, {{1, 1.0}, {2, 1.0}}, t);
      const auto est = mc_tail_probability(sigma, spec, m, q, 10000000L, 424242);
      xs.push_back(std::log(t));
      ys.push_back(std::log(est.estimate));
    }
    const double xbar = (xs[0] + xs[1] + xs[2] + xs[3]) / 4, ybar = (ys[0] + ys[1] + ys[2] + ys[3]) / 4;
    double sxy = 0, sxx = 0;
    for (int k = 0; k < 4; ++k) {
      sxy += (xs[static_cast<std::size_t>(k)] - xbar) * (ys[static_cast<std::size_t>(k)] - ybar);
      sxx += (xs[static_cast<std::size_t>(k)] - xbar) * (xs[static_cast<std::size_t>(k)] - xbar);
    }
    const double slope = sxy / sxx;
    const double lambda = solve_qp(sigma).lambda;
    const double theory = -m.alpha * std::pow(lambda, spec.gamma() / 2);
    const double rel = std::abs(slope / theory - 1);
    if (!(rel <= 0.10)) o.pass = false;
    detail << copula << " slope " << fmt("%.3f", slope) << " vs " << fmt("%.3f", theory) << " (" << fmt("%.1f", 100 * rel)
           << "%); ";
  }
  o.detail = detail.str();
  return o;
}

// 9
Outcome sampler_correctness() {
  Outcome o;
  std::ostringstream detail;
  double min_radius = 1, min_pareto = 1;
  const std::vector<PowerExponentialSpec> specs = {{2, 1.0}, {2, 0.5}, {2, 1.5}, {3, 1.0}, {3, 0.5}, {3, 1.5}};
  for (const auto& s : specs) {
    const auto r = sample_radius(s, 100000, 99);
    const double p = ks_pvalue(ks_statistic(r, [&](double x) { return 1 - radial_survival_exact(s, x); }), 100000);
    min_radius = std::min(min_radius, p);
    const auto x = to_pareto_margins(sample_elliptical(CorrelationMatrix::equicorrelation(s.dim, 0.6), s, 20000, 99), 2.0);
    for (int j = 0; j < s.dim; ++j) {
      const double q = ks_pvalue(ks_statistic(x.column(j), [](double v) { return 1 - 1 / (v * v); }), 20000);
      min_pareto = std::min(min_pareto, q);
    }
  }
  o.pass = min_radius > 0.01 && min_pareto > 0.01;
  o.detail = "min radius p " + fmt("%.3f", min_radius) + ", min Pareto-margin p " + fmt("%.3f", min_pareto);
  return o;
}

// 10
Outcome rho_formulas() {
  Outcome o;
  const double g = estimate_rho(1.8, 2.2, 2).rho;
  const double l = estimate_rho(1.8, 2.2, 1).rho;
  double worst = 0;
  for (double gamma : {0.5, 1.0, 2.0, 3.0})
    for (double alpha : {0.5, 1.0, 2.0, 3.5})
      for (double rho = -0.95; rho < 0.96; rho += 0.05)
        worst = std::max(worst, std::abs(estimate_rho(alpha, alpha * std::pow(2 / (1 + rho), gamma / 2), gamma).rho - rho));
  o.pass = std::abs(g - 0.63636363636) < 1e-6 && std::abs(l - 0.33884297520) < 1e-6 && worst <= 1e-12 &&
           std::round(g * 100) == 64;
  o.detail = "gaussian " + fmt("%.4f", g) + ", laplace " + fmt("%.4f", l) + ", round-trip max error " + fmt("%.2e", worst);
  return o;
}

// 11
Outcome mrv_consistency() {
  Outcome o;
  std::ostringstream detail;
  Matrix un(3, 3);
  un << 1, .7, .5, .7, 1, .3, .5, .3, 1;
  const auto unequal = validate_correlation(un);
  Matrix face(3, 3);
  face << 1, .2, .7, .2, 1, .7, .7, .7, 1;
  struct Instance {
    std::string name;
    CorrelationMatrix sigma;
    double kappa;
    int i;
    TailQuery q;
    bool zero;
  };
  const std::vector<Instance> instances = {
      {"equicorrelated laplace i=2 S={1,3}", CorrelationMatrix::equicorrelation(3, 0.6), 0.5, 2,
       make_tail_query(IndexSet{1, 3}, {{1, 1.0}, {3, 2.0}}, 10.0), false},
      {"inactive coordinate gamma=3 i=3 S={1,2,3}", validate_correlation(face), 1.5, 3,
       make_tail_query(IndexSet{1, 2, 3}, {{1, 1.5}, {2, 1.0}, {3, 0.8}}, 10.0), false},
      {"weakest pair gaussian i=2 S={2,3}", unequal, 1.0, 2, make_tail_query(IndexSet{2, 3}, {{2, 1.0}, {3, 1.0}}, 10.0),
       true},
  };
  for (const auto& in : instances) {
    MarginSpec m;
    m.alpha = 2.0;
    const auto r = consistency_check(in.sigma, power_exponential_radial(3, in.kappa), m, in.i, in.q);
    const bool ok = r.monotone && r.monotone_unexpanded && r.zero_branch == in.zero;
    o.pass = o.pass && ok;
    detail << in.name << ": ratio " << fmt("%.3g", r.ratio.front()) << " -> " << fmt("%.3g", r.ratio.back())
           << ", un-expanded " << fmt("%.3g", r.ratio_unexpanded.front()) << " -> "
           << fmt("%.3g", r.ratio_unexpanded.back()) << (ok ? "" : " (not monotone)") << "; ";
  }
  o.detail = detail.str();
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "QP closed forms", 1, qp_closed_forms},
      {2, "QP oracle equivalence", 30, qp_oracle},
      {3, "Gaussian reduction", 5, gaussian_reduction},
      {4, "Marginal constants", 1, marginal_constants},
      {5, "Mills bracket", 5, mills_bracket},
      {6, "Threshold expansion convergence", 10, threshold_convergence},
      {7, "Hill replication", 300, hill_replication},
      {8, "Slope property", 180, slope_property},
      {9, "Sampler correctness", 60, sampler_correctness},
      {10, "Implied correlation formulas", 1, rho_formulas},
      {11, "MRV limit consistency", 10, mrv_consistency},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.time_limit) {
      out.pass = false;
      out.detail += " runtime over " + fmt("%.0f", c.time_limit) + " s";
    }
    failed += !out.pass;
    std::printf("%s %2d %s [%.2f s]: %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
