#pragma once

// Exact sampling of power-exponential elliptical vectors, the copula transform
// to Pareto margins, Hill estimation and the simulation experiments built on them.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elltail/asymptote.hpp"
#include "elltail/corelin.hpp"
#include "elltail/radial.hpp"

namespace elltail {

struct SampleProvenance {
  Matrix sigma;
  PowerExponentialSpec spec;
  std::optional<double> pareto_alpha;  // set once margins are Pareto
};

struct SampleBatch {
  int n = 0;
  int d = 0;
  std::vector<double> rows;  // row-major n x d
  std::uint64_t seed = 0;
  SampleProvenance provenance;

  double at(int row, int col) const { return rows[static_cast<std::size_t>(row) * d + col]; }
  std::vector<double> column(int col) const;
};

// 0 picks std::thread::hardware_concurrency(). Output never depends on it.
struct ParallelOptions {
  int threads = 0;
};

std::vector<double> sample_radius(const PowerExponentialSpec& spec, int n, std::uint64_t seed,
                                  const ParallelOptions& parallel = {});

SampleBatch sample_elliptical(const CorrelationMatrix& sigma, const PowerExponentialSpec& spec, int n,
                              std::uint64_t seed, const ParallelOptions& parallel = {});

// Tabulated log P(Z_1 > z) on [0, z_max] with the asymptotic tail beyond.
class MarginalCdfTable {
 public:
  static constexpr int kGridSize = 2048;
  static constexpr double kTailMass = 1e-12;

  explicit MarginalCdfTable(const PowerExponentialSpec& spec);
  // Shared instance per (dim, kappa).
  static std::shared_ptr<const MarginalCdfTable> get(const PowerExponentialSpec& spec);

  double log_survival(double z) const;
  // Smallest z with log_survival(z) <= target; target < log(1/2) is required.
  double inverse_log_survival(double target) const;
  double z_max() const { return z_max_; }

 private:
  double log_survival_positive(double z) const;
  MarginalTail tail_;
  double z_max_;
  double step_;
  double tail_scale_;  // log of exact / asymptotic at z_max
  std::vector<double> log_s_;
};

// X = (1 - G_1(Z))^{-1/alpha} componentwise.
SampleBatch to_pareto_margins(const SampleBatch& batch, double alpha);

// Hill estimate from the top k order statistics.
double hill(std::vector<double> data, int k);

struct HillCurve {
  std::vector<int> k_values;
  std::vector<double> estimates;
  std::vector<double> ci_half_widths;

  // Mean estimate over k in [k_lo, k_hi].
  double stable_mean(int k_lo = 200, int k_hi = 800) const;
};

std::vector<int> default_k_grid();
HillCurve hill_curve(std::vector<double> data, const std::vector<int>& k_values);

// Derived series of a batch: "X<j>" margin, "min<j><k>" pairwise minimum,
// "X(<i>)" i-th largest coordinate per row.
struct SeriesSpec {
  enum class Kind { margin, pair_min, order_stat };
  Kind kind;
  int a;
  int b;

  static SeriesSpec parse(const std::string& name);
  std::string name() const;
  std::vector<double> extract(const SampleBatch& batch) const;
};

std::vector<std::string> default_series(int d);

struct FigureTable {
  std::vector<std::string> series;
  std::vector<HillCurve> curves;  // aligned with series
};

FigureTable figure_experiment(const CorrelationMatrix& sigma, const PowerExponentialSpec& spec, double alpha, int n,
                              std::uint64_t seed, const std::vector<std::string>& series,
                              const std::vector<int>& k_values = default_k_grid(),
                              const ParallelOptions& parallel = {});

std::string figure_csv(const FigureTable& table);

// One panel of the simulation study.
struct FigureConfig {
  std::string name;
  std::string copula;
  double rho;
};

std::vector<FigureConfig> figure_grid();

struct McEstimate {
  double estimate = 0;
  double standard_error = 0;
  long hits = 0;
  long n = 0;
};

// Frequency of {X in t A_{x_S}} for Pareto-type margins F-bar_j(x) = c_j x^{-alpha} / l.
McEstimate mc_tail_probability(const CorrelationMatrix& sigma, const PowerExponentialSpec& spec,
                               const MarginSpec& margins, const TailQuery& query, long n, std::uint64_t seed,
                               const ParallelOptions& parallel = {});

// sup_x |F_n(x) - F(x)| for a sample and a continuous distribution function.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
// Asymptotic Kolmogorov p-value with the finite-n correction of Stephens.
double ks_pvalue(double statistic, long n);

}  // namespace elltail
