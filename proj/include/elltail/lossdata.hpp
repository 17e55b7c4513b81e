#pragma once

// Multivariate loss data: ingestion, marginal and joint Hill indices, and the
// correlation implied by an elliptical copula with a given gamma.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elltail/simulate.hpp"

namespace elltail {

struct LossTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // NaN marks a missing value
  std::vector<bool> flagged;                 // row has a missing or zero entry

  std::size_t rows() const { return flagged.size(); }
  const std::vector<double>& column(std::string_view name) const;
};

// Header row required. `columns` selects by name; empty keeps every column.
LossTable parse_losses(std::string_view text, const std::vector<std::string>& columns = {});
LossTable load_losses(const std::filesystem::path& path, const std::vector<std::string>& columns = {});

struct RhoEstimate {
  double rho = 0;
  bool out_of_range = false;  // rho outside (-1, 1)
};

// 2 (alpha / alpha2)^{2/gamma} - 1
RhoEstimate estimate_rho(double alpha_hat, double alpha2_hat, double gamma);

struct PositiveSeries {
  std::vector<double> values;
  std::size_t excluded = 0;  // zero or missing entries
  bool empty = false;
};

PositiveSeries positive_series(const LossTable& table, std::string_view col);
PositiveSeries pairwise_min_series(const LossTable& table, std::string_view col_a, std::string_view col_b);

// d = 2 equicorrelation sample with Pareto(alpha_hat) margins and power-exponential gamma.
SampleBatch comparison_simulation(double alpha_hat, double rho_hat, double gamma, int n, std::uint64_t seed);

struct LossAnalysisOptions {
  std::optional<int> k;  // single k; otherwise the mean over [k_lo, k_hi]
  int k_lo = 100;
  int k_hi = 400;
  std::optional<double> alpha_hat;   // overrides the marginal estimate
  std::optional<double> alpha2_hat;  // overrides the joint estimate
};

struct LossAnalysis {
  std::string col_a, col_b;
  std::size_t n = 0;
  double alpha_a = 0, alpha_b = 0;
  double alpha_hat = 0;  // mean of the two marginal indices unless overridden
  double alpha2_hat = 0;
  std::optional<RhoEstimate> rho_gaussian;
  std::optional<RhoEstimate> rho_laplace;
  std::size_t excluded_a = 0, excluded_b = 0, excluded_min = 0;
  HillCurve curve_a, curve_b, curve_min;
};

LossAnalysis analyze_losses(const LossTable& table, const std::string& col_a, const std::string& col_b,
                            const LossAnalysisOptions& options = {});

}  // namespace elltail
