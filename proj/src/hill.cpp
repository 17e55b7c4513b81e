#include <algorithm>
#include <cmath>
#include <functional>

#include "elltail/error.hpp"
#include "elltail/simulate.hpp"

namespace elltail {

double hill(std::vector<double> data, int k) {
  require(k >= 1 && static_cast<std::size_t>(k) < data.size(), ErrorCode::InvalidArgument,
          "Hill estimator needs 1 <= k < n");
  std::nth_element(data.begin(), data.begin() + k, data.end(), std::greater<>());
  const double pivot = data[static_cast<std::size_t>(k)];
  require(pivot > 0, ErrorCode::InvalidArgument, "Hill estimator needs k + 1 positive values");
  double sum = 0;
  for (int i = 0; i < k; ++i) sum += std::log(data[static_cast<std::size_t>(i)] / pivot);
  require(sum > 0, ErrorCode::DegenerateTies, "top k + 1 order statistics are all equal");
  return k / sum;
}

std::vector<int> default_k_grid() {
  std::vector<int> out;
  for (int k = 50; k <= 2000; k += 50) out.push_back(k);
  return out;
}

HillCurve hill_curve(std::vector<double> data, const std::vector<int>& k_values) {
  require(!k_values.empty(), ErrorCode::InvalidArgument, "empty k grid");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    require(k_values[i] >= 1 && static_cast<std::size_t>(k_values[i]) < data.size(), ErrorCode::InvalidArgument,
            "k = " + std::to_string(k_values[i]) + " outside 1..n-1");
    require(i == 0 || k_values[i] > k_values[i - 1], ErrorCode::InvalidArgument, "k grid must be increasing");
  }
  const auto k_max = static_cast<std::size_t>(k_values.back());
  std::partial_sort(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(k_max + 1), data.end(),
                    std::greater<>());
  require(data[k_max] > 0, ErrorCode::InvalidArgument, "Hill estimator needs k + 1 positive values");

  HillCurve curve;
  double log_sum = 0;
  std::size_t used = 0;
  for (int k : k_values) {
    for (; used < static_cast<std::size_t>(k); ++used) log_sum += std::log(data[used]);
    const double denom = log_sum - k * std::log(data[static_cast<std::size_t>(k)]);
    require(denom > 0, ErrorCode::DegenerateTies, "top k + 1 order statistics are all equal");
    const double a = k / denom;
    curve.k_values.push_back(k);
    curve.estimates.push_back(a);
    curve.ci_half_widths.push_back(1.96 * a / std::sqrt(static_cast<double>(k)));
  }
  return curve;
}

double HillCurve::stable_mean(int k_lo, int k_hi) const {
  double sum = 0;
  int count = 0;
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (k_values[i] < k_lo || k_values[i] > k_hi) continue;
    sum += estimates[i];
    ++count;
  }
  require(count > 0, ErrorCode::InvalidArgument, "no k value inside the stable region");
  return sum / count;
}

}  // namespace elltail
