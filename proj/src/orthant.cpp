#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "elltail/asymptote.hpp"
#include "elltail/error.hpp"
#include "elltail/rng.hpp"

namespace elltail {
namespace {

double norm_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2); }

double norm_quantile(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

constexpr std::array<int, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                         41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

// Genz's separation of variables for P(Y < 0) = P(Y > 0), averaged over a
// randomly shifted Richtmyer lattice with the baker's transform.
double orthant_qmc(const Matrix& cov, const OrthantOptions& options) {
  const Matrix l = spd_factor(cov);
  const int k = static_cast<int>(cov.rows());
  require(k - 1 <= static_cast<int>(kPrimes.size()), ErrorCode::DimensionTooLarge,
          "orthant dimension too large for the lattice rule");
  const int dims = k - 1;
  std::vector<double> generator(static_cast<std::size_t>(dims));
  for (int j = 0; j < dims; ++j) {
    const double r = std::sqrt(static_cast<double>(kPrimes[static_cast<std::size_t>(j)]));
    generator[static_cast<std::size_t>(j)] = r - std::floor(r);
  }

  constexpr int kShifts = 16;
  CounterRng rng(options.seed, 0x0a7e);
  std::vector<std::vector<double>> shifts(kShifts, std::vector<double>(static_cast<std::size_t>(dims)));
  for (auto& s : shifts)
    for (auto& v : s) v = rng.uniform();

  std::vector<double> w(static_cast<std::size_t>(k));
  auto integrand = [&](const std::vector<double>& u) {
    double product = 0.5;
    w[0] = norm_quantile(std::clamp(u[0] * 0.5, 1e-300, 1.0));
    for (int i = 1; i < k; ++i) {
      double acc = 0;
      for (int j = 0; j < i; ++j) acc += l(i, j) * w[static_cast<std::size_t>(j)];
      const double e = norm_cdf(-acc / l(i, i));
      product *= e;
      if (i + 1 < k) {
        w[static_cast<std::size_t>(i)] =
            norm_quantile(std::clamp(u[static_cast<std::size_t>(i)] * e, 1e-300, 1.0 - 1e-16));
      }
    }
    return product;
  };

  std::vector<double> sums(kShifts, 0.0);
  std::vector<double> point(static_cast<std::size_t>(dims));
  long done = 0;
  for (long n = 1024;; n *= 2) {
    for (int s = 0; s < kShifts; ++s) {
      for (long i = done; i < n; ++i) {
        for (int j = 0; j < dims; ++j) {
          const auto jj = static_cast<std::size_t>(j);
          double x = static_cast<double>(i) * generator[jj] + shifts[static_cast<std::size_t>(s)][jj];
          x -= std::floor(x);
          point[jj] = std::abs(2.0 * x - 1.0);
        }
        sums[static_cast<std::size_t>(s)] += integrand(point);
      }
    }
    done = n;
    double mean = 0, sq = 0;
    for (double v : sums) mean += v / static_cast<double>(n);
    mean /= kShifts;
    for (double v : sums) sq += std::pow(v / static_cast<double>(n) - mean, 2);
    const double se = std::sqrt(sq / (kShifts - 1) / kShifts);
    if (3.0 * se <= options.abs_tolerance || n >= (1L << 20)) return mean;
  }
}

}  // namespace

double orthant_probability(const Matrix& cov, const OrthantOptions& options) {
  require(cov.rows() == cov.cols(), ErrorCode::NotSquare, "covariance must be square");
  const auto k = cov.rows();
  if (k == 0) return 1.0;
  spd_factor(cov);
  if (k == 1) return 0.5;
  if (options.force_qmc || k >= 4) return orthant_qmc(cov, options);
  auto corr = [&](Eigen::Index i, Eigen::Index j) { return cov(i, j) / std::sqrt(cov(i, i) * cov(j, j)); };
  if (k == 2) return 0.25 + std::asin(corr(0, 1)) / (2.0 * std::numbers::pi);
  return 0.125 + (std::asin(corr(0, 1)) + std::asin(corr(0, 2)) + std::asin(corr(1, 2))) / (4.0 * std::numbers::pi);
}

double orthant_factor(const CorrelationMatrix& sigma, const IndexSet& given, const IndexSet& target,
                      const std::map<int, LimitThreshold>& utilde, const OrthantOptions& options) {
  std::vector<int> kept;
  for (int j : target) {
    auto it = utilde.find(j);
    require(it != utilde.end(), ErrorCode::InvalidArgument, "missing limit threshold for " + std::to_string(j));
    if (it->second == LimitThreshold::zero) kept.push_back(j);
  }
  if (kept.empty()) return 1.0;
  const IndexSet k(kept);
  if (given.empty()) return orthant_probability(sub_block(sigma, k, k), options);
  return orthant_probability(conditional_cov(sigma, given, k), options);
}

}  // namespace elltail
