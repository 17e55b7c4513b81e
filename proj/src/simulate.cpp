#include "elltail/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cctype>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "elltail/error.hpp"
#include "elltail/rng.hpp"

namespace elltail {
namespace {

constexpr int kBlockRows = 4096;
constexpr long kMcBlockRows = 1L << 16;
// Stream offsets keep the radius-only and the full sampler independent under a shared seed.
constexpr std::uint64_t kRadiusStreams = 0;
constexpr std::uint64_t kEllipticalStreams = 1ULL << 40;
constexpr std::uint64_t kMcStreams = 2ULL << 40;

int worker_count(const ParallelOptions& parallel, long blocks) {
  long w = parallel.threads > 0 ? parallel.threads : static_cast<long>(std::thread::hardware_concurrency());
  return static_cast<int>(std::clamp(w, 1L, std::max(blocks, 1L)));
}

// Runs fn(block) for block in [0, blocks) on a worker pool.
void for_blocks(long blocks, const ParallelOptions& parallel, const std::function<void(long)>& fn) {
  const int workers = worker_count(parallel, blocks);
  if (workers == 1) {
    for (long b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (long b = next++; b < blocks; b = next++) fn(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void check_spec(const PowerExponentialSpec& spec) {
  require(spec.dim >= 2 && spec.kappa > 0, ErrorCode::InvalidArgument, "power-exponential spec needs d >= 2, kappa > 0");
}

// Draws one row Z = R A U into `out`.
struct RowSampler {
  const Matrix& a;
  double shape;
  double gamma;
  std::gamma_distribution<double> radius_g;
  std::normal_distribution<double> normal;
  Vector w;

  RowSampler(const Matrix& factor, const PowerExponentialSpec& spec)
      : a(factor), shape(spec.gamma_shape()), gamma(spec.gamma()), radius_g(shape, 1.0), w(factor.rows()) {}

  template <class Rng>
  void draw(Rng& rng, double* out) {
    const double r = std::pow(2.0 * radius_g(rng), 1.0 / gamma);
    double norm2 = 0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      w(j) = normal(rng);
      norm2 += w(j) * w(j);
    }
    const double scale = r / std::sqrt(norm2);
    const Eigen::Index d = w.size();
    for (Eigen::Index i = 0; i < d; ++i) {
      double acc = 0;
      for (Eigen::Index j = 0; j <= i; ++j) acc += a(i, j) * w(j);
      out[i] = scale * acc;
    }
  }
};

double log_survival_exact(const PowerExponentialSpec& spec, double z) {
  return std::log(marginal_survival_exact(spec, z));
}

}  // namespace

std::vector<double> SampleBatch::column(int col) const {
  require(col >= 0 && col < d, ErrorCode::IndexOutOfRange, "column out of range");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = at(i, col);
  return out;
}

std::vector<double> sample_radius(const PowerExponentialSpec& spec, int n, std::uint64_t seed,
                                  const ParallelOptions& parallel) {
  check_spec(spec);
  require(n >= 1, ErrorCode::InvalidArgument, "sample size must be positive");
  std::vector<double> out(static_cast<std::size_t>(n));
  const long blocks = (n + kBlockRows - 1) / kBlockRows;
  for_blocks(blocks, parallel, [&](long b) {
    CounterRng rng(seed, kRadiusStreams + static_cast<std::uint64_t>(b));
    std::gamma_distribution<double> g(spec.gamma_shape(), 1.0);
    const long end = std::min<long>(n, (b + 1) * kBlockRows);
    for (long i = b * kBlockRows; i < end; ++i) out[static_cast<std::size_t>(i)] = std::pow(2.0 * g(rng), 1.0 / spec.gamma());
  });
  return out;
}

SampleBatch sample_elliptical(const CorrelationMatrix& sigma, const PowerExponentialSpec& spec, int n,
                              std::uint64_t seed, const ParallelOptions& parallel) {
  check_spec(spec);
  require(spec.dim == sigma.dim(), ErrorCode::InvalidArgument, "radius dimension must match the matrix");
  require(n >= 1, ErrorCode::InvalidArgument, "sample size must be positive");
  SampleBatch batch;
  batch.n = n;
  batch.d = sigma.dim();
  batch.seed = seed;
  batch.provenance = {sigma.entries(), spec, std::nullopt};
  batch.rows.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(batch.d));
  const long blocks = (n + kBlockRows - 1) / kBlockRows;
  for_blocks(blocks, parallel, [&](long b) {
    CounterRng rng(seed, kEllipticalStreams + static_cast<std::uint64_t>(b));
    RowSampler sampler(sigma.factor(), spec);
    const long end = std::min<long>(n, (b + 1) * kBlockRows);
    for (long i = b * kBlockRows; i < end; ++i) sampler.draw(rng, &batch.rows[static_cast<std::size_t>(i * batch.d)]);
  });
  return batch;
}

MarginalCdfTable::MarginalCdfTable(const PowerExponentialSpec& spec)
    : tail_(marginal_tail(power_exponential_radial(spec.dim, spec.kappa), spec.dim)) {
  check_spec(spec);
  const double target = std::log(kTailMass);
  double lo = 1.0, hi = 2.0;
  while (tail_.log_survival_asymptotic(hi) > target) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail_.log_survival_asymptotic(mid) > target ? lo : hi) = mid;
  }
  z_max_ = hi;
  step_ = z_max_ / (kGridSize - 1);
  log_s_.resize(kGridSize);
  std::vector<std::thread> pool;
  const int workers = worker_count({}, kGridSize / 64);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int k = w; k < kGridSize; k += workers)
        log_s_[static_cast<std::size_t>(k)] = log_survival_exact(spec, k * step_);
    });
  }
  for (auto& t : pool) t.join();
  tail_scale_ = log_s_.back() - tail_.log_survival_asymptotic(z_max_);
}

std::shared_ptr<const MarginalCdfTable> MarginalCdfTable::get(const PowerExponentialSpec& spec) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::shared_ptr<const MarginalCdfTable>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{spec.dim, spec.kappa}];
  if (!slot) slot = std::make_shared<const MarginalCdfTable>(spec);
  return slot;
}

double MarginalCdfTable::log_survival_positive(double z) const {
  if (z >= z_max_) return tail_.log_survival_asymptotic(z) + tail_scale_;
  const double pos = z / step_;
  const auto k = std::min(static_cast<std::size_t>(pos), log_s_.size() - 2);
  const double frac = pos - static_cast<double>(k);
  return log_s_[k] + frac * (log_s_[k + 1] - log_s_[k]);
}

double MarginalCdfTable::log_survival(double z) const {
  require(!std::isnan(z), ErrorCode::GridRangeExceeded, "NaN outside the tabulated range");
  if (z >= 0) return log_survival_positive(z);
  return std::log1p(-std::exp(log_survival_positive(-z)));
}

double MarginalCdfTable::inverse_log_survival(double target) const {
  require(target < 0, ErrorCode::InvalidArgument, "log survival target must be negative");
  if (target > log_s_.front()) return -inverse_log_survival(std::log1p(-std::exp(target)));
  if (target <= log_s_.back()) {
    double lo = z_max_, hi = 2 * z_max_;
    while (log_survival_positive(hi) > target) hi *= 2;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (log_survival_positive(mid) > target ? lo : hi) = mid;
    }
    return hi;
  }
  // log_s_ is decreasing: find k with log_s_[k] >= target > log_s_[k+1].
  auto it = std::upper_bound(log_s_.begin(), log_s_.end(), target, std::greater<>());
  const auto k = static_cast<std::size_t>(std::distance(log_s_.begin(), it)) - 1;
  const double frac = (log_s_[k] - target) / (log_s_[k] - log_s_[k + 1]);
  return (static_cast<double>(k) + frac) * step_;
}

SampleBatch to_pareto_margins(const SampleBatch& batch, double alpha) {
  require(alpha > 0, ErrorCode::InvalidArgument, "alpha must be positive");
  require(!batch.provenance.pareto_alpha, ErrorCode::InvalidArgument, "batch already has Pareto margins");
  const auto table = MarginalCdfTable::get(batch.provenance.spec);
  SampleBatch out = batch;
  out.provenance.pareto_alpha = alpha;
  for (double& v : out.rows) {
    const double ls = table->log_survival(v);
    require(std::isfinite(ls) && ls <= 0, ErrorCode::GridRangeExceeded, "marginal table produced an invalid value");
    v = std::exp(-ls / alpha);
  }
  return out;
}

std::vector<std::string> default_series(int d) {
  std::vector<std::string> out;
  for (int j = 1; j <= d; ++j) out.push_back("X" + std::to_string(j));
  for (int j = 1; j <= d; ++j)
    for (int k = j + 1; k <= d; ++k) out.push_back("min" + std::to_string(j) + "_" + std::to_string(k));
  for (int i = 1; i <= d; ++i) out.push_back("X(" + std::to_string(i) + ")");
  return out;
}

SeriesSpec SeriesSpec::parse(const std::string& name) {
  auto number = [&](const std::string& s) {
    require(!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }),
            ErrorCode::UsageError, "bad series name '" + name + "'");
    const int v = std::stoi(s);
    require(v >= 1, ErrorCode::UsageError, "series indices are 1-based: '" + name + "'");
    return v;
  };
  if (name.rfind("X(", 0) == 0 && name.size() > 3 && name.back() == ')') {
    return {Kind::order_stat, number(name.substr(2, name.size() - 3)), 0};
  }
  if (name.rfind("min", 0) == 0) {
    const std::string rest = name.substr(3);
    const auto sep = rest.find('_');
    if (sep != std::string::npos) return {Kind::pair_min, number(rest.substr(0, sep)), number(rest.substr(sep + 1))};
    require(rest.size() == 2, ErrorCode::UsageError, "pair minimum needs two indices: '" + name + "'");
    return {Kind::pair_min, number(rest.substr(0, 1)), number(rest.substr(1))};
  }
  require(name.size() > 1 && name[0] == 'X', ErrorCode::UsageError, "bad series name '" + name + "'");
  return {Kind::margin, number(name.substr(1)), 0};
}

std::string SeriesSpec::name() const {
  switch (kind) {
    case Kind::margin: return "X" + std::to_string(a);
    case Kind::pair_min: return "min" + std::to_string(a) + "_" + std::to_string(b);
    case Kind::order_stat: return "X(" + std::to_string(a) + ")";
  }
  return {};
}

std::vector<double> SeriesSpec::extract(const SampleBatch& batch) const {
  require(a <= batch.d && b <= batch.d, ErrorCode::IndexOutOfRange, "series " + name() + " exceeds the dimension");
  require(kind != Kind::pair_min || a != b, ErrorCode::UsageError, "pair minimum needs two distinct indices");
  std::vector<double> out(static_cast<std::size_t>(batch.n));
  std::vector<double> row(static_cast<std::size_t>(batch.d));
  for (int i = 0; i < batch.n; ++i) {
    auto& v = out[static_cast<std::size_t>(i)];
    switch (kind) {
      case Kind::margin: v = batch.at(i, a - 1); break;
      case Kind::pair_min: v = std::min(batch.at(i, a - 1), batch.at(i, b - 1)); break;
      case Kind::order_stat:
        for (int j = 0; j < batch.d; ++j) row[static_cast<std::size_t>(j)] = batch.at(i, j);
        std::nth_element(row.begin(), row.begin() + (a - 1), row.end(), std::greater<>());
        v = row[static_cast<std::size_t>(a - 1)];
        break;
    }
  }
  return out;
}

FigureTable figure_experiment(const CorrelationMatrix& sigma, const PowerExponentialSpec& spec, double alpha, int n,
                              std::uint64_t seed, const std::vector<std::string>& series,
                              const std::vector<int>& k_values, const ParallelOptions& parallel) {
  std::vector<SeriesSpec> specs;
  for (const auto& s : series) specs.push_back(SeriesSpec::parse(s));
  std::vector<int> ks;
  std::copy_if(k_values.begin(), k_values.end(), std::back_inserter(ks), [&](int k) { return k < n; });
  require(!ks.empty(), ErrorCode::InvalidArgument, "no k value below the sample size");

  const SampleBatch x = to_pareto_margins(sample_elliptical(sigma, spec, n, seed, parallel), alpha);
  FigureTable table;
  for (const auto& s : specs) {
    table.series.push_back(s.name());
    table.curves.push_back(hill_curve(s.extract(x), ks));
  }
  return table;
}

std::string figure_csv(const FigureTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "series,k,alpha_hat,ci_half_width\n";
  for (std::size_t s = 0; s < table.series.size(); ++s) {
    const auto& c = table.curves[s];
    for (std::size_t i = 0; i < c.k_values.size(); ++i) {
      out << table.series[s] << ',' << c.k_values[i] << ',' << c.estimates[i] << ',' << c.ci_half_widths[i] << '\n';
    }
  }
  return out.str();
}

std::vector<FigureConfig> figure_grid() {
  std::vector<FigureConfig> out;
  for (const auto& [name, copula] : {std::pair{"laplace", "laplace"}, std::pair{"gaussian", "gaussian"},
                                     std::pair{"pe3", "pe:3"}}) {
    for (const auto& [tag, rho] : {std::pair{"06", 0.6}, std::pair{"08", 0.8}}) {
      out.push_back({std::string(name) + "_rho" + tag, copula, rho});
    }
  }
  return out;
}

McEstimate mc_tail_probability(const CorrelationMatrix& sigma, const PowerExponentialSpec& spec,
                               const MarginSpec& margins, const TailQuery& query, long n, std::uint64_t seed,
                               const ParallelOptions& parallel) {
  check_spec(spec);
  require(spec.dim == sigma.dim(), ErrorCode::InvalidArgument, "radius dimension must match the matrix");
  require(n >= 1, ErrorCode::InvalidArgument, "sample size must be positive");
  require(margins.alpha > 0, ErrorCode::InvalidArgument, "alpha must be positive");
  require(margins.ell.is_constant(), ErrorCode::InvalidArgument, "simulated margins need a constant l");
  query.set.check_within(sigma.dim());

  // X_j > t x_j  <=>  log P(Z_j > z) < log c_j - log l - alpha log(t x_j)  <=>  Z_j > z_j.
  const auto table = MarginalCdfTable::get(spec);
  std::vector<int> cols;
  std::vector<double> z_thr;
  for (int j : query.set) {
    const double target = std::log(margins.c_of(j)) - margins.ell.log_value(query.t) -
                          margins.alpha * std::log(query.t * query.x.at(j));
    cols.push_back(j - 1);
    z_thr.push_back(target >= 0 ? -std::numeric_limits<double>::infinity() : table->inverse_log_survival(target));
  }

  const long blocks = (n + kMcBlockRows - 1) / kMcBlockRows;
  std::vector<long> hits(static_cast<std::size_t>(blocks), 0);
  for_blocks(blocks, parallel, [&](long b) {
    CounterRng rng(seed, kMcStreams + static_cast<std::uint64_t>(b));
    RowSampler sampler(sigma.factor(), spec);
    std::vector<double> row(static_cast<std::size_t>(sigma.dim()));
    long count = 0;
    const long end = std::min(n, (b + 1) * kMcBlockRows);
    for (long i = b * kMcBlockRows; i < end; ++i) {
      sampler.draw(rng, row.data());
      bool inside = true;
      for (std::size_t k = 0; k < cols.size() && inside; ++k) inside = row[static_cast<std::size_t>(cols[k])] > z_thr[k];
      count += inside;
    }
    hits[static_cast<std::size_t>(b)] = count;
  });

  McEstimate out;
  out.n = n;
  out.hits = std::accumulate(hits.begin(), hits.end(), 0L);
  out.estimate = static_cast<double>(out.hits) / static_cast<double>(n);
  out.standard_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(n));
  return out;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  require(!sample.empty(), ErrorCode::InvalidArgument, "KS statistic needs a non-empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double statistic, long n) {
  require(n >= 1 && statistic >= 0, ErrorCode::InvalidArgument, "KS p-value needs n >= 1, D >= 0");
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
  if (lambda < 0.2) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace elltail
