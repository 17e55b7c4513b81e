#include "elltail/lossdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "elltail/error.hpp"

namespace elltail {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool is_missing(std::string_view field) { return field.empty() || field == "NA" || field == "NaN" || field == "nan"; }

std::vector<int> default_hill_grid(std::size_t n) {
  std::vector<int> ks;
  for (int k = 10; static_cast<std::size_t>(k) < n && k <= 2000; k += 10) ks.push_back(k);
  return ks;
}

}  // namespace

const std::vector<double>& LossTable::column(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  require(it != names.end(), ErrorCode::InvalidArgument, "no column named '" + std::string(name) + "'");
  return columns[static_cast<std::size_t>(it - names.begin())];
}

LossTable parse_losses(std::string_view text, const std::vector<std::string>& columns) {
  std::vector<std::string_view> lines;
  std::vector<int> line_numbers;
  {
    int number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto pos = text.find('\n', start);
      const auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
      ++number;
      if (!trim(line).empty() && trim(line).front() != '#') {
        lines.push_back(line);
        line_numbers.push_back(number);
      }
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  }
  require(!lines.empty(), ErrorCode::ParseError, "missing header row");
  const auto header = split(lines.front());

  std::vector<std::size_t> picked;
  LossTable table;
  if (columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) picked.push_back(c);
  } else {
    for (const auto& name : columns) {
      auto it = std::find(header.begin(), header.end(), name);
      require(it != header.end(), ErrorCode::ParseError, "header has no column '" + name + "'");
      picked.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  for (auto c : picked) table.names.emplace_back(header[c]);
  table.columns.resize(picked.size());

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r]);
    const std::string where = "line " + std::to_string(line_numbers[r]);
    require(fields.size() == header.size(), ErrorCode::ParseError,
            where + ": expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    bool flag = false;
    for (std::size_t k = 0; k < picked.size(); ++k) {
      const auto field = fields[picked[k]];
      double value = std::numeric_limits<double>::quiet_NaN();
      if (!is_missing(field)) {
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        require(ec == std::errc() && end == field.data() + field.size() && std::isfinite(value), ErrorCode::ParseError,
                where + ": '" + std::string(field) + "' is not a number");
        require(value >= 0, ErrorCode::ParseError, where + ": negative loss " + std::string(field));
      }
      flag = flag || !(value > 0);
      table.columns[k].push_back(value);
    }
    table.flagged.push_back(flag);
  }
  for (std::size_t k = 0; k < picked.size(); ++k) {
    const auto& col = table.columns[k];
    require(std::any_of(col.begin(), col.end(), [](double v) { return !std::isnan(v); }), ErrorCode::EmptyColumn,
            "column '" + table.names[k] + "' has no values");
  }
  return table;
}

LossTable load_losses(const std::filesystem::path& path, const std::vector<std::string>& columns) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_losses(buffer.str(), columns);
}

RhoEstimate estimate_rho(double alpha_hat, double alpha2_hat, double gamma) {
  require(alpha_hat > 0 && gamma > 0, ErrorCode::InvalidArgument, "alpha_hat and gamma must be positive");
  require(alpha2_hat >= alpha_hat * (1.0 - 1e-12), ErrorCode::InvalidIndices,
          "joint index below the marginal index implies rho > 1");
  RhoEstimate out;
  out.rho = 2.0 * std::pow(alpha_hat / alpha2_hat, 2.0 / gamma) - 1.0;
  out.out_of_range = !(out.rho > -1.0 && out.rho < 1.0);
  return out;
}

PositiveSeries positive_series(const LossTable& table, std::string_view col) {
  PositiveSeries out;
  for (double v : table.column(col)) {
    if (v > 0) out.values.push_back(v);
    else ++out.excluded;
  }
  out.empty = out.values.empty();
  return out;
}

PositiveSeries pairwise_min_series(const LossTable& table, std::string_view col_a, std::string_view col_b) {
  const auto& a = table.column(col_a);
  const auto& b = table.column(col_b);
  PositiveSeries out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0 && b[i] > 0) out.values.push_back(std::min(a[i], b[i]));
    else ++out.excluded;
  }
  out.empty = out.values.empty();
  return out;
}

SampleBatch comparison_simulation(double alpha_hat, double rho_hat, double gamma, int n, std::uint64_t seed) {
  require(gamma > 0, ErrorCode::InvalidArgument, "gamma must be positive");
  const auto sigma = CorrelationMatrix::equicorrelation(2, rho_hat);
  return to_pareto_margins(sample_elliptical(sigma, PowerExponentialSpec{2, gamma / 2.0}, n, seed), alpha_hat);
}

LossAnalysis analyze_losses(const LossTable& table, const std::string& col_a, const std::string& col_b,
                            const LossAnalysisOptions& options) {
  LossAnalysis out;
  out.col_a = col_a;
  out.col_b = col_b;
  out.n = table.rows();
  const auto a = positive_series(table, col_a);
  const auto b = positive_series(table, col_b);
  const auto m = pairwise_min_series(table, col_a, col_b);
  require(!a.empty && !b.empty, ErrorCode::EmptyColumn, "a selected column has no positive losses");
  require(!m.empty, ErrorCode::EmptyColumn, "the pairwise minimum has no positive values");
  out.excluded_a = a.excluded;
  out.excluded_b = b.excluded;
  out.excluded_min = m.excluded;

  const std::size_t n_min = std::min({a.values.size(), b.values.size(), m.values.size()});
  auto ks = default_hill_grid(n_min);
  require(!ks.empty(), ErrorCode::InvalidArgument, "too few positive losses for a Hill curve");
  out.curve_a = hill_curve(a.values, ks);
  out.curve_b = hill_curve(b.values, ks);
  out.curve_min = hill_curve(m.values, ks);
  auto pick = [&](const PositiveSeries& s, const HillCurve& c) {
    return options.k ? hill(s.values, *options.k) : c.stable_mean(options.k_lo, options.k_hi);
  };
  out.alpha_a = pick(a, out.curve_a);
  out.alpha_b = pick(b, out.curve_b);
  out.alpha_hat = options.alpha_hat.value_or(0.5 * (out.alpha_a + out.alpha_b));
  out.alpha2_hat = options.alpha2_hat.value_or(pick(m, out.curve_min));
  try {
    out.rho_gaussian = estimate_rho(out.alpha_hat, out.alpha2_hat, 2.0);
    out.rho_laplace = estimate_rho(out.alpha_hat, out.alpha2_hat, 1.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidIndices) throw;
  }
  return out;
}

}  // namespace elltail
