#include "elltail/cli.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elltail/asymptote.hpp"
#include "elltail/error.hpp"
#include "elltail/lossdata.hpp"
#include "elltail/mrvcalc.hpp"
#include "elltail/qpsolve.hpp"
#include "elltail/simulate.hpp"

namespace elltail::cli {
namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240601;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  require(!out.empty(), ErrorCode::UsageError, "empty list");
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && used > 0, ErrorCode::UsageError, "'" + s + "' is not a number");
  return v;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(to_double(s));
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) {
    const double v = to_double(s);
    require(v == static_cast<int>(v), ErrorCode::UsageError, "'" + s + "' is not an integer");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

json to_json(const IndexSet& s) { return s.labels(); }

json to_json(const std::map<int, double>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[std::to_string(k)] = v;
  return out;
}

json to_json(const QPSolution& qp) {
  return {{"S", to_json(qp.block)},     {"I", to_json(qp.active)}, {"J", to_json(qp.inactive)},
          {"e_star", qp.e_star},        {"lambda", qp.lambda},     {"h", to_json(qp.h)},
          {"ambiguous", qp.ambiguous}};
}

struct MatrixSource {
  std::string path;
  std::optional<double> rho;
  int dim = 3;

  void add_to(CLI::App* app) {
    app->add_option("--matrix", path, "Correlation matrix (.json or CSV)")->check(CLI::ExistingFile);
    app->add_option("--rho", rho, "Equicorrelation instead of --matrix")->check(CLI::Range(-1.0, 1.0));
    app->add_option("--dim", dim, "Dimension for --rho")->check(CLI::Range(2, kQpMaxDim));
  }

  CorrelationMatrix load() const {
    require(path.empty() != !rho.has_value(), ErrorCode::UsageError, "give exactly one of --matrix or --rho");
    if (rho) return CorrelationMatrix::equicorrelation(dim, *rho);
    return validate_correlation(load_matrix(path));
  }

  json config() const {
    if (rho) return {{"rho", *rho}, {"dim", dim}};
    return {{"matrix", path}};
  }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool verbose = false;
  std::optional<std::uint64_t> seed_flag;
  std::string output = "-";

  std::uint64_t seed() const {
    if (seed_flag) return *seed_flag;
    if (const char* env = std::getenv("ELLTAIL_SEED"); env != nullptr && *env != '\0') {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::strlen(env)) return v;
      } catch (const std::exception&) {
      }
      throw Error(ErrorCode::UsageError, std::string("ELLTAIL_SEED is not an unsigned integer: ") + env);
    }
    return kDefaultSeed;
  }

  void emit(const std::string& path, const std::string& content) const {
    if (path == "-") {
      out << content;
      return;
    }
    std::ofstream file(path, std::ios::binary);
    require(static_cast<bool>(file), ErrorCode::UsageError, "cannot write " + path);
    file << content;
  }

  void emit_json(const json& j) const { emit(output, j.dump(2) + "\n"); }
};

std::string csv_config_line(const json& config) { return "# config " + config.dump() + "\n"; }

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

MarginSpec make_margins(double alpha, const std::string& c_list, int d, std::optional<double> ell_power,
                        double ell_const) {
  MarginSpec m;
  m.alpha = alpha;
  if (!c_list.empty()) {
    const auto c = parse_doubles(c_list);
    require(static_cast<int>(c.size()) == d, ErrorCode::UsageError, "--c needs one constant per coordinate");
    for (int j = 0; j < d; ++j) {
      require(c[static_cast<std::size_t>(j)] > 0, ErrorCode::UsageError, "--c entries must be positive");
      m.c[j + 1] = c[static_cast<std::size_t>(j)];
    }
  }
  require(ell_const > 0, ErrorCode::UsageError, "--ell-const must be positive");
  m.ell = ell_power ? SlowlyVarying::log_power(*ell_power, ell_const) : SlowlyVarying::constant(ell_const);
  return m;
}

TailQuery make_query(const std::string& set_list, const std::string& x_list, double t) {
  const auto labels = parse_ints(set_list);
  const auto xs = parse_doubles(x_list);
  require(labels.size() == xs.size(), ErrorCode::UsageError, "--set and --x must have equal length");
  std::map<int, double> x;
  for (std::size_t k = 0; k < labels.size(); ++k) x[labels[k]] = xs[k];
  return make_tail_query(IndexSet(labels), x, t);
}

json expansion_json(const ExpansionResult& r) {
  const auto& f = r.factors;
  return {{"log_prob", r.log_prob},
          {"prob", std::exp(r.log_prob)},
          {"log_prob_unexpanded", r.log_prob_unexpanded},
          {"validity_threshold", r.validity_threshold},
          {"factors",
           {{"log_upsilon", f.log_upsilon},
            {"upsilon", std::exp(f.log_upsilon)},
            {"lambda", f.lambda},
            {"beta_exp", f.beta_exp},
            {"power_of_logt", f.power_of_logt},
            {"power_of_t", f.power_of_t},
            {"log_constants", f.log_constants},
            {"I", to_json(f.active)},
            {"h", to_json(f.h)}}}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, false, std::nullopt, "-"};
  CLI::App app{"Tail asymptotics for heavy-tailed vectors with elliptical copulas", "elltail"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--verbose", ctx.verbose, "Print resolved configuration and full diagnostics");

  std::function<void()> action;
  json config;

  MatrixSource matrix;
  std::string copula = "gaussian";
  double alpha = 2.0;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", ctx.seed_flag, "RNG seed (default: ELLTAIL_SEED or built-in)");
  };
  auto add_output = [&](CLI::App* sub, const std::string& help) {
    sub->add_option("--output,-o", ctx.output, help + "; '-' for stdout");
  };

  // qp
  auto* qp_cmd = app.add_subcommand("qp", "Solve min x^T Sigma^{-1} x over x >= 1");
  matrix.add_to(qp_cmd);
  std::string subset;
  qp_cmd->add_option("--subset", subset, "Restrict to coordinates, e.g. 1,2");
  add_output(qp_cmd, "JSON output path");
  qp_cmd->callback([&] {
    action = [&] {
      const auto sigma = matrix.load();
      const auto sol = subset.empty() ? solve_qp(sigma) : solve_qp_subset(sigma, IndexSet(parse_ints(subset)));
      json j = to_json(sol);
      config = {{"subcommand", "qp"}, {"source", matrix.config()}, {"subset", subset}};
      j["config"] = config;
      ctx.emit_json(j);
    };
  });

  // tail-prob
  auto* tp_cmd = app.add_subcommand("tail-prob", "Asymptotic log P(X in t A_{x_S})");
  matrix.add_to(tp_cmd);
  std::string c_list, set_list, x_list;
  double t = 1e8;
  std::optional<double> ell_power;
  double ell_const = 1.0;
  tp_cmd->add_option("--copula", copula, "gaussian | laplace | pe:<gamma>");
  tp_cmd->add_option("--alpha", alpha, "Marginal tail index")->check(CLI::PositiveNumber);
  tp_cmd->add_option("--c", c_list, "Tail constants c_j, one per coordinate");
  tp_cmd->add_option("--set", set_list, "Tail set S, e.g. 1,2")->required();
  tp_cmd->add_option("--x", x_list, "Thresholds x_S")->required();
  tp_cmd->add_option("--t", t, "Scale t")->check(CLI::Range(1.0 + 1e-12, 1e308));
  tp_cmd->add_option("--ell-power", ell_power, "l(t) = c (log t)^a: the exponent a");
  tp_cmd->add_option("--ell-const", ell_const, "Constant c of l(t)")->check(CLI::PositiveNumber);
  add_output(tp_cmd, "JSON output path");
  tp_cmd->callback([&] {
    action = [&] {
      const auto sigma = matrix.load();
      const auto law = radial_preset(copula, sigma.dim());
      const auto margins = make_margins(alpha, c_list, sigma.dim(), ell_power, ell_const);
      const auto query = make_query(set_list, x_list, t);
      json j = expansion_json(tail_set_prob(sigma, law, margins, query));
      config = {{"subcommand", "tail-prob"}, {"source", matrix.config()}, {"copula", copula}, {"alpha", alpha},
                {"c", c_list},  {"set", set_list}, {"x", x_list}, {"t", t}, {"ell_const", ell_const}};
      if (ell_power) config["ell_power"] = *ell_power;
      j["config"] = config;
      ctx.emit_json(j);
    };
  });

  // mrv
  auto* mrv_cmd = app.add_subcommand("mrv", "Hidden regular variation index on E_d^(i)");
  matrix.add_to(mrv_cmd);
  int index_i = 1;
  mrv_cmd->add_option("--copula", copula, "gaussian | laplace | pe:<gamma>");
  mrv_cmd->add_option("--alpha", alpha, "Marginal tail index")->check(CLI::PositiveNumber);
  mrv_cmd->add_option("--i", index_i, "Cone index i")->check(CLI::PositiveNumber);
  mrv_cmd->add_option("--c", c_list, "Tail constants c_j, one per coordinate");
  mrv_cmd->add_option("--set", set_list, "Optional tail set for nu_i");
  mrv_cmd->add_option("--x", x_list, "Thresholds for --set");
  add_output(mrv_cmd, "JSON output path");
  mrv_cmd->callback([&] {
    action = [&] {
      const auto sigma = matrix.load();
      const auto law = radial_preset(copula, sigma.dim());
      const auto margins = make_margins(alpha, c_list, sigma.dim(), std::nullopt, 1.0);
      const auto rep = mrv_index(sigma, law, margins, index_i);
      json family = json::array();
      for (const auto& s : rep.family) family.push_back(to_json(s));
      json j = {{"i", rep.i},
                {"lambda_i", rep.lambda_i},
                {"alpha_i", rep.alpha_i},
                {"family", family},
                {"argmin_set", to_json(rep.argmin_set)},
                {"I_i", to_json(rep.active_set)},
                {"b_inv", {{"log_const", rep.b_inv.log_const},
                           {"logt_power", rep.b_inv.logt_power},
                           {"b_inv_power", rep.b_inv.b_inv_power}}}};
      config = {{"subcommand", "mrv"}, {"source", matrix.config()}, {"copula", copula},
                {"alpha", alpha},      {"i", index_i},             {"c", c_list}};
      if (!set_list.empty()) {
        const auto query = make_query(set_list, x_list, 10.0);
        const auto check = consistency_check(sigma, law, margins, index_i, query);
        j["nu_i"] = nu_i(sigma, law, margins, index_i, query);
        j["consistency"] = {{"t", check.t},
                            {"ratio", check.ratio},
                            {"ratio_unexpanded", check.ratio_unexpanded},
                            {"zero_branch", check.zero_branch},
                            {"monotone", check.monotone},
                            {"monotone_unexpanded", check.monotone_unexpanded}};
        config["set"] = set_list;
        config["x"] = x_list;
      }
      j["config"] = config;
      ctx.emit_json(j);
    };
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Sample the elliptical vector, optionally with Pareto margins");
  matrix.add_to(sim_cmd);
  int n = 20000;
  std::optional<double> gamma_flag;
  std::optional<double> pareto_alpha;
  int threads = 0;
  sim_cmd->add_option("--copula", copula, "gaussian | laplace | pe:<gamma>");
  sim_cmd->add_option("--gamma", gamma_flag, "Power-exponential gamma (overrides --copula)")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--n", n, "Sample size")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--alpha", pareto_alpha, "Transform to Pareto(alpha) margins")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  add_seed(sim_cmd);
  add_output(sim_cmd, "CSV output path");
  sim_cmd->callback([&] {
    action = [&] {
      const auto sigma = matrix.load();
      const std::string cop = gamma_flag ? "pe:" + format_double(*gamma_flag) : copula;
      const auto spec = preset_spec(cop, sigma.dim());
      const auto seed = ctx.seed();
      auto batch = sample_elliptical(sigma, spec, n, seed, {threads});
      if (pareto_alpha) batch = to_pareto_margins(batch, *pareto_alpha);
      config = {{"subcommand", "simulate"}, {"source", matrix.config()}, {"copula", cop}, {"n", n}, {"seed", seed}};
      if (pareto_alpha) config["alpha"] = *pareto_alpha;
      std::ostringstream csv;
      csv.precision(17);
      csv << csv_config_line(config);
      const char prefix = pareto_alpha ? 'x' : 'z';
      for (int j = 0; j < batch.d; ++j) csv << (j ? "," : "") << prefix << j + 1;
      csv << '\n';
      for (int i = 0; i < batch.n; ++i) {
        for (int j = 0; j < batch.d; ++j) csv << (j ? "," : "") << batch.at(i, j);
        csv << '\n';
      }
      ctx.emit(ctx.output, csv.str());
    };
  });

  // hill
  auto* hill_cmd = app.add_subcommand("hill", "Hill estimates over a k grid");
  std::string input, column, k_grid = "50:2000:50";
  hill_cmd->add_option("--input", input, "CSV with a header row")->required()->check(CLI::ExistingFile);
  hill_cmd->add_option("--column", column, "Column name (default: first)");
  hill_cmd->add_option("--k-grid", k_grid, "lo:hi:step");
  add_output(hill_cmd, "CSV output path");
  hill_cmd->callback([&] {
    action = [&] {
      const auto parts = [&] {
        std::vector<int> v;
        std::stringstream ss(k_grid);
        std::string item;
        while (std::getline(ss, item, ':')) v.push_back(static_cast<int>(to_double(item)));
        return v;
      }();
      require(parts.size() == 3 && parts[0] >= 1 && parts[2] >= 1 && parts[1] >= parts[0], ErrorCode::UsageError,
              "--k-grid must be lo:hi:step with 1 <= lo <= hi and step >= 1");
      const auto table = load_losses(input, column.empty() ? std::vector<std::string>{} : std::vector{column});
      const auto series = positive_series(table, table.names.front());
      std::vector<int> ks;
      for (int k = parts[0]; k <= parts[1] && static_cast<std::size_t>(k) < series.values.size(); k += parts[2])
        ks.push_back(k);
      require(!ks.empty(), ErrorCode::UsageError, "no k in the grid below the number of positive values");
      const auto curve = hill_curve(series.values, ks);
      config = {{"subcommand", "hill"}, {"input", input}, {"column", table.names.front()}, {"k_grid", k_grid},
                {"excluded", series.excluded}};
      std::ostringstream csv;
      csv.precision(17);
      csv << csv_config_line(config) << "k,alpha_hat,ci_half_width\n";
      for (std::size_t i = 0; i < curve.k_values.size(); ++i)
        csv << curve.k_values[i] << ',' << curve.estimates[i] << ',' << curve.ci_half_widths[i] << '\n';
      ctx.emit(ctx.output, csv.str());
    };
  });

  // figures
  auto* fig_cmd = app.add_subcommand("figures", "Hill curves for the 3 copulas x 2 correlations grid");
  std::string out_dir = "figures";
  int fig_n = 20000;
  fig_cmd->add_option("--output-dir", out_dir, "Directory for the CSV files");
  fig_cmd->add_option("--n", fig_n, "Sample size per panel")->check(CLI::Range(2, 100000000));
  fig_cmd->add_option("--alpha", alpha, "Pareto tail index")->check(CLI::PositiveNumber);
  fig_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  add_seed(fig_cmd);
  fig_cmd->callback([&] {
    action = [&] {
      const auto seed = ctx.seed();
      std::filesystem::create_directories(out_dir);
      json summary = json::array();
      for (const auto& fc : figure_grid()) {
        const auto sigma = CorrelationMatrix::equicorrelation(3, fc.rho);
        const auto spec = preset_spec(fc.copula, 3);
        const auto table = figure_experiment(sigma, spec, alpha, fig_n, seed, default_series(3), default_k_grid(),
                                             {threads});
        const json cfg = {{"subcommand", "figures"}, {"panel", fc.name}, {"copula", fc.copula}, {"rho", fc.rho},
                          {"alpha", alpha},          {"n", fig_n},        {"seed", seed}};
        const auto path = (std::filesystem::path(out_dir) / (fc.name + ".csv")).string();
        ctx.emit(path, csv_config_line(cfg) + figure_csv(table));
        json means = json::object();
        for (std::size_t s = 0; s < table.series.size(); ++s) {
          try {
            means[table.series[s]] = table.curves[s].stable_mean();
          } catch (const Error&) {
            means[table.series[s]] = nullptr;
          }
        }
        summary.push_back({{"file", path}, {"config", cfg}, {"stable_mean", means}});
      }
      ctx.emit("-", summary.dump(2) + "\n");
    };
  });

  // danish
  auto* dan_cmd = app.add_subcommand("danish", "Tail indices and implied correlation for a pair of loss columns");
  std::string file, cols = "building,contents", compare_dir;
  double loss_gamma = 1.0;
  LossAnalysisOptions loss_opts;
  dan_cmd->add_option("--file", file, "Loss CSV with a header row")->required()->check(CLI::ExistingFile);
  dan_cmd->add_option("--cols", cols, "Two column names");
  dan_cmd->add_option("--gamma", loss_gamma, "Copula gamma for the comparison batch")->check(CLI::PositiveNumber);
  dan_cmd->add_option("--k", loss_opts.k, "Single k for the Hill estimates")->check(CLI::PositiveNumber);
  dan_cmd->add_option("--k-lo", loss_opts.k_lo, "Stable region start")->check(CLI::PositiveNumber);
  dan_cmd->add_option("--k-hi", loss_opts.k_hi, "Stable region end")->check(CLI::PositiveNumber);
  dan_cmd->add_option("--alpha-hat", loss_opts.alpha_hat, "Override the marginal index")->check(CLI::PositiveNumber);
  dan_cmd->add_option("--alpha2-hat", loss_opts.alpha2_hat, "Override the joint index")->check(CLI::PositiveNumber);
  dan_cmd->add_option("--compare-dir", compare_dir, "Write comparison batches here");
  add_seed(dan_cmd);
  add_output(dan_cmd, "JSON output path");
  dan_cmd->callback([&] {
    action = [&] {
      const auto names = split_list(cols);
      require(names.size() == 2, ErrorCode::UsageError, "--cols needs exactly two names");
      require(loss_opts.k_lo <= loss_opts.k_hi, ErrorCode::UsageError, "--k-lo must not exceed --k-hi");
      const auto table = load_losses(file, names);
      const auto rep = analyze_losses(table, names[0], names[1], loss_opts);
      auto rho_json = [](const std::optional<RhoEstimate>& r) -> json {
        if (!r) return nullptr;
        return {{"rho", r->rho}, {"out_of_range", r->out_of_range}};
      };
      const auto seed = ctx.seed();
      config = {{"subcommand", "danish"}, {"file", file}, {"cols", cols}, {"gamma", loss_gamma},
                {"k_lo", loss_opts.k_lo}, {"k_hi", loss_opts.k_hi}, {"seed", seed}};
      if (loss_opts.k) config["k"] = *loss_opts.k;
      json j = {{"n", rep.n},
                {"alpha_hat", rep.alpha_hat},
                {"alpha2_hat", rep.alpha2_hat},
                {"alpha_marginal", {{names[0], rep.alpha_a}, {names[1], rep.alpha_b}}},
                {"rho_gaussian", rho_json(rep.rho_gaussian)},
                {"rho_laplace", rho_json(rep.rho_laplace)},
                {"exclusions", {{names[0], rep.excluded_a}, {names[1], rep.excluded_b}, {"min", rep.excluded_min}}}};
      if (!compare_dir.empty()) {
        const auto rho = estimate_rho(rep.alpha_hat, rep.alpha2_hat, loss_gamma);
        require(!rho.out_of_range, ErrorCode::InvalidIndices, "implied correlation outside (-1, 1)");
        std::filesystem::create_directories(compare_dir);
        const auto batch = comparison_simulation(rep.alpha_hat, rho.rho, loss_gamma, static_cast<int>(rep.n), seed);
        const json cfg = {{"subcommand", "danish"}, {"comparison", true}, {"alpha", rep.alpha_hat},
                          {"rho", rho.rho},          {"gamma", loss_gamma}, {"n", rep.n}, {"seed", seed}};
        std::ostringstream csv;
        csv.precision(17);
        csv << csv_config_line(cfg) << names[0] << ',' << names[1] << '\n';
        for (int i = 0; i < batch.n; ++i) csv << batch.at(i, 0) << ',' << batch.at(i, 1) << '\n';
        const auto path = (std::filesystem::path(compare_dir) / ("comparison_gamma" + format_double(loss_gamma) + ".csv")).string();
        ctx.emit(path, csv.str());
        j["comparison_file"] = path;
        j["comparison_rho"] = rho.rho;
      }
      j["config"] = config;
      ctx.emit_json(j);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "elltail: " << e.what() << '\n';
    return 2;
  }

  try {
    action();
    if (ctx.verbose) err << "config " << config.dump() << '\n';
  } catch (const Error& e) {
    err << "elltail: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "elltail: " << (ctx.verbose ? std::string("internal error: ") + e.what() : std::string(e.what())) << '\n';
    return 2;
  }
  return 0;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace elltail::cli
