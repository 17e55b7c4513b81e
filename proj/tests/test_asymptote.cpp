#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "elltail/asymptote.hpp"
#include "elltail/error.hpp"
#include "oracles.hpp"

using namespace elltail;

namespace {

CorrelationMatrix pair(double rho) {
  Matrix m(2, 2);
  m << 1, rho, rho, 1;
  return validate_correlation(m);
}

// P(Z1 > u, Z2 > u) for a standard bivariate normal with correlation rho.
double bivariate_normal_tail(double rho, double u) {
  const double s = std::sqrt(1 - rho * rho);
  return oracle::simpson(
      [&](double z) {
        return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi) * oracle::normal_upper((u - rho * z) / s);
      },
      u, u + 12.0, 20000);
}

IndexSet random_subset(int d, std::mt19937& gen) {
  for (;;) {
    std::vector<int> labels;
    for (int j = 1; j <= d; ++j)
      if (gen() & 1u) labels.push_back(j);
    if (labels.size() >= 2) return IndexSet(labels);
  }
}

}  // namespace

TEST_SUITE("asymptote") {
  TEST_CASE("beta exponent") {
    CHECK(beta_exponent(1, 2, 3, 0) == doctest::Approx(0.0));
    CHECK(beta_exponent(0, 3, 2, 1) == doctest::Approx(-1.25));
    CHECK(beta_exponent(2.0, 1.7, 2, 1) - beta_exponent(1.0, 1.7, 2, 1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(beta_exponent(1, 2, 0, 2), Error);
  }

  TEST_CASE("orthant factor conventions") {
    const auto sigma = CorrelationMatrix::identity(3);
    CHECK(orthant_factor(sigma, IndexSet{1, 2, 3}, IndexSet{}, {}) == 1.0);
    CHECK(orthant_factor(sigma, IndexSet{1}, IndexSet{2, 3},
                         {{2, LimitThreshold::neg_infinity}, {3, LimitThreshold::neg_infinity}}) == 1.0);
    CHECK(orthant_factor(sigma, IndexSet{1, 2}, IndexSet{3}, {{3, LimitThreshold::zero}}) == doctest::Approx(0.5));
    CHECK(orthant_factor(sigma, IndexSet{1}, IndexSet{2, 3}, {{2, LimitThreshold::zero}, {3, LimitThreshold::zero}}) ==
          doctest::Approx(0.25));
  }

  TEST_CASE("orthant probability closed forms against lattice rule") {
    OrthantOptions qmc;
    qmc.force_qmc = true;
    for (double r = -0.9; r <= 0.9 + 1e-9; r += 0.1) {
      Matrix c(2, 2);
      c << 1, r, r, 1;
      CHECK(std::abs(orthant_probability(c) - oracle::orthant_closed(c)) < 1e-14);
      CHECK(std::abs(orthant_probability(c, qmc) - oracle::orthant_closed(c)) < 3e-4);
    }
    for (unsigned seed = 1; seed <= 5; ++seed) {
      const Matrix c = oracle::random_correlation(3, seed);
      CHECK(std::abs(orthant_probability(c, qmc) - oracle::orthant_closed(c)) < 3e-4);
    }
    // Four independent coordinates.
    CHECK(std::abs(orthant_probability(Matrix::Identity(4, 4)) - 1.0 / 16) < 1e-4);
    CHECK(orthant_probability(Matrix(0, 0)) == 1.0);
  }

  TEST_CASE("boundary face enters with a zero threshold") {
    Matrix m(3, 3);
    m << 1, .2, .6, .2, 1, .6, .6, .6, 1;
    const auto sigma = validate_correlation(m);
    const auto qp = solve_qp(sigma);
    CHECK(qp.active == IndexSet{1, 2});
    CHECK(qp.e_star_at(3) == doctest::Approx(1.0));
    const auto th = limit_thresholds(qp);
    CHECK(th.at(3) == LimitThreshold::zero);
    CHECK(orthant_factor(sigma, qp.active, qp.inactive, th) == doctest::Approx(0.5));

    Matrix m2(3, 3);
    m2 << 1, .2, .7, .2, 1, .7, .7, .7, 1;
    const auto qp2 = solve_qp(validate_correlation(m2));
    CHECK(limit_thresholds(qp2).at(3) == LimitThreshold::neg_infinity);
  }

  TEST_CASE("Gaussian upsilon against an independent transcription") {
    const auto law = power_exponential_radial(3, 1.0);
    for (unsigned seed = 10; seed < 30; ++seed) {
      const Matrix raw = oracle::random_correlation(3, seed);
      const auto sigma = validate_correlation(raw);
      const auto qp = solve_qp(sigma);
      CHECK(log_upsilon(sigma, law, qp) == doctest::Approx(oracle::gaussian_log_upsilon(raw)).epsilon(1e-10));
    }
    const auto eq = CorrelationMatrix::equicorrelation(3, 0.6);
    CHECK(log_upsilon(eq, law, solve_qp(eq)) ==
          doctest::Approx(oracle::gaussian_log_upsilon(eq.entries())).epsilon(1e-12));
  }

  TEST_CASE("upsilon falls with the determinant of the active block") {
    // Full active set on a pair: d/d rho of log Upsilon = rho/(1-rho^2) - d log(h1 h2)/d rho.
    const auto law = power_exponential_radial(2, 1.0);
    auto lu = [&](double rho) {
      const auto s = pair(rho);
      return log_upsilon(s, law, solve_qp(s));
    };
    const double rho = 0.3, eps = 1e-5;
    const double numeric = (lu(rho + eps) - lu(rho - eps)) / (2 * eps);
    // h_i = 1/(1+rho): -log(h1 h2) contributes 2/(1+rho); -1/2 log det contributes rho/(1-rho^2).
    CHECK(numeric == doctest::Approx(rho / (1 - rho * rho) + 2 / (1 + rho)).epsilon(1e-6));
  }

  TEST_CASE("joint tail with zero shift") {
    const auto sigma = CorrelationMatrix::equicorrelation(3, 0.4);
    const auto law = power_exponential_radial(3, 0.75);
    const auto qp = solve_qp(sigma);
    const double u = 5.0;
    const double bs = beta_exponent(law.beta, law.gamma, 3, 0);
    const double expected = log_upsilon(sigma, law, qp) + bs * std::log(qp.lambda * u * u) - 3 * std::log(u) -
                            law.L * std::pow(qp.lambda * u * u, law.gamma / 2);
    CHECK(joint_elliptical_tail(sigma, law, u, Vector::Zero(3)) == doctest::Approx(expected).epsilon(1e-13));
  }

  TEST_CASE("joint tail under independence") {
    const auto sigma = CorrelationMatrix::identity(2);
    const auto law = power_exponential_radial(2, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double u : {4.0, 6.0, 8.0, 10.0}) {
      const double exact = 2 * std::log(oracle::normal_upper(u));
      const double ratio = std::exp(joint_elliptical_tail(sigma, law, u, Vector::Zero(2)) - exact);
      if (u == 6.0) CHECK(std::abs(ratio - 1) < 0.15);
      CHECK(std::abs(ratio - 1) < prev);
      prev = std::abs(ratio - 1);
    }
  }

  TEST_CASE("joint tail against the bivariate normal") {
    const auto law = power_exponential_radial(2, 1.0);
    const auto sigma = pair(0.6);
    const double u = 3.5;
    const double ratio = std::exp(joint_elliptical_tail(sigma, law, u, Vector::Zero(2))) / bivariate_normal_tail(0.6, u);
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
  }

  TEST_CASE("Gaussian reduction") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> ux(0.5, 3.0), ue(4.0, 14.0), ua(0.5, 4.0);
    for (int rep = 0; rep < 50; ++rep) {
      const int d = 2 + rep % 4;
      const Matrix raw = oracle::random_correlation(d, 100 + rep);
      const auto sigma = validate_correlation(raw);
      const auto s = random_subset(d, gen);
      std::map<int, double> x;
      for (int j : s) x[j] = ux(gen);
      const double t = std::pow(10.0, ue(gen));
      MarginSpec margins;
      margins.alpha = ua(gen);
      const auto q = make_tail_query(s, x, t);
      const double ours = tail_set_prob(sigma, power_exponential_radial(d, 1.0), margins, q).log_prob;
      const double ref = oracle::pair_copula_log_prob(raw, s.labels(), x, t, margins.alpha);
      CHECK(std::abs(ours - ref) <= 1e-12 * std::abs(ref));
    }
  }

  TEST_CASE("decay exponent") {
    const auto sigma = CorrelationMatrix::equicorrelation(3, 0.6);
    for (double kappa : {0.5, 1.0, 1.5}) {
      const auto law = power_exponential_radial(3, kappa);
      MarginSpec m;
      for (const IndexSet& s : {IndexSet{1, 2}, IndexSet{1, 2, 3}}) {
        std::map<int, double> x;
        for (int j : s) x[j] = 1.5;
        const double p8 = tail_set_prob(sigma, law, m, make_tail_query(s, x, 1e8)).log_prob;
        const auto r10 = tail_set_prob(sigma, law, m, make_tail_query(s, x, 1e10));
        const double slope = (r10.log_prob - p8) / (std::log(1e10) - std::log(1e8));
        const double expected = -m.alpha * std::pow(r10.factors.lambda, law.gamma / 2);
        const double drift =
            r10.factors.power_of_logt * (std::log(std::log(1e10)) - std::log(std::log(1e8))) / std::log(100.0);
        CHECK(slope == doctest::Approx(expected + drift).epsilon(1e-10));
        // Laplace triple: 2.4% from the log t power.
        CHECK(std::abs(slope / expected - 1) <= (kappa >= 1.0 ? 0.02 : 0.025));
      }
    }
  }

  TEST_CASE("threshold homogeneity") {
    const auto sigma = validate_correlation(oracle::random_correlation(4, 3));
    for (double kappa : {0.5, 1.0, 1.5}) {
      const auto law = power_exponential_radial(4, kappa);
      MarginSpec margins;
      margins.alpha = 1.7;
      margins.c = {{1, 1.0}, {2, 2.0}, {3, 0.5}, {4, 1.3}};
      const std::map<int, double> x{{1, 1.2}, {3, 0.7}, {4, 2.5}};
      const double m = 3.0;
      std::map<int, double> mx = x;
      for (auto& [j, v] : mx) v *= m;
      const auto a = tail_set_prob(sigma, law, margins, make_tail_query(IndexSet{1, 3, 4}, x, 1e9));
      const auto b = tail_set_prob(sigma, law, margins, make_tail_query(IndexSet{1, 3, 4}, mx, 1e9));
      double h_sum = 0;
      for (const auto& [j, h] : a.factors.h) h_sum += h;
      CHECK(h_sum == doctest::Approx(a.factors.lambda).epsilon(1e-12));
      const double expected = -margins.alpha * std::pow(a.factors.lambda, law.gamma / 2) * std::log(m);
      CHECK(b.log_prob - a.log_prob == doctest::Approx(expected).epsilon(1e-10));
      // Scaling t by m changes the pure power part by the same amount.
      const auto c = tail_set_prob(sigma, law, margins, make_tail_query(IndexSet{1, 3, 4}, x, 1e9 * m));
      const double logt_drift = a.factors.power_of_logt * (std::log(std::log(1e9 * m)) - std::log(std::log(1e9)));
      CHECK(c.log_prob - a.log_prob - logt_drift == doctest::Approx(expected).epsilon(1e-10));
    }
  }

  TEST_CASE("joint tail grows with correlation") {
    const auto law = power_exponential_radial(2, 0.5);
    MarginSpec m;
    double prev = -std::numeric_limits<double>::infinity();
    for (double rho = -0.8; rho <= 0.95; rho += 0.05) {
      const double lp =
          tail_set_prob(pair(rho), law, m, make_tail_query(IndexSet{1, 2}, {{1, 1.0}, {2, 1.0}}, 1e10)).log_prob;
      CHECK(lp > prev);
      prev = lp;
    }
  }

  TEST_CASE("expanded and un-expanded forms approach each other") {
    const auto sigma = CorrelationMatrix::equicorrelation(3, 0.5);
    const auto query = [](double t) { return make_tail_query(IndexSet{1, 2, 3}, {{1, 2.0}, {2, 1.0}, {3, 3.0}}, t); };
    // Gaussian: both forms agree.
    for (double e : {6.0, 12.0, 40.0}) {
      const auto r = tail_set_prob(sigma, power_exponential_radial(3, 1.0), MarginSpec{}, query(std::pow(10, e)));
      CHECK(std::abs(r.log_prob - r.log_prob_unexpanded) < 1e-11);
    }
    for (double kappa : {0.5, 1.5}) {
      const auto law = power_exponential_radial(3, kappa);
      double prev = std::numeric_limits<double>::infinity();
      for (double e = 20; e <= 300; e *= 1.5) {
        const auto r = tail_set_prob(sigma, law, MarginSpec{}, query(std::pow(10, e)));
        const double gap = std::abs(r.log_prob - r.log_prob_unexpanded);
        CHECK(gap < prev);
        prev = gap;
      }
      CHECK(prev < 0.05);
    }
  }

  TEST_CASE("validity threshold") {
    const auto sigma = CorrelationMatrix::equicorrelation(3, 0.6);
    const auto q = make_tail_query(IndexSet{1, 2}, {{1, 1.0}, {2, 1.0}}, 1e8);
    const auto g = tail_set_prob(sigma, power_exponential_radial(3, 1.0), MarginSpec{}, q);
    CHECK(g.factors.beta_exp == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(g.validity_threshold == doctest::Approx(std::pow(10.0, 0.5)));
    const auto l = tail_set_prob(sigma, power_exponential_radial(3, 0.5), MarginSpec{}, q);
    CHECK(l.validity_threshold > 10.0);
    CHECK(std::isfinite(l.validity_threshold));
  }

  TEST_CASE("errors") {
    const auto sigma = CorrelationMatrix::equicorrelation(3, 0.6);
    const auto law = power_exponential_radial(3, 0.5);
    MarginSpec m;
    m.ell = SlowlyVarying::log_power(1.0);
    const auto q = make_tail_query(IndexSet{1, 2}, {{1, 1.0}, {2, 1.0}}, 1e8);
    try {
      tail_set_prob(sigma, law, m, q);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GammaOneRequiresConstantEll);
    }
    CHECK_NOTHROW(tail_set_prob(sigma, power_exponential_radial(3, 1.0), m, q));
    CHECK_THROWS_AS(make_tail_query(IndexSet{1, 2}, {{1, 1.0}}, 1e8), Error);
    CHECK_THROWS_AS(make_tail_query(IndexSet{1, 2}, {{1, 1.0}, {2, -1.0}}, 1e8), Error);
    CHECK_THROWS_AS(make_tail_query(IndexSet{1, 2}, {{1, 1.0}, {2, 1.0}}, 0.5), Error);
    CHECK_THROWS_AS(tail_set_prob(sigma, law, MarginSpec{}, make_tail_query(IndexSet{1}, {{1, 1.0}}, 1e8)), Error);
    CHECK_THROWS_AS(
        tail_set_prob(sigma, law, MarginSpec{}, make_tail_query(IndexSet{1, 4}, {{1, 1.0}, {4, 1.0}}, 1e8)), Error);
  }
}
