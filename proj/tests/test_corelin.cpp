#include <doctest.h>

#include <random>

#include "elltail/corelin.hpp"
#include "elltail/error.hpp"
#include "oracles.hpp"

using namespace elltail;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an elltail::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("corelin") {
  TEST_CASE("validate_correlation accepts the identity and equicorrelation 0.6") {
    CHECK(validate_correlation(Matrix::Identity(3, 3)).dim() == 3);
    CHECK(CorrelationMatrix::equicorrelation(3, 0.6).dim() == 3);
  }

  TEST_CASE("validate_correlation rejects each defect with its own code") {
    CHECK(code_of([] { CorrelationMatrix::equicorrelation(3, -0.6); }) == ErrorCode::NotPositiveDefinite);
    Matrix m = Matrix::Identity(3, 3);
    m(0, 1) = 0.3;
    CHECK(code_of([&] { validate_correlation(m); }) == ErrorCode::NotSymmetric);
    m = Matrix::Identity(3, 3);
    m(1, 1) = 1.1;
    CHECK(code_of([&] { validate_correlation(m); }) == ErrorCode::BadDiagonal);
    CHECK(code_of([] { validate_correlation(Matrix::Identity(2, 3)); }) == ErrorCode::NotSquare);
    m = Matrix::Identity(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    CHECK(code_of([&] { validate_correlation(m); }) == ErrorCode::NotPositiveDefinite);
  }

  TEST_CASE("factor reproduces the matrix") {
    const auto s = CorrelationMatrix::equicorrelation(4, 0.3);
    CHECK((s.factor() * s.factor().transpose() - s.entries()).norm() < 1e-14);
  }

  TEST_CASE("sub_block extraction") {
    const auto s = CorrelationMatrix::equicorrelation(3, 0.6);
    const Matrix a = sub_block(s, {1, 2}, {1, 2});
    CHECK(a(0, 0) == 1.0);
    CHECK(a(0, 1) == 0.6);
    const Matrix b = sub_block(s, {3}, {1, 2});
    CHECK(b.rows() == 1);
    CHECK(b(0, 0) == 0.6);
    CHECK(b(0, 1) == 0.6);
    CHECK(sub_block(CorrelationMatrix::identity(3), {2}, {2})(0, 0) == 1.0);
    CHECK(code_of([&] { sub_block(s, {4}, {1}); }) == ErrorCode::IndexOutOfRange);
  }

  TEST_CASE("sub_block composes after relabelling") {
    const Matrix raw = oracle::random_correlation(5, 11);
    const auto sigma = validate_correlation(raw);
    const IndexSet s{1, 3, 4, 5};
    const auto inner = sub_correlation(sigma, s);
    // T = {3, 5} sits at positions 2 and 4 of S.
    CHECK((sub_block(inner, {2, 4}, {2, 4}) - sub_block(sigma, {3, 5}, {3, 5})).norm() == 0.0);
  }

  TEST_CASE("spd_solve examples") {
    const Vector ones = Vector::Ones(3);
    CHECK((spd_solve(Matrix::Identity(3, 3), ones) - ones).norm() < 1e-15);
    Matrix m(2, 2);
    m << 1, 0.6, 0.6, 1;
    const Vector x = spd_solve(m, Vector::Ones(2));
    CHECK(x(0) == doctest::Approx(0.625).epsilon(1e-14));
    CHECK(x(1) == doctest::Approx(0.625).epsilon(1e-14));
    const Vector y = spd_solve(CorrelationMatrix::equicorrelation(3, 0.6).entries(), ones);
    for (int i = 0; i < 3; ++i) CHECK(y(i) == doctest::Approx(1.0 / 2.2).epsilon(1e-14));
  }

  TEST_CASE("spd_solve residual on random SPD matrices") {
    std::mt19937 gen(3);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 50; ++trial) {
      const int d = 1 + trial % 8;
      Matrix a(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = n01(gen);
      const Matrix m = a * a.transpose() + 0.1 * Matrix::Identity(d, d);
      Vector b(d);
      for (int i = 0; i < d; ++i) b(i) = n01(gen);
      CHECK((m * spd_solve(m, b) - b).norm() <= 1e-10 * b.norm());
    }
  }

  TEST_CASE("conditional_cov examples") {
    const Matrix c = conditional_cov(CorrelationMatrix::identity(3), {1}, {2, 3});
    CHECK((c - Matrix::Identity(2, 2)).norm() < 1e-15);
    CHECK(conditional_cov(CorrelationMatrix::equicorrelation(3, 0.6), {1, 2}, {3})(0, 0) ==
          doctest::Approx(0.55).epsilon(1e-13));
    CHECK(conditional_cov(CorrelationMatrix::equicorrelation(3, 0.8), {1, 2}, {3})(0, 0) ==
          doctest::Approx(1.0 - 1.28 / 1.8).epsilon(1e-13));
  }

  TEST_CASE("Schur complements of random matrices are positive definite") {
    for (unsigned seed = 0; seed < 30; ++seed) {
      const auto sigma = validate_correlation(oracle::random_correlation(5, seed));
      const Matrix c = conditional_cov(sigma, {1, 4}, {2, 3, 5});
      CHECK_NOTHROW(spd_factor(c));
      CHECK((c - c.transpose()).norm() == 0.0);
    }
  }

  TEST_CASE("IndexSet semantics") {
    const IndexSet s{3, 1, 2};
    CHECK(s.labels() == std::vector<int>{1, 2, 3});
    CHECK(s.to_string() == "{1,2,3}");
    CHECK(s.minus({2}) == IndexSet{1, 3});
    CHECK(IndexSet{1, 3}.is_subset_of(s));
    CHECK(s.position_of(3) == 2);
    CHECK(code_of([] { IndexSet{1, 1}; }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { IndexSet{0, 1}; }) == ErrorCode::IndexOutOfRange);
    CHECK(code_of([&] { s.check_within(2); }) == ErrorCode::IndexOutOfRange);
  }

  TEST_CASE("matrix parsers") {
    const Matrix j = parse_matrix_json(R"({"dim": 2, "entries": [[1, 0.5], [0.5, 1]]})");
    CHECK(j(0, 1) == 0.5);
    const Matrix c = parse_matrix_csv("# comment\n1,0.5\n\n0.5,1\n");
    CHECK(c(1, 0) == 0.5);
    CHECK(code_of([] { parse_matrix_csv("1,0.5\n0.5\n"); }) == ErrorCode::NotSquare);
    CHECK(code_of([] { parse_matrix_json(R"({"entries": [[1, 0.5, 0], [0.5, 1]]})"); }) == ErrorCode::NotSquare);
    try {
      parse_matrix_csv("1,0.5\n0.5,abc\n");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
}
