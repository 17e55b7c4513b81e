#pragma once

// Small dense linear algebra on correlation matrices: validation, sub-blocks,
// SPD solves and Gaussian conditional covariances.
//
// Coordinates are labelled 1..dim at every public boundary; Eigen storage is
// 0-based and the conversion happens inside this module.

#include <compare>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace elltail {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative pivot tolerance for positive-definiteness checks.
inline constexpr double kPivotTolerance = 1e-12;

class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<int> labels);
  explicit IndexSet(std::vector<int> labels);

  // {1, ..., dim}
  static IndexSet full(int dim);

  const std::vector<int>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int operator[](std::size_t pos) const { return labels_[pos]; }
  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  bool contains(int label) const;
  bool is_subset_of(const IndexSet& other) const;
  // Position of `label` within this set (0-based); throws if absent.
  int position_of(int label) const;
  // 0-based storage offsets (label - 1).
  std::vector<int> offsets() const;
  IndexSet minus(const IndexSet& other) const;
  // Throws IndexOutOfRange unless every label lies in 1..dim.
  void check_within(int dim) const;

  std::string to_string() const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;
  friend auto operator<=>(const IndexSet& a, const IndexSet& b) { return a.labels_ <=> b.labels_; }

 private:
  std::vector<int> labels_;
};

// Validated symmetric positive definite matrix with unit diagonal.
class CorrelationMatrix {
 public:
  static CorrelationMatrix identity(int dim);
  static CorrelationMatrix equicorrelation(int dim, double rho);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  // Lower-triangular A with A * A^T == entries().
  const Matrix& factor() const { return factor_; }
  double log_det() const;

 private:
  friend CorrelationMatrix validate_correlation(const Matrix& raw);
  CorrelationMatrix(Matrix entries, Matrix factor)
      : entries_(std::move(entries)), factor_(std::move(factor)) {}

  Matrix entries_;
  Matrix factor_;
};

CorrelationMatrix validate_correlation(const Matrix& raw);

Matrix sub_block(const Matrix& m, const IndexSet& rows, const IndexSet& cols);
Matrix sub_block(const CorrelationMatrix& sigma, const IndexSet& rows, const IndexSet& cols);

// Sigma restricted to S x S, relabelled 1..|S|.
CorrelationMatrix sub_correlation(const CorrelationMatrix& sigma, const IndexSet& s);

// Cholesky factor with the relative pivot check; throws NotPositiveDefinite.
Matrix spd_factor(const Matrix& m);
Vector spd_solve(const Matrix& m, const Vector& b);
double spd_log_det(const Matrix& m);

// Sigma_JJ - Sigma_JI Sigma_II^{-1} Sigma_IJ.
Matrix conditional_cov(const CorrelationMatrix& sigma, const IndexSet& given, const IndexSet& target);

// {"dim": d, "entries": [[...], ...]}
Matrix parse_matrix_json(std::string_view text);
// Square CSV, one row per line; blank lines and '#' comments ignored.
Matrix parse_matrix_csv(std::string_view text);
// Dispatches on the .json extension, CSV otherwise.
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace elltail
