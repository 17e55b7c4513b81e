#include "elltail/corelin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "elltail/error.hpp"

namespace elltail {

IndexSet::IndexSet(std::initializer_list<int> labels) : IndexSet(std::vector<int>(labels)) {}

IndexSet::IndexSet(std::vector<int> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  require(std::adjacent_find(labels_.begin(), labels_.end()) == labels_.end(),
          ErrorCode::InvalidArgument, "duplicate index in " + to_string());
  require(labels_.empty() || labels_.front() >= 1, ErrorCode::IndexOutOfRange,
          "index labels start at 1: " + to_string());
}

IndexSet IndexSet::full(int dim) {
  std::vector<int> labels(static_cast<std::size_t>(std::max(dim, 0)));
  for (int i = 0; i < dim; ++i) labels[static_cast<std::size_t>(i)] = i + 1;
  return IndexSet(std::move(labels));
}

bool IndexSet::contains(int label) const {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

bool IndexSet::is_subset_of(const IndexSet& other) const {
  return std::includes(other.labels_.begin(), other.labels_.end(), labels_.begin(), labels_.end());
}

int IndexSet::position_of(int label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  require(it != labels_.end() && *it == label, ErrorCode::IndexOutOfRange,
          std::to_string(label) + " not in " + to_string());
  return static_cast<int>(it - labels_.begin());
}

std::vector<int> IndexSet::offsets() const {
  std::vector<int> out(labels_.size());
  std::transform(labels_.begin(), labels_.end(), out.begin(), [](int l) { return l - 1; });
  return out;
}

IndexSet IndexSet::minus(const IndexSet& other) const {
  std::vector<int> out;
  std::set_difference(labels_.begin(), labels_.end(), other.labels_.begin(), other.labels_.end(),
                      std::back_inserter(out));
  return IndexSet(std::move(out));
}

void IndexSet::check_within(int dim) const {
  require(labels_.empty() || labels_.back() <= dim, ErrorCode::IndexOutOfRange,
          to_string() + " exceeds dimension " + std::to_string(dim));
}

std::string IndexSet::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(labels_[i]);
  }
  return s + "}";
}

Matrix spd_factor(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorCode::NotSquare, "matrix must be square");
  const Eigen::Index n = m.rows();
  const double scale = n > 0 ? m.diagonal().maxCoeff() : 1.0;
  require(scale > 0.0, ErrorCode::NotPositiveDefinite, "non-positive diagonal");
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > kPivotTolerance * scale)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "pivot " + std::to_string(pivot) + " at row " + std::to_string(j + 1));
    }
    l(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return l;
}

Vector spd_solve(const Matrix& m, const Vector& b) {
  require(b.size() == m.rows(), ErrorCode::InvalidArgument, "right-hand side length mismatch");
  const Matrix l = spd_factor(m);
  Vector y = l.triangularView<Eigen::Lower>().solve(b);
  return l.transpose().triangularView<Eigen::Upper>().solve(y);
}

double spd_log_det(const Matrix& m) {
  return 2.0 * spd_factor(m).diagonal().array().log().sum();
}

CorrelationMatrix validate_correlation(const Matrix& raw) {
  require(raw.rows() == raw.cols(), ErrorCode::NotSquare,
          std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()) + " input");
  require(raw.rows() >= 2, ErrorCode::InvalidArgument, "dimension must be at least 2");
  const Eigen::Index n = raw.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    require(raw(j, j) == 1.0, ErrorCode::BadDiagonal,
            "entry (" + std::to_string(j + 1) + "," + std::to_string(j + 1) + ") is not 1");
    for (Eigen::Index k = j + 1; k < n; ++k) {
      require(raw(j, k) == raw(k, j), ErrorCode::NotSymmetric,
              "entries (" + std::to_string(j + 1) + "," + std::to_string(k + 1) + ") differ");
      // A correlation of magnitude >= 1 makes the 2x2 principal minor singular.
      require(std::isfinite(raw(j, k)) && std::abs(raw(j, k)) < 1.0, ErrorCode::NotPositiveDefinite,
              "off-diagonal entry outside (-1, 1)");
    }
  }
  Matrix factor = spd_factor(raw);
  return CorrelationMatrix(raw, std::move(factor));
}

CorrelationMatrix CorrelationMatrix::identity(int dim) {
  return validate_correlation(Matrix::Identity(dim, dim));
}

CorrelationMatrix CorrelationMatrix::equicorrelation(int dim, double rho) {
  Matrix m = Matrix::Constant(dim, dim, rho);
  m.diagonal().setOnes();
  return validate_correlation(m);
}

double CorrelationMatrix::log_det() const {
  return 2.0 * factor_.diagonal().array().log().sum();
}

Matrix sub_block(const Matrix& m, const IndexSet& rows, const IndexSet& cols) {
  require(!rows.empty() && !cols.empty(), ErrorCode::InvalidArgument, "empty index set");
  rows.check_within(static_cast<int>(m.rows()));
  cols.check_within(static_cast<int>(m.cols()));
  return m(rows.offsets(), cols.offsets());
}

Matrix sub_block(const CorrelationMatrix& sigma, const IndexSet& rows, const IndexSet& cols) {
  return sub_block(sigma.entries(), rows, cols);
}

CorrelationMatrix sub_correlation(const CorrelationMatrix& sigma, const IndexSet& s) {
  require(s.size() >= 2, ErrorCode::InvalidArgument, "correlation block needs two coordinates");
  return validate_correlation(sub_block(sigma, s, s));
}

Matrix conditional_cov(const CorrelationMatrix& sigma, const IndexSet& given, const IndexSet& target) {
  require(!given.empty() && !target.empty(), ErrorCode::InvalidArgument, "empty index set");
  require(given.minus(target) == given, ErrorCode::InvalidArgument, "index sets must be disjoint");
  const Matrix s_ii = sub_block(sigma, given, given);
  const Matrix s_ji = sub_block(sigma, target, given);
  const Matrix s_jj = sub_block(sigma, target, target);
  const Matrix l = spd_factor(s_ii);
  // W = L^{-1} Sigma_IJ so that Sigma_JI Sigma_II^{-1} Sigma_IJ = W^T W.
  const Matrix w = l.triangularView<Eigen::Lower>().solve(s_ji.transpose());
  Matrix schur = s_jj - w.transpose() * w;
  schur = 0.5 * (schur + schur.transpose());
  spd_factor(schur);
  return schur;
}

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  require(n > 0, ErrorCode::ParseError, "matrix has no rows");
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    require(static_cast<Eigen::Index>(row.size()) == n, ErrorCode::NotSquare,
            "row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) + " entries, expected " +
                std::to_string(n));
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

Matrix parse_matrix_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  require(doc.is_object() && doc.contains("entries"), ErrorCode::ParseError, "missing \"entries\"");
  std::vector<std::vector<double>> rows;
  try {
    rows = doc.at("entries").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  Matrix m = from_rows(rows);
  if (doc.contains("dim")) {
    require(doc.at("dim").is_number_integer() && doc.at("dim").get<long>() == m.rows(), ErrorCode::NotSquare,
            "\"dim\" does not match the entries");
  }
  return m;
}

Matrix parse_matrix_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
        if (field.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(field);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return from_rows(rows);
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ParseError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return path.extension() == ".json" ? parse_matrix_json(buffer.str()) : parse_matrix_csv(buffer.str());
}

}  // namespace elltail
