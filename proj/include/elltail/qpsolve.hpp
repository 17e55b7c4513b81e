#pragma once

// min_{x >= 1} x^T Sigma^{-1} x over a correlation block, solved by enumerating
// candidate active sets.

#include <map>
#include <vector>

#include "elltail/corelin.hpp"

namespace elltail {

// Sigma_II^{-1} 1_I must exceed this componentwise for I to be accepted.
inline constexpr double kQpPositivityTolerance = 1e-12;
// e_J >= 1 - kQpFaceTolerance accepts boundary faces where e_J touches 1.
inline constexpr double kQpFaceTolerance = 1e-9;
inline constexpr int kQpMaxDim = 20;

struct QPSolution {
  IndexSet block;     // coordinates the program was solved over, original labels
  IndexSet active;    // I
  IndexSet inactive;  // J, possibly empty
  std::vector<double> e_star;  // minimizer, aligned with `block`
  double lambda = 0.0;
  std::map<int, double> h;  // h_i = 1_I^T Sigma_II^{-1} e_i for i in I
  // Set when more than one candidate active set passed the tolerances.
  bool ambiguous = false;

  double e_star_at(int label) const { return e_star[static_cast<std::size_t>(block.position_of(label))]; }
};

QPSolution solve_qp(const CorrelationMatrix& sigma);
QPSolution solve_qp_subset(const CorrelationMatrix& sigma, const IndexSet& s);

}  // namespace elltail
