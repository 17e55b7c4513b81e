#include "elltail/qpsolve.hpp"

#include <algorithm>
#include <tuple>

#include "elltail/error.hpp"

namespace elltail {
namespace {

struct Candidate {
  std::vector<int> active_pos;  // positions within the block
  Vector weights;               // Sigma_II^{-1} 1_I
  Vector e_star;
  double lambda;
};

// Tests one candidate active set; returns false when it fails either condition.
bool try_candidate(const Matrix& m, const std::vector<int>& active, const std::vector<int>& inactive,
                   Candidate& out) {
  const Matrix m_ii = m(active, active);
  const Vector w = spd_solve(m_ii, Vector::Ones(static_cast<Eigen::Index>(active.size())));
  if ((w.array() <= kQpPositivityTolerance).any()) return false;
  Vector e = Vector::Ones(m.rows());
  if (!inactive.empty()) {
    const Vector e_j = m(inactive, active) * w;
    if ((e_j.array() < 1.0 - kQpFaceTolerance).any()) return false;
    for (std::size_t k = 0; k < inactive.size(); ++k) e(inactive[k]) = e_j(static_cast<Eigen::Index>(k));
  }
  out = Candidate{active, w, e, w.sum()};
  return true;
}

QPSolution package(const IndexSet& block, const Candidate& c, bool ambiguous) {
  QPSolution sol;
  sol.block = block;
  std::vector<int> act, inact;
  for (std::size_t p = 0, a = 0; p < block.size(); ++p) {
    if (a < c.active_pos.size() && c.active_pos[a] == static_cast<int>(p)) {
      act.push_back(block[p]);
      sol.h[block[p]] = c.weights(static_cast<Eigen::Index>(a));
      ++a;
    } else {
      inact.push_back(block[p]);
    }
  }
  sol.active = IndexSet(std::move(act));
  sol.inactive = IndexSet(std::move(inact));
  sol.e_star.assign(c.e_star.data(), c.e_star.data() + c.e_star.size());
  sol.lambda = c.lambda;
  sol.ambiguous = ambiguous;
  return sol;
}

QPSolution solve_block(const Matrix& m, const IndexSet& block) {
  const int k = static_cast<int>(block.size());
  require(k <= kQpMaxDim, ErrorCode::DimensionTooLarge,
          "quadratic program limited to " + std::to_string(kQpMaxDim) + " coordinates");

  std::vector<int> all(static_cast<std::size_t>(k));
  for (int p = 0; p < k; ++p) all[static_cast<std::size_t>(p)] = p;

  Candidate best;
  if (try_candidate(m, all, {}, best)) return package(block, best, false);

  std::vector<Candidate> passed;
  const unsigned long limit = 1UL << k;
  for (unsigned long mask = 1; mask + 1 < limit; ++mask) {
    std::vector<int> act, inact;
    for (int p = 0; p < k; ++p) ((mask >> p) & 1UL ? act : inact).push_back(p);
    Candidate c;
    if (try_candidate(m, act, inact, c)) passed.push_back(std::move(c));
  }
  require(!passed.empty(), ErrorCode::NoFeasibleIndexSet,
          "no active set satisfies the optimality conditions for block " + block.to_string());

  // Larger |I| first, then smaller lambda, then lexicographic positions.
  auto key = [](const Candidate& c) { return std::make_tuple(-static_cast<long>(c.active_pos.size()), c.lambda); };
  auto chosen = std::min_element(passed.begin(), passed.end(), [&](const Candidate& a, const Candidate& b) {
    if (key(a) != key(b)) return key(a) < key(b);
    return a.active_pos < b.active_pos;
  });
  return package(block, *chosen, passed.size() > 1);
}

}  // namespace

QPSolution solve_qp(const CorrelationMatrix& sigma) {
  return solve_block(sigma.entries(), IndexSet::full(sigma.dim()));
}

QPSolution solve_qp_subset(const CorrelationMatrix& sigma, const IndexSet& s) {
  require(!s.empty(), ErrorCode::InvalidArgument, "subset must be non-empty");
  s.check_within(sigma.dim());
  if (s.size() == 1) {
    QPSolution sol;
    sol.block = s;
    sol.active = s;
    sol.e_star = {1.0};
    sol.lambda = 1.0;
    sol.h[s[0]] = 1.0;
    return sol;
  }
  return solve_block(sub_block(sigma, s, s), s);
}

}  // namespace elltail
