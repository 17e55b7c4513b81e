#pragma once

// Multivariate regular variation on the sub-cones E_d^(i): indices, scaling
// functions and limit-measure values on tail sets.

#include <vector>

#include "elltail/asymptote.hpp"

namespace elltail {

// Relative tolerance for lambda ties when collecting the minimizing family.
inline constexpr double kMrvLambdaTolerance = 1e-9;

// log b_i^{<-}(t) = log_const + logt_power * log(alpha log t / L) + b_inv_power * log(t^alpha l(t)).
struct BInverseDescriptor {
  double log_const = 0;
  double logt_power = 0;
  double b_inv_power = 1;

  double log_value(double t, double alpha, double L, const SlowlyVarying& ell) const;
};

struct MrvIndexReport {
  int i = 1;
  double lambda_i = 1;
  double alpha_i = 0;
  std::vector<IndexSet> family;  // S_i, sorted
  IndexSet argmin_set;           // S in S_i whose active set is I_i
  IndexSet active_set;           // I_i
  BInverseDescriptor b_inv;
};

MrvIndexReport mrv_index(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins, int i);

// sum_j x_j^{-alpha}
double nu_1(const Vector& x, double alpha);

// nu_i(A_{x_S}); exactly zero off the family or when |I_S| != |I_i|.
double nu_i(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins, int i,
            const TailQuery& query, const OrthantOptions& options = {});

struct ConsistencyReport {
  std::vector<double> t;
  // b_i^{<-}(t) P(X in t A) / nu_i(A); on the zero branch the un-normalized product.
  std::vector<double> ratio;
  // Same with the un-expanded joint tail.
  std::vector<double> ratio_unexpanded;
  double limit = 0;
  bool zero_branch = false;
  // |ratio - 1| non-increasing (nonzero branch) or ratio non-increasing to below its start (zero branch).
  bool monotone = false;
  // The same test applied to ratio_unexpanded.
  bool monotone_unexpanded = false;
};

ConsistencyReport consistency_check(const CorrelationMatrix& sigma, const RadialLaw& law, const MarginSpec& margins,
                                    int i, const TailQuery& query, const OrthantOptions& options = {});

}  // namespace elltail
