#ifndef SPECTRAL_GRAD_EST_H_
#define SPECTRAL_GRAD_EST_H_

#include <functional>
#include <vector>

#include "spectral/chebyshev.h"
#include "spectral/degree_dist.h"
#include "spectral/linalg.h"
#include "spectral/probes.h"

namespace spectral {

// Parametric family A(theta) with derivative matvecs.
struct ParamMatrixOracle {
  Index dim;
  Index param_dim;
  Vec theta;
  std::function<void(const Vec& theta, const Vec& v, Vec& out)> apply;
  std::function<void(Index i, const Vec& theta, const Vec& v, Vec& out)> apply_partial;
  Interval eig_interval{0.0, 1.0};

  // The operator A(theta) at the stored theta.
  MatrixOracle at_theta() const;
};

// A = theta theta^T + epsilon I.
struct LowRankPSD {
  Mat theta;
  double epsilon;

  Index dim() const { return theta.rows(); }
  void apply(const Vec& v, Vec& out) const;
  // sigma_max(theta)^2 + epsilon, from a small dense SVD of theta^T theta.
  double max_eigenvalue() const;
};

struct GradSample {
  Mat value;  // param_dim x 1 (generic) or d x r (low rank)
  ProbePlan plan;
  int degree;
  long matvecs;  // applications of A or dA/dtheta_i
};

// Weight 2 - 1{i=0} of the halved-first-term sums.
inline double halved_first_term_weight(int i) { return i == 0 ? 1.0 : 2.0; }

// Vectors w_j = T_j(A~)v and y_j = U_j(A~)v for j = 0..n.
struct ChebyshevVectors {
  std::vector<Vec> w;
  std::vector<Vec> y;
};

ChebyshevVectors chebyshev_vectors(const std::function<void(const Vec&, Vec&)>& shifted_apply,
                                   const Vec& v, int n);

GradSample grad_estimate_generic(const ParamMatrixOracle& pm, const ChebSeries& series,
                                 const DegreeDistribution& dist, const ProbePlan& plan);

GradSample grad_estimate_lowrank(const LowRankPSD& lr, const ChebSeries& series,
                                 const DegreeDistribution& dist, const ProbePlan& plan);

// Checks y_j against U_j(A~)v evaluated on the eigenbasis and 2 w_j = y_j - y_{j-2}.
bool second_kind_vector_identity_check(const Mat& a, const Interval& interval,
                                       const Vec& v, int n);

// theta -> A(theta) = theta theta^T + eps I as a flattened (column-major)
// parametric family, for cross-checks against the low-rank path.
ParamMatrixOracle lowrank_as_param_oracle(const LowRankPSD& lr, const Interval& interval);

}  // namespace spectral

#endif  // SPECTRAL_GRAD_EST_H_
