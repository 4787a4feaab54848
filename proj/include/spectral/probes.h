#ifndef SPECTRAL_PROBES_H_
#define SPECTRAL_PROBES_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "spectral/chebyshev.h"
#include "spectral/degree_dist.h"
#include "spectral/linalg.h"

namespace spectral {

// Symmetric linear operator known only through matrix-vector products.
struct MatrixOracle {
  Index dim;
  std::function<void(const Vec& in, Vec& out)> apply;
  Interval eig_interval;
};

MatrixOracle dense_oracle(std::shared_ptr<const Mat> a, const Interval& interval);
MatrixOracle dense_oracle(const Mat& a, const Interval& interval);
MatrixOracle sparse_oracle(std::shared_ptr<const SpMat> a, const Interval& interval);

// Randomness of one estimator evaluation. Probe k uses the stream
// derive_seed(master_seed, k); the degree uses a separate stream.
struct ProbePlan {
  uint64_t master_seed = 0;
  int M = 1;
  std::optional<int> degree_sample;
};

inline constexpr uint64_t kDegreeStream = ~uint64_t{0};
inline constexpr double kPowerSafety = 1.1;

Vec rademacher_probe(Index dim, uint64_t seed);
Vec plan_probe(const ProbePlan& plan, int k, Index dim);

// Returns plan.degree_sample, drawing and storing it first if absent.
int draw_degree(const DegreeDistribution& dist, ProbePlan& plan);

// Applies A~ = (2A - (b+a)I)/(b-a) through the oracle.
class ShiftedOperator {
 public:
  explicit ShiftedOperator(const MatrixOracle& a);
  void apply(const Vec& in, Vec& out) const;
  Index dim() const { return a_.dim; }
  double scale() const { return scale_; }

 private:
  const MatrixOracle& a_;
  double scale_;
  double shift_;
};

// v^T sum_j c_j T_j(A~) v with exactly coeffs.size()-1 matvecs.
double chebyshev_quadratic_form(const ShiftedOperator& op,
                                const std::vector<double>& coeffs, const Vec& v);

double estimate_spectral_sum_fixed(const MatrixOracle& a, const ChebSeries& series,
                                   int n, const ProbePlan& plan);

struct UnbiasedEstimate {
  double value;
  int degree;
};

// plan.degree_sample is drawn (and recorded) when absent.
UnbiasedEstimate estimate_spectral_sum_unbiased(const MatrixOracle& a,
                                                const ChebSeries& series,
                                                const DegreeDistribution& dist,
                                                ProbePlan& plan);

// Rayleigh-quotient estimate of the dominant eigenvalue times kPowerSafety.
// The oracle's eig_interval is not used.
double power_method_bound(const MatrixOracle& a, int iters, uint64_t seed);

// Worker count for probe loops: SPECTRAL_CHEB_THREADS if set, otherwise the
// hardware concurrency.
int probe_thread_count();

// Runs body(k) for k in [0, count), possibly in parallel. Each k must write
// only to its own output slot.
void for_each_probe(int count, const std::function<void(int)>& body);

}  // namespace spectral

#endif  // SPECTRAL_PROBES_H_
