#ifndef SPECTRAL_GP_H_
#define SPECTRAL_GP_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spectral/completion.h"
#include "spectral/linalg.h"
#include "spectral/optimize.h"

namespace spectral {

using Vec3 = Eigen::Vector3d;

// Inputs are the rows of x; theta = (noise, scale, lengthscale).
struct GPProblem {
  Mat x;
  Vec y;
  Vec3 theta;
};

// theta_2^2 exp(-|x_i - x_j|^2 / (2 theta_3^2)) + theta_1^2 I.
Mat gp_kernel(const Mat& x, const Vec3& theta);
// dA/dtheta_i, i in {0, 1, 2}.
Mat gp_kernel_partial(const Mat& x, const Vec3& theta, int i);

// Cholesky evaluation; NumericError when the kernel is not positive definite.
double gp_negloglik_exact(const GPProblem& gp);
Vec3 gp_gradient_exact(const GPProblem& gp);

struct CGResult {
  Vec x;
  int iterations;
  double residual;  // relative residual norm
};

// Throws NumericError reporting the residual if tol is not reached.
CGResult conjugate_gradient(const std::function<void(const Vec&, Vec&)>& apply, const Vec& b,
                            double tol, int max_iter);

struct GPEstimateConfig {
  int M = 1;
  int N = 15;
  DistSpec dist;
  double cg_tol = 1e-8;
  double rel_tol = 1e-10;
  int power_iters = 50;
};

struct GPEstimate {
  double value;
  Vec3 gradient;  // natural parameters
  int degree;
  long matvecs;
};

// Estimation mode at a fixed theta: CG solve for the data term, unbiased
// randomized Chebyshev estimators for the log-determinant and its gradient.
// Construction does the per-theta work (kernel, interval, series, solve);
// each call draws one sample.
class GPEstimator {
 public:
  GPEstimator(const GPProblem& gp, const GPEstimateConfig& cfg);
  ~GPEstimator();
  GPEstimator(const GPEstimator&) = delete;
  GPEstimator& operator=(const GPEstimator&) = delete;

  double negloglik(uint64_t seed) const;
  GPEstimate gradient(uint64_t seed) const;
  const Interval& interval() const;

 private:
  struct State;
  std::unique_ptr<State> st_;
};

double gp_negloglik_estimate(const GPProblem& gp, const GPEstimateConfig& cfg, uint64_t seed);
GPEstimate gp_gradient_estimate(const GPProblem& gp, const GPEstimateConfig& cfg, uint64_t seed);

struct GPTrainConfig {
  GPEstimateConfig est;
  int iterations = 200;
  double step = 0.05;
  double step_decay = 0.97;
  int decay_every = 10;
  uint64_t seed = 0;
  int log_every = 1;
  bool record_time = false;
};

struct GPTrainResult {
  Vec3 theta;
  double initial_nll;
  double final_nll;
  std::vector<MetricsRow> metrics;  // rmse_or_nll holds the exact NLL
  std::vector<IterationRecord> trajectory;
};

// SGD on log(theta).
GPTrainResult gp_train(const GPProblem& gp, const GPTrainConfig& cfg);

// d points uniform on [0, x_range] with y drawn from the GP prior at theta.
GPProblem synthetic_gp(int d, const Vec3& theta, uint64_t seed, double x_range = 10.0);

// Rows "x_1 .. x_l y" separated by commas or whitespace; an optional
// non-numeric header line is skipped.
GPProblem load_gp_data(const std::string& path, const Vec3& theta0);
void write_gp_data(const GPProblem& gp, std::ostream& out);

}  // namespace spectral

#endif  // SPECTRAL_GP_H_
