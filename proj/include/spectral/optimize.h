#ifndef SPECTRAL_OPTIMIZE_H_
#define SPECTRAL_OPTIMIZE_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "spectral/chebyshev.h"
#include "spectral/degree_dist.h"
#include "spectral/grad_est.h"
#include "spectral/linalg.h"
#include "spectral/reference.h"

namespace spectral {

struct DistSpec {
  DistKind kind = DistKind::kOptimal;
  double r = 5.0;              // negative binomial shape
  std::optional<double> rho;   // overrides the term's own rho for Optimal
};

// Builds the degree distribution with mean `mean_n`; tabulated baselines
// cover at least degrees 0..series_degree+1.
DegreeDistribution make_distribution(const DistSpec& spec, int mean_n, double rho,
                                     int series_degree);

// Spectral-sum part tr f(A(theta)) of an objective.
class SpectralTerm {
 public:
  virtual ~SpectralTerm() = default;
  // Re-derives eigenvalue interval, series and distribution so that the
  // interval covers the spectrum at every point. Returns the matvecs spent.
  virtual long refresh(const std::vector<Mat>& points, int mean_n) = 0;
  long refresh(const Mat& theta, int mean_n) { return refresh(std::vector<Mat>{theta}, mean_n); }
  virtual bool ready() const = 0;
  // True when the current interval provably contains the spectrum at theta.
  virtual bool covers(const Mat& theta) const = 0;
  // Widens the interval (never shrinks it) until it covers theta. Returns
  // the matvecs spent.
  virtual long ensure_covers(const Mat& theta, int mean_n) = 0;
  virtual GradSample sample_gradient(const Mat& theta, const ProbePlan& plan) const = 0;
  virtual Mat exact_gradient(const Mat& theta) const = 0;
  virtual double exact_value(const Mat& theta) const = 0;
  // Fixed-degree estimate at the resolved degree with a pinned seed.
  virtual double estimate_value(const Mat& theta, uint64_t seed, int probes) const = 0;
  // Matvec-equivalents charged for one exact gradient: d unit probes at the
  // resolved degree.
  virtual long exact_gradient_cost() const = 0;
  virtual const ChebSeries& series() const = 0;
  virtual const DegreeDistribution& distribution() const = 0;
};

// tr f(theta theta^T + eps I) over d x r matrices theta. Interval
// [eps, 1.1 * power-method estimate]; rho from the real singularity `pole`
// of f unless the DistSpec supplies it. Coverage uses
// sigma_1(theta) <= sigma_1(ref) + ||theta - ref||_F for each refresh point.
class LowRankSpectralTerm : public SpectralTerm {
 public:
  LowRankSpectralTerm(ScalarFunction f, double epsilon, DistSpec dist, double pole = 0.0,
                      double rel_tol = 1e-10, int power_iters = 50);

  using SpectralTerm::refresh;
  long refresh(const std::vector<Mat>& points, int mean_n) override;
  bool ready() const override { return series_.has_value(); }
  bool covers(const Mat& theta) const override;
  // Widens to the guaranteed bound (sigma_1(ref) + ||theta - ref||_F)^2 + eps
  // times the power-method safety factor; no matvecs.
  long ensure_covers(const Mat& theta, int mean_n) override;
  GradSample sample_gradient(const Mat& theta, const ProbePlan& plan) const override;
  Mat exact_gradient(const Mat& theta) const override;
  double exact_value(const Mat& theta) const override;
  double estimate_value(const Mat& theta, uint64_t seed, int probes) const override;
  long exact_gradient_cost() const override;
  const ChebSeries& series() const override { return *series_; }
  const DegreeDistribution& distribution() const override { return *dist_; }
  double rho() const { return rho_; }
  double epsilon() const { return epsilon_; }

 private:
  void rebuild(const Interval& iv, int mean_n);

  ScalarFunction f_;
  double epsilon_;
  DistSpec spec_;
  double pole_;
  double rel_tol_;
  int power_iters_;
  Index dim_ = 0;
  double rho_ = 0.0;
  std::vector<std::pair<Mat, double>> refs_;  // (theta, sigma_1 estimate)
  std::optional<ChebSeries> series_;
  std::optional<DegreeDistribution> dist_;
};

// tr f(A(theta)) for a general parametric family; theta is a column vector
// (param_dim x 1 matrix). The interval is the hull of interval_fn over the
// refresh points; covers() evaluates interval_fn at theta.
class ParamSpectralTerm : public SpectralTerm {
 public:
  using ApplyFn = std::function<void(const Vec& theta, const Vec& v, Vec& out)>;
  using PartialFn = std::function<void(Index i, const Vec& theta, const Vec& v, Vec& out)>;
  using IntervalFn = std::function<Interval(const Vec& theta)>;

  ParamSpectralTerm(ScalarFunction f, Index dim, Index param_dim, ApplyFn apply,
                    PartialFn partial, IntervalFn interval_fn, DistSpec dist,
                    std::optional<double> pole = std::nullopt, double rel_tol = 1e-10);

  using SpectralTerm::refresh;
  long refresh(const std::vector<Mat>& points, int mean_n) override;
  bool ready() const override { return series_.has_value(); }
  bool covers(const Mat& theta) const override;
  long ensure_covers(const Mat& theta, int mean_n) override;
  GradSample sample_gradient(const Mat& theta, const ProbePlan& plan) const override;
  Mat exact_gradient(const Mat& theta) const override;
  double exact_value(const Mat& theta) const override;
  double estimate_value(const Mat& theta, uint64_t seed, int probes) const override;
  long exact_gradient_cost() const override;
  const ChebSeries& series() const override { return *series_; }
  const DegreeDistribution& distribution() const override { return *dist_; }
  ParamMatrixOracle oracle(const Vec& theta) const;

 private:
  void rebuild(const Interval& iv, int mean_n);

  ScalarFunction f_;
  Index dim_;
  Index param_dim_;
  ApplyFn apply_;
  PartialFn partial_;
  IntervalFn interval_fn_;
  DistSpec spec_;
  std::optional<double> pole_;
  double rel_tol_;
  std::optional<ChebSeries> series_;
  std::optional<DegreeDistribution> dist_;
};

struct Objective {
  std::shared_ptr<SpectralTerm> spectral;
  double spectral_weight = 1.0;
  std::function<double(const Mat&)> g_value;
  std::function<Mat(const Mat&)> g_grad;
  std::function<Mat(const Mat&)> projection;  // identity when empty

  // Exact value: weight * exact spectral sum + g.
  double exact_value(const Mat& theta) const;
};

enum class StepRule { kInverseAlphaT, kExpDecay };

struct SGDConfig {
  int T = 100;
  int M = 1;
  int N = 10;
  double alpha = 1.0;
  StepRule step_rule = StepRule::kExpDecay;
  double initial_step = 1e-2;
  double decay_rate = 0.97;
  int decay_every = 1;
  uint64_t master_seed = 0;
  // Interval refresh period; between refreshes the interval is widened
  // whenever it no longer covers the iterate.
  int refresh_every = 100;
  // Objective logging (fixed-degree estimate, pinned seed). 0 disables it.
  int log_every = 0;
  uint64_t eval_seed = 0x5eed;
  int eval_probes = 8;
  bool record_time = false;
  std::string phase = "sgd";
};

struct SVRGConfig {
  int S = 10;
  int T = 100;
  double eta = 1e-2;
  double eta_decay = 1.0;  // per outer epoch
  int M = 1;
  int N = 10;
  uint64_t master_seed = 0;
  int log_every = 0;
  uint64_t eval_seed = 0x5eed;
  int eval_probes = 8;
  bool record_time = false;
  std::string phase = "svrg";
};

struct IterationRecord {
  std::string phase;
  int epoch = 0;
  long iter = 0;
  double objective_estimate = 0.0;  // NaN when not logged
  double grad_norm = 0.0;
  int degree_n = 0;
  double wallclock_ms = 0.0;
  long matvecs = 0;  // cumulative
};

using IterationCallback = std::function<void(const IterationRecord&, const Mat& theta)>;

struct OptResult {
  Mat theta;
  std::vector<IterationRecord> records;
  long matvecs = 0;
};

Mat box_projection(const Mat& theta, double lo, double hi);

double step_size(const SGDConfig& cfg, long t);

OptResult sgd_run(const Objective& obj, const Mat& theta0, const SGDConfig& cfg,
                  const IterationCallback& callback = {});

// exact_grad supplies the spectral gradient at the snapshot (weight not applied).
OptResult svrg_run(const Objective& obj, const Mat& theta0, const SVRGConfig& cfg,
                   const std::function<Mat(const Mat&)>& exact_grad,
                   const IterationCallback& callback = {});

// Columns phase, epoch, iter, objective_estimate, grad_norm, degree_n, wallclock_ms.
void write_trajectory_csv(const std::vector<IterationRecord>& records, std::ostream& out);

}  // namespace spectral

#endif  // SPECTRAL_OPTIMIZE_H_
