#include "spectral/optimize.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "spectral/csv.h"
#include "spectral/errors.h"
#include "spectral/probes.h"
#include "spectral/rng.h"

namespace spectral {
namespace {

constexpr uint64_t kPowerSeed = 0x70a3e5;

void require_finite(const Mat& m, const char* what, long iter) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << "non-finite " << what << " at iteration " << iter;
    throw NumericError(os.str());
  }
}

Mat project(const Objective& obj, const Mat& theta) {
  return obj.projection ? obj.projection(theta) : theta;
}

class Clock {
 public:
  explicit Clock(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

double logged_objective(const Objective& obj, const Mat& theta, uint64_t seed, int probes) {
  double value = obj.g_value ? obj.g_value(theta) : 0.0;
  if (obj.spectral && obj.spectral_weight != 0.0) {
    value += obj.spectral_weight * obj.spectral->estimate_value(theta, seed, probes);
  }
  return value;
}

}  // namespace

DegreeDistribution make_distribution(const DistSpec& spec, int mean_n, double rho,
                                     int series_degree) {
  switch (spec.kind) {
    case DistKind::kOptimal:
      return optimal_distribution(spec.rho.value_or(rho), mean_n);
    case DistKind::kPoisson:
      return poisson_distribution(mean_n, series_degree + 1);
    case DistKind::kNegBinomial:
      return negbinomial_distribution(mean_n, spec.r, series_degree + 1);
    case DistKind::kDeterministic:
      return deterministic_distribution(mean_n);
    case DistKind::kTabulated:
      break;
  }
  throw ConfigError("tabulated distributions cannot be built from a mean alone");
}

LowRankSpectralTerm::LowRankSpectralTerm(ScalarFunction f, double epsilon, DistSpec dist,
                                         double pole, double rel_tol, int power_iters)
    : f_(std::move(f)),
      epsilon_(epsilon),
      spec_(dist),
      pole_(pole),
      rel_tol_(rel_tol),
      power_iters_(power_iters) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

long LowRankSpectralTerm::refresh(const std::vector<Mat>& points, int mean_n) {
  if (points.empty()) throw ConfigError("refresh needs at least one point");
  dim_ = points.front().rows();
  refs_.clear();
  double top = epsilon_ * (1.0 + 1e-3);
  for (const Mat& theta : points) {
    const LowRankPSD lr{theta, epsilon_};
    const MatrixOracle op{dim_, [&lr](const Vec& in, Vec& out) { lr.apply(in, out); },
                          Interval(0.0, 1.0)};
    const double bound = power_method_bound(op, power_iters_, kPowerSeed);
    refs_.emplace_back(theta, std::sqrt(std::max(0.0, bound / kPowerSafety - epsilon_)));
    top = std::max(top, bound);
  }
  rebuild(Interval(epsilon_, top), mean_n);
  return static_cast<long>(points.size()) * power_iters_;
}

void LowRankSpectralTerm::rebuild(const Interval& iv, int mean_n) {
  series_ = resolved_series(f_.value, iv, rel_tol_);
  rho_ = spec_.rho ? *spec_.rho : rho_for_real_pole(iv, pole_);
  dist_ = make_distribution(spec_, mean_n, rho_, series_->degree());
}

long LowRankSpectralTerm::ensure_covers(const Mat& theta, int mean_n) {
  if (covers(theta)) return 0;
  double sigma = std::numeric_limits<double>::infinity();
  for (const auto& [ref, s] : refs_) {
    if (ref.rows() == theta.rows() && ref.cols() == theta.cols()) {
      sigma = std::min(sigma, s + (theta - ref).norm());
    }
  }
  if (!std::isfinite(sigma)) return refresh(theta, mean_n);
  refs_.emplace_back(theta, sigma);
  rebuild(Interval(epsilon_, kPowerSafety * (sigma * sigma + epsilon_)), mean_n);
  return 0;
}

bool LowRankSpectralTerm::covers(const Mat& theta) const {
  if (!series_ || theta.rows() != dim_) return false;
  for (const auto& [ref, sigma] : refs_) {
    if (ref.cols() != theta.cols()) continue;
    const double s = sigma + (theta - ref).norm();
    if (s * s + epsilon_ <= series_->interval.b) return true;
  }
  return false;
}

GradSample LowRankSpectralTerm::sample_gradient(const Mat& theta, const ProbePlan& plan) const {
  return grad_estimate_lowrank(LowRankPSD{theta, epsilon_}, *series_, *dist_, plan);
}

Mat LowRankSpectralTerm::exact_gradient(const Mat& theta) const {
  return exact_spectral_grad(LowRankPSD{theta, epsilon_}, f_.derivative);
}

double LowRankSpectralTerm::exact_value(const Mat& theta) const {
  Mat a = theta * theta.transpose();
  a = 0.5 * (a + a.transpose());
  a.diagonal().array() += epsilon_;
  return exact_spectral_sum(DenseSymmetric(a), f_.value);
}

double LowRankSpectralTerm::estimate_value(const Mat& theta, uint64_t seed, int probes) const {
  const LowRankPSD lr{theta, epsilon_};
  const MatrixOracle op{theta.rows(), [&lr](const Vec& in, Vec& out) { lr.apply(in, out); },
                        series_->interval};
  return estimate_spectral_sum_fixed(op, *series_, series_->degree(), ProbePlan{seed, probes, {}});
}

long LowRankSpectralTerm::exact_gradient_cost() const {
  return static_cast<long>(dim_) * series_->degree();
}

ParamSpectralTerm::ParamSpectralTerm(ScalarFunction f, Index dim, Index param_dim,
                                     ApplyFn apply, PartialFn partial, IntervalFn interval_fn,
                                     DistSpec dist, std::optional<double> pole, double rel_tol)
    : f_(std::move(f)),
      dim_(dim),
      param_dim_(param_dim),
      apply_(std::move(apply)),
      partial_(std::move(partial)),
      interval_fn_(std::move(interval_fn)),
      spec_(dist),
      pole_(pole),
      rel_tol_(rel_tol) {}

ParamMatrixOracle ParamSpectralTerm::oracle(const Vec& theta) const {
  ParamMatrixOracle pm{dim_, param_dim_, theta, apply_, partial_,
                       series_ ? series_->interval : interval_fn_(theta)};
  return pm;
}

long ParamSpectralTerm::refresh(const std::vector<Mat>& points, int mean_n) {
  if (points.empty()) throw ConfigError("refresh needs at least one point");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Mat& theta : points) {
    const Interval one = interval_fn_(theta.reshaped());
    lo = std::min(lo, one.a);
    hi = std::max(hi, one.b);
  }
  rebuild(Interval(lo, hi), mean_n);
  return 0;
}

void ParamSpectralTerm::rebuild(const Interval& iv, int mean_n) {
  series_ = resolved_series(f_.value, iv, rel_tol_);
  double rho;
  if (spec_.rho) {
    rho = *spec_.rho;
  } else if (pole_) {
    rho = rho_for_real_pole(iv, *pole_);
  } else {
    rho = estimate_rho_auto(*series_);
  }
  dist_ = make_distribution(spec_, mean_n, rho, series_->degree());
}

bool ParamSpectralTerm::covers(const Mat& theta) const {
  if (!series_) return false;
  const Interval need = interval_fn_(theta.reshaped());
  return series_->interval.a <= need.a && need.b <= series_->interval.b;
}

long ParamSpectralTerm::ensure_covers(const Mat& theta, int mean_n) {
  if (!series_) return refresh(theta, mean_n);
  const Interval need = interval_fn_(theta.reshaped());
  const Interval& have = series_->interval;
  if (have.a <= need.a && need.b <= have.b) return 0;
  rebuild(Interval(std::min(have.a, need.a), std::max(have.b, need.b)), mean_n);
  return 0;
}

GradSample ParamSpectralTerm::sample_gradient(const Mat& theta, const ProbePlan& plan) const {
  return grad_estimate_generic(oracle(theta.reshaped()), *series_, *dist_, plan);
}

Mat ParamSpectralTerm::exact_gradient(const Mat& theta) const {
  return exact_spectral_grad(oracle(theta.reshaped()), f_.derivative);
}

double ParamSpectralTerm::exact_value(const Mat& theta) const {
  const Vec th = theta.reshaped();
  const Mat a = dense_from_apply(dim_, [&](const Vec& v, Vec& out) { apply_(th, v, out); });
  return exact_spectral_sum(DenseSymmetric(a), f_.value);
}

double ParamSpectralTerm::estimate_value(const Mat& theta, uint64_t seed, int probes) const {
  return estimate_spectral_sum_fixed(oracle(theta.reshaped()).at_theta(), *series_,
                                     series_->degree(), ProbePlan{seed, probes, {}});
}

long ParamSpectralTerm::exact_gradient_cost() const {
  return static_cast<long>(dim_) * series_->degree() * (1 + param_dim_);
}

double Objective::exact_value(const Mat& theta) const {
  double value = g_value ? g_value(theta) : 0.0;
  if (spectral && spectral_weight != 0.0) value += spectral_weight * spectral->exact_value(theta);
  return value;
}

Mat box_projection(const Mat& theta, double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("box projection needs lo < hi");
  return theta.cwiseMax(lo).cwiseMin(hi);
}

double step_size(const SGDConfig& cfg, long t) {
  if (cfg.step_rule == StepRule::kInverseAlphaT) return 1.0 / (cfg.alpha * (t + 1));
  return cfg.initial_step * std::pow(cfg.decay_rate, static_cast<double>(t / cfg.decay_every));
}

OptResult sgd_run(const Objective& obj, const Mat& theta0, const SGDConfig& cfg,
                  const IterationCallback& callback) {
  if (cfg.T < 1 || cfg.M < 1) throw ConfigError("SGD needs T >= 1 and M >= 1");
  if (cfg.step_rule == StepRule::kInverseAlphaT && !(cfg.alpha > 0.0)) {
    throw ConfigError("InverseAlphaT step rule needs alpha > 0");
  }
  if (cfg.decay_every < 1 || cfg.refresh_every < 1) {
    throw ConfigError("decay_every and refresh_every must be >= 1");
  }
  const bool use_spectral = obj.spectral && obj.spectral_weight != 0.0;
  const Clock clock(cfg.record_time);
  OptResult res{theta0, {}, 0};
  res.records.reserve(cfg.T);
  for (long t = 0; t < cfg.T; ++t) {
    Mat grad = obj.g_grad ? obj.g_grad(res.theta) : Mat::Zero(res.theta.rows(), res.theta.cols());
    int degree = 0;
    if (use_spectral) {
      if (t % cfg.refresh_every == 0 || !obj.spectral->ready()) {
        res.matvecs += obj.spectral->refresh(res.theta, cfg.N);
      } else {
        res.matvecs += obj.spectral->ensure_covers(res.theta, cfg.N);
      }
      const ProbePlan plan{derive_seed(cfg.master_seed, static_cast<uint64_t>(t)), cfg.M, {}};
      const GradSample gs = obj.spectral->sample_gradient(res.theta, plan);
      grad += obj.spectral_weight * gs.value;
      degree = gs.degree;
      res.matvecs += gs.matvecs;
    }
    require_finite(grad, "gradient", t);
    res.theta = project(obj, res.theta - step_size(cfg, t) * grad);
    require_finite(res.theta, "iterate", t);
    IterationRecord rec;
    rec.phase = cfg.phase;
    rec.epoch = 0;
    rec.iter = t;
    rec.grad_norm = grad.norm();
    rec.degree_n = degree;
    rec.matvecs = res.matvecs;
    rec.objective_estimate = std::numeric_limits<double>::quiet_NaN();
    if (cfg.log_every > 0 && ((t + 1) % cfg.log_every == 0 || t + 1 == cfg.T)) {
      rec.objective_estimate = logged_objective(obj, res.theta, cfg.eval_seed, cfg.eval_probes);
      if (!std::isfinite(rec.objective_estimate)) {
        throw NumericError("non-finite objective at iteration " + std::to_string(t));
      }
    }
    rec.wallclock_ms = clock.ms();
    if (callback) callback(rec, res.theta);
    res.records.push_back(std::move(rec));
  }
  return res;
}

OptResult svrg_run(const Objective& obj, const Mat& theta0, const SVRGConfig& cfg,
                   const std::function<Mat(const Mat&)>& exact_grad,
                   const IterationCallback& callback) {
  if (cfg.S < 1 || cfg.T < 1 || cfg.M < 1) throw ConfigError("SVRG needs S, T, M >= 1");
  if (!(cfg.eta > 0.0)) throw ConfigError("SVRG needs eta > 0");
  if (!obj.spectral || !exact_grad) throw ConfigError("SVRG needs a spectral term and exact gradient");
  const Clock clock(cfg.record_time);
  OptResult res{theta0, {}, 0};
  Mat snapshot = theta0;
  long iter = 0;
  for (int s = 0; s < cfg.S; ++s) {
    res.matvecs += obj.spectral->refresh(snapshot, cfg.N);
    const Mat mu = exact_grad(snapshot);
    require_finite(mu, "snapshot gradient", iter);
    res.matvecs += obj.spectral->exact_gradient_cost();
    const double eta = cfg.eta * std::pow(cfg.eta_decay, s);
    Mat theta = snapshot;
    Mat sum = Mat::Zero(theta.rows(), theta.cols());
    for (int t = 0; t < cfg.T; ++t, ++iter) {
      const ProbePlan plan{derive_seed(cfg.master_seed, static_cast<uint64_t>(s),
                                       static_cast<uint64_t>(t)),
                           cfg.M, {}};
      res.matvecs += obj.spectral->ensure_covers(theta, cfg.N);
      const GradSample psi = obj.spectral->sample_gradient(theta, plan);
      const GradSample psi_snap = obj.spectral->sample_gradient(snapshot, plan);
      res.matvecs += psi.matvecs + psi_snap.matvecs;
      Mat grad = obj.spectral_weight * (psi.value - psi_snap.value + mu);
      if (obj.g_grad) grad += obj.g_grad(theta);
      require_finite(grad, "gradient", iter);
      theta = project(obj, theta - eta * grad);
      require_finite(theta, "iterate", iter);
      sum += theta;
      IterationRecord rec;
      rec.phase = cfg.phase;
      rec.epoch = s;
      rec.iter = iter;
      rec.grad_norm = grad.norm();
      rec.degree_n = psi.degree;
      rec.matvecs = res.matvecs;
      rec.objective_estimate = std::numeric_limits<double>::quiet_NaN();
      if (cfg.log_every > 0 && ((t + 1) % cfg.log_every == 0 || t + 1 == cfg.T)) {
        rec.objective_estimate = logged_objective(obj, theta, cfg.eval_seed, cfg.eval_probes);
      }
      rec.wallclock_ms = clock.ms();
      if (callback) callback(rec, theta);
      res.records.push_back(std::move(rec));
    }
    snapshot = sum / static_cast<double>(cfg.T);
  }
  res.theta = snapshot;
  return res;
}

void write_trajectory_csv(const std::vector<IterationRecord>& records, std::ostream& out) {
  out << "phase,epoch,iter,objective_estimate,grad_norm,degree_n,wallclock_ms\n";
  for (const auto& r : records) {
    out << r.phase << ',' << r.epoch << ',' << r.iter << ',' << format_double(r.objective_estimate)
        << ',' << format_double(r.grad_norm) << ',' << r.degree_n << ','
        << format_double(r.wallclock_ms) << '\n';
  }
}

}  // namespace spectral
