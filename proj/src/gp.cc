#include "spectral/gp.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "spectral/csv.h"
#include "spectral/errors.h"
#include "spectral/grad_est.h"
#include "spectral/probes.h"
#include "spectral/rng.h"

namespace spectral {
namespace {

Mat squared_distances(const Mat& x) {
  const Index d = x.rows();
  Mat r2(d, d);
  for (Index i = 0; i < d; ++i) {
    r2(i, i) = 0.0;
    for (Index j = i + 1; j < d; ++j) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      r2(i, j) = v;
      r2(j, i) = v;
    }
  }
  return r2;
}

void check_theta(const Vec3& theta) {
  if (!(theta.array() > 0.0).all() || !theta.allFinite()) {
    throw ConfigError("GP hyperparameters must be positive and finite");
  }
}

Eigen::LLT<Mat> cholesky_or_throw(const Mat& a, const Vec3& theta) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "kernel matrix not positive definite at noise theta_1 = " << theta[0]
       << "; try a larger theta_1";
    throw NumericError(os.str());
  }
  return llt;
}

}  // namespace

Mat gp_kernel(const Mat& x, const Vec3& theta) {
  const Mat r2 = squared_distances(x);
  Mat a = theta[1] * theta[1] * (-r2.array() / (2.0 * theta[2] * theta[2])).exp().matrix();
  a.diagonal().array() += theta[0] * theta[0];
  return a;
}

Mat gp_kernel_partial(const Mat& x, const Vec3& theta, int i) {
  const Index d = x.rows();
  if (i == 0) return 2.0 * theta[0] * Mat::Identity(d, d);
  const Mat r2 = squared_distances(x);
  const Mat e = (-r2.array() / (2.0 * theta[2] * theta[2])).exp().matrix();
  if (i == 1) return 2.0 * theta[1] * e;
  if (i == 2) {
    return (theta[1] * theta[1] / (theta[2] * theta[2] * theta[2])) * (e.array() * r2.array()).matrix();
  }
  throw ConfigError("GP hyperparameter index must be 0, 1 or 2");
}

double gp_negloglik_exact(const GPProblem& gp) {
  check_theta(gp.theta);
  const Mat a = gp_kernel(gp.x, gp.theta);
  const auto llt = cholesky_or_throw(a, gp.theta);
  const Vec alpha = llt.solve(gp.y);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double d = static_cast<double>(gp.y.size());
  return 0.5 * gp.y.dot(alpha) + 0.5 * logdet + 0.5 * d * std::log(2.0 * std::numbers::pi);
}

Vec3 gp_gradient_exact(const GPProblem& gp) {
  check_theta(gp.theta);
  const Mat a = gp_kernel(gp.x, gp.theta);
  const auto llt = cholesky_or_throw(a, gp.theta);
  const Vec alpha = llt.solve(gp.y);
  const Mat inv = llt.solve(Mat::Identity(a.rows(), a.cols()));
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    const Mat da = gp_kernel_partial(gp.x, gp.theta, i);
    g[i] = -0.5 * alpha.dot(da * alpha) + 0.5 * (inv.array() * da.array()).sum();
  }
  return g;
}

CGResult conjugate_gradient(const std::function<void(const Vec&, Vec&)>& apply, const Vec& b,
                            double tol, int max_iter) {
  const double bnorm = b.norm();
  Vec x = Vec::Zero(b.size());
  if (bnorm == 0.0) return {x, 0, 0.0};
  Vec r = b;
  Vec p = r;
  Vec ap(b.size());
  double rr = r.squaredNorm();
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw NumericError("conjugate gradient: operator not positive definite");
    const double step = rr / pap;
    x += step * p;
    r -= step * ap;
    const double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= tol * bnorm) return {x, it, std::sqrt(rr_new) / bnorm};
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  std::ostringstream os;
  os << "conjugate gradient did not converge in " << max_iter
     << " iterations; relative residual " << std::sqrt(rr) / bnorm;
  throw NumericError(os.str());
}

struct GPEstimator::State {
  GPProblem gp;
  GPEstimateConfig cfg;
  std::shared_ptr<const Mat> a;
  std::vector<Mat> partials;
  Interval interval{0.0, 1.0};
  std::optional<ChebSeries> series;
  std::optional<DegreeDistribution> dist;
  Vec alpha;
  int cg_iters = 0;
};

GPEstimator::GPEstimator(const GPProblem& gp, const GPEstimateConfig& cfg)
    : st_(std::make_unique<State>()) {
  check_theta(gp.theta);
  State& st = *st_;
  st.gp = gp;
  st.cfg = cfg;
  st.a = std::make_shared<const Mat>(gp_kernel(gp.x, gp.theta));
  const Index d = st.a->rows();
  const MatrixOracle op = dense_oracle(st.a, Interval(0.0, 1.0));
  const double noise = gp.theta[0] * gp.theta[0];
  const double top = power_method_bound(op, cfg.power_iters, 0x6a09e667);
  st.interval = Interval(noise, std::max(top, noise * (1.0 + 1e-3)));
  st.series = resolved_series([](double x) { return std::log(x); }, st.interval, cfg.rel_tol);
  const double rho = cfg.dist.rho ? *cfg.dist.rho : rho_for_real_pole(st.interval, 0.0);
  st.dist = make_distribution(cfg.dist, cfg.N, rho, st.series->degree());
  const Mat& a = *st.a;
  const CGResult cg = conjugate_gradient([&a](const Vec& v, Vec& out) { out.noalias() = a * v; },
                                         gp.y, cfg.cg_tol, static_cast<int>(10 * d));
  st.alpha = cg.x;
  st.cg_iters = cg.iterations;
  for (int i = 0; i < 3; ++i) st.partials.push_back(gp_kernel_partial(gp.x, gp.theta, i));
}

GPEstimator::~GPEstimator() = default;

const Interval& GPEstimator::interval() const { return st_->interval; }

double GPEstimator::negloglik(uint64_t seed) const {
  const State& st = *st_;
  const MatrixOracle op = dense_oracle(st.a, st.interval);
  ProbePlan plan{seed, st.cfg.M, {}};
  const double logdet = estimate_spectral_sum_unbiased(op, *st.series, *st.dist, plan).value;
  const double d = static_cast<double>(st.gp.y.size());
  return 0.5 * st.gp.y.dot(st.alpha) + 0.5 * logdet + 0.5 * d * std::log(2.0 * std::numbers::pi);
}

GPEstimate GPEstimator::gradient(uint64_t seed) const {
  const State& st = *st_;
  const Mat* a = st.a.get();
  const std::vector<Mat>* partials = &st.partials;
  ParamMatrixOracle pm;
  pm.dim = a->rows();
  pm.param_dim = 3;
  pm.theta = st.gp.theta;
  pm.apply = [a](const Vec&, const Vec& v, Vec& out) { out.noalias() = (*a) * v; };
  pm.apply_partial = [partials](Index i, const Vec&, const Vec& v, Vec& out) {
    out.noalias() = (*partials)[i] * v;
  };
  pm.eig_interval = st.interval;
  const GradSample gs = grad_estimate_generic(pm, *st.series, *st.dist, ProbePlan{seed, st.cfg.M, {}});
  GPEstimate est;
  est.degree = gs.degree;
  est.matvecs = gs.matvecs + st.cg_iters + 3;
  for (int i = 0; i < 3; ++i) {
    est.gradient[i] = -0.5 * st.alpha.dot(st.partials[i] * st.alpha) + 0.5 * gs.value(i, 0);
  }
  est.value = std::numeric_limits<double>::quiet_NaN();
  return est;
}

double gp_negloglik_estimate(const GPProblem& gp, const GPEstimateConfig& cfg, uint64_t seed) {
  return GPEstimator(gp, cfg).negloglik(seed);
}

GPEstimate gp_gradient_estimate(const GPProblem& gp, const GPEstimateConfig& cfg, uint64_t seed) {
  return GPEstimator(gp, cfg).gradient(seed);
}

GPTrainResult gp_train(const GPProblem& gp, const GPTrainConfig& cfg) {
  if (cfg.iterations < 1 || cfg.log_every < 1 || cfg.decay_every < 1) {
    throw ConfigError("GP training needs iterations, log_every, decay_every >= 1");
  }
  check_theta(gp.theta);
  GPTrainResult res;
  GPProblem cur = gp;
  Vec3 phi = gp.theta.array().log();
  res.initial_nll = gp_negloglik_exact(cur);
  res.metrics.push_back({0, 0, res.initial_nll, res.initial_nll, 0.0});
  const auto start = std::chrono::steady_clock::now();
  long matvecs = 0;
  for (int t = 0; t < cfg.iterations; ++t) {
    const GPEstimate est =
        gp_gradient_estimate(cur, cfg.est, derive_seed(cfg.seed, static_cast<uint64_t>(t)));
    const Vec3 grad_phi = est.gradient.cwiseProduct(cur.theta);
    if (!grad_phi.allFinite()) {
      throw NumericError("non-finite GP gradient at iteration " + std::to_string(t));
    }
    const double eta = cfg.step * std::pow(cfg.step_decay, t / cfg.decay_every);
    phi -= eta * grad_phi;
    cur.theta = phi.array().exp();
    matvecs += est.matvecs;
    IterationRecord rec;
    rec.phase = "sgd";
    rec.iter = t;
    rec.grad_norm = grad_phi.norm();
    rec.degree_n = est.degree;
    rec.matvecs = matvecs;
    rec.objective_estimate = std::numeric_limits<double>::quiet_NaN();
    rec.wallclock_ms =
        cfg.record_time
            ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
            : 0.0;
    if ((t + 1) % cfg.log_every == 0 || t + 1 == cfg.iterations) {
      const double nll = gp_negloglik_exact(cur);
      rec.objective_estimate = nll;
      res.metrics.push_back({t + 1, matvecs, nll, nll, rec.wallclock_ms});
    }
    res.trajectory.push_back(rec);
  }
  res.theta = cur.theta;
  res.final_nll = gp_negloglik_exact(cur);
  return res;
}

GPProblem synthetic_gp(int d, const Vec3& theta, uint64_t seed, double x_range) {
  if (d < 1) throw ConfigError("GP size must be >= 1");
  check_theta(theta);
  Rng rng(seed);
  GPProblem gp;
  gp.x.resize(d, 1);
  for (int i = 0; i < d; ++i) gp.x(i, 0) = x_range * rng.uniform();
  const Mat a = gp_kernel(gp.x, theta);
  const auto llt = cholesky_or_throw(a, theta);
  Vec z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  gp.y = llt.matrixL() * z;
  gp.theta = theta;
  return gp;
}

GPProblem load_gp_data(const std::string& path, const Vec3& theta0) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open GP data file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    bool ok = true;
    while (ss >> tok) {
      try {
        size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) ok = false;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok || row.size() < 2) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw DataError(path + ":" + std::to_string(line_no) + ": expected numeric columns x... y");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  const Index d = static_cast<Index>(rows.size());
  const Index l = static_cast<Index>(rows.front().size()) - 1;
  GPProblem gp;
  gp.x.resize(d, l);
  gp.y.resize(d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < l; ++j) gp.x(i, j) = rows[i][j];
    gp.y[i] = rows[i][l];
  }
  gp.theta = theta0;
  return gp;
}

void write_gp_data(const GPProblem& gp, std::ostream& out) {
  for (Index i = 0; i < gp.x.rows(); ++i) {
    for (Index j = 0; j < gp.x.cols(); ++j) out << format_double(gp.x(i, j)) << ',';
    out << format_double(gp.y[i]) << '\n';
  }
}

}  // namespace spectral
