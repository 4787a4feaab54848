#include "spectral/probes.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "spectral/errors.h"
#include "spectral/rng.h"

namespace spectral {

MatrixOracle dense_oracle(std::shared_ptr<const Mat> a, const Interval& interval) {
  if (a->rows() != a->cols()) throw ConfigError("dense oracle needs a square matrix");
  const Index d = a->rows();
  return MatrixOracle{d, [a](const Vec& in, Vec& out) { out.noalias() = (*a) * in; },
                      interval};
}

MatrixOracle dense_oracle(const Mat& a, const Interval& interval) {
  return dense_oracle(std::make_shared<const Mat>(a), interval);
}

MatrixOracle sparse_oracle(std::shared_ptr<const SpMat> a, const Interval& interval) {
  if (a->rows() != a->cols()) throw ConfigError("sparse oracle needs a square matrix");
  const Index d = a->rows();
  return MatrixOracle{d, [a](const Vec& in, Vec& out) { out = (*a) * in; }, interval};
}

Vec rademacher_probe(Index dim, uint64_t seed) {
  if (dim < 1) throw ConfigError("probe dimension must be >= 1");
  Rng rng(seed);
  Vec v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = rng.sign();
  return v;
}

Vec plan_probe(const ProbePlan& plan, int k, Index dim) {
  return rademacher_probe(dim, derive_seed(plan.master_seed, static_cast<uint64_t>(k)));
}

int draw_degree(const DegreeDistribution& dist, ProbePlan& plan) {
  if (!plan.degree_sample) {
    Rng rng(derive_seed(plan.master_seed, kDegreeStream));
    plan.degree_sample = sample_degree(dist, rng);
  }
  return *plan.degree_sample;
}

ShiftedOperator::ShiftedOperator(const MatrixOracle& a)
    : a_(a),
      scale_(2.0 / (a.eig_interval.b - a.eig_interval.a)),
      shift_((a.eig_interval.b + a.eig_interval.a) / (a.eig_interval.b - a.eig_interval.a)) {}

void ShiftedOperator::apply(const Vec& in, Vec& out) const {
  a_.apply(in, out);
  out = scale_ * out - shift_ * in;
}

double chebyshev_quadratic_form(const ShiftedOperator& op,
                                const std::vector<double>& coeffs, const Vec& v) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  double acc = coeffs[0] * v.squaredNorm();
  if (n == 0) return acc;
  Vec prev = v;
  Vec cur(v.size());
  op.apply(v, cur);
  acc += coeffs[1] * v.dot(cur);
  Vec next(v.size());
  for (int j = 1; j < n; ++j) {
    op.apply(cur, next);
    next = 2.0 * next - prev;
    acc += coeffs[j + 1] * v.dot(next);
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return acc;
}

namespace {

void check_plan(const ProbePlan& plan) {
  if (plan.M < 1) throw ConfigError("probe count M must be >= 1");
}

void check_interval(const MatrixOracle& a, const ChebSeries& series) {
  if (!series.interval.approx_equal(a.eig_interval)) {
    throw ConfigError("series interval does not match the operator's eigenvalue interval");
  }
}

double probe_average(const MatrixOracle& a, const std::vector<double>& coeffs,
                     const ProbePlan& plan) {
  const ShiftedOperator op(a);
  std::vector<double> per_probe(plan.M);
  for_each_probe(plan.M, [&](int k) {
    per_probe[k] = chebyshev_quadratic_form(op, coeffs, plan_probe(plan, k, a.dim));
  });
  double sum = 0.0;
  for (double x : per_probe) sum += x;
  const double value = sum / plan.M;
  if (!std::isfinite(value)) throw NumericError("spectral-sum estimate is not finite");
  return value;
}

}  // namespace

double estimate_spectral_sum_fixed(const MatrixOracle& a, const ChebSeries& series,
                                   int n, const ProbePlan& plan) {
  check_plan(plan);
  check_interval(a, series);
  if (n < 0 || n > series.degree()) {
    throw ConfigError("degree n outside series degree");
  }
  std::vector<double> coeffs(series.coeffs.begin(), series.coeffs.begin() + n + 1);
  return probe_average(a, coeffs, plan);
}

UnbiasedEstimate estimate_spectral_sum_unbiased(const MatrixOracle& a,
                                                const ChebSeries& series,
                                                const DegreeDistribution& dist,
                                                ProbePlan& plan) {
  check_plan(plan);
  check_interval(a, series);
  const int drawn = draw_degree(dist, plan);
  const int n = std::min(drawn, series.degree());
  const WeightedCoeffs w = weighted_coefficients(series, dist, n);
  return {probe_average(a, w.bhat, plan), drawn};
}

double power_method_bound(const MatrixOracle& a, int iters, uint64_t seed) {
  if (iters < 1) throw ConfigError("power method needs iters >= 1");
  Vec x(a.dim);
  for (uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    for (Index i = 0; i < a.dim; ++i) x[i] = rng.normal();
    if (x.norm() > 0.0) break;
    if (attempt > 64) throw NumericError("power method could not draw a start vector");
  }
  x.normalize();
  Vec y(a.dim);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    a.apply(x, y);
    lambda = x.dot(y) / x.squaredNorm();
    const double ny = y.norm();
    if (!(ny > 0.0)) break;
    x = y / ny;
  }
  if (!std::isfinite(lambda)) throw NumericError("power method diverged");
  return kPowerSafety * lambda;
}

int probe_thread_count() {
  if (const char* env = std::getenv("SPECTRAL_CHEB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void for_each_probe(int count, const std::function<void(int)>& body) {
  const int workers = std::min(probe_thread_count(), count);
  if (workers <= 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      const int begin = static_cast<int>(static_cast<long>(count) * t / workers);
      const int end = static_cast<int>(static_cast<long>(count) * (t + 1) / workers);
      try {
        for (int k = begin; k < end; ++k) body(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace spectral
