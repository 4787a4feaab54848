#ifndef SPECTRAL_TESTS_FIXTURES_H_
#define SPECTRAL_TESTS_FIXTURES_H_

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "spectral/optimize.h"
#include "spectral/reference.h"

namespace spectral::testing {

// Strongly convex quadratic with a stochastic spectral part:
//   F(theta) = 1/2 tr A(theta)^2 + ||theta - 1||^2,
//   A(theta) = 5 I + sum_i theta_i B_i,
// where the B_i are symmetric off-diagonal pairs with tr(B_i B_j) = delta_ij.
// The Hessian is 3 I, so alpha = 3 and theta* = 2/3 in every coordinate.
struct QuadraticFixture {
  Objective objective;
  Mat theta_star;
  double alpha;
  Index param_dim;
};

inline QuadraticFixture make_quadratic_fixture() {
  const Index d = 5;
  const std::vector<std::pair<int, int>> pairs = {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {1, 4}};
  auto bs = std::make_shared<std::vector<Mat>>();
  for (auto [i, j] : pairs) {
    Mat b = Mat::Zero(d, d);
    b(i, j) = b(j, i) = 1.0 / std::sqrt(2.0);
    bs->push_back(b);
  }
  const Index p = static_cast<Index>(bs->size());
  auto apply = [bs](const Vec& th, const Vec& v, Vec& out) {
    out = 5.0 * v;
    for (size_t i = 0; i < bs->size(); ++i) out.noalias() += th[i] * ((*bs)[i] * v);
  };
  auto partial = [bs](Index i, const Vec&, const Vec& v, Vec& out) { out.noalias() = (*bs)[i] * v; };
  DistSpec dist{DistKind::kDeterministic, 5.0, 2.0};
  auto term = std::make_shared<ParamSpectralTerm>(
      polynomial_function({0.0, 0.0, 0.5}), d, p, apply, partial,
      [](const Vec&) { return Interval(0.0, 10.0); }, dist);
  Objective obj;
  obj.spectral = term;
  obj.g_value = [](const Mat& th) { return (th.array() - 1.0).square().sum(); };
  obj.g_grad = [](const Mat& th) { return Mat(2.0 * (th.array() - 1.0)); };
  return {obj, Mat::Constant(p, 1, 2.0 / 3.0), 3.0, p};
}

// Mean squared distance to theta* after T steps of eta_t = 1/(alpha t),
// over `seeds` independent runs started at theta = 0.
inline double quadratic_sgd_error(const QuadraticFixture& fx, int T, int seeds) {
  double acc = 0.0;
  for (int s = 0; s < seeds; ++s) {
    SGDConfig cfg;
    cfg.T = T;
    cfg.M = 1;
    cfg.N = 2;
    cfg.alpha = fx.alpha;
    cfg.step_rule = StepRule::kInverseAlphaT;
    cfg.master_seed = 1000 + s;
    cfg.refresh_every = T;
    const auto res = sgd_run(fx.objective, Mat::Zero(fx.param_dim, 1), cfg);
    acc += (res.theta - fx.theta_star).squaredNorm();
  }
  return acc / seeds;
}

// R^2 of log(err) against the one-parameter model log c - log T.
inline double inverse_t_fit_r2(const std::vector<int>& ts, const std::vector<double>& errs) {
  double logc = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) logc += std::log(errs[i]) + std::log(ts[i]);
  logc /= ts.size();
  double mean = 0.0;
  for (double e : errs) mean += std::log(e);
  mean /= errs.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    const double y = std::log(errs[i]);
    const double fit = logc - std::log(ts[i]);
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - mean) * (y - mean);
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace spectral::testing

#endif  // SPECTRAL_TESTS_FIXTURES_H_
