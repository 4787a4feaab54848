#include "spectral/grad_est.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectral/errors.h"

namespace spectral {
namespace {

void check_finite(const Mat& m, int probe, int degree) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << "non-finite gradient intermediate at probe " << probe << ", degree " << degree;
    throw NumericError(os.str());
  }
}

Mat ordered_mean(const std::vector<Mat>& parts) {
  Mat sum = parts.front();
  for (size_t k = 1; k < parts.size(); ++k) sum += parts[k];
  return sum / static_cast<double>(parts.size());
}

std::vector<double> bhat_for(const ChebSeries& series, const DegreeDistribution& dist,
                             ProbePlan& plan) {
  const int drawn = draw_degree(dist, plan);
  return weighted_coefficients(series, dist, std::min(drawn, series.degree())).bhat;
}

}  // namespace

MatrixOracle ParamMatrixOracle::at_theta() const {
  auto fn = apply;
  Vec th = theta;
  return MatrixOracle{dim, [fn, th](const Vec& in, Vec& out) { fn(th, in, out); },
                      eig_interval};
}

void LowRankPSD::apply(const Vec& v, Vec& out) const {
  out.noalias() = theta * (theta.transpose() * v);
  out += epsilon * v;
}

double LowRankPSD::max_eigenvalue() const {
  if (theta.cols() == 0) return epsilon;
  Eigen::SelfAdjointEigenSolver<Mat> es(theta.transpose() * theta, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff()) + epsilon;
}

ChebyshevVectors chebyshev_vectors(const std::function<void(const Vec&, Vec&)>& shifted_apply,
                                   const Vec& v, int n) {
  ChebyshevVectors cv;
  cv.w.reserve(n + 1);
  cv.y.reserve(n + 1);
  cv.w.push_back(v);
  cv.y.push_back(v);
  if (n >= 1) {
    Vec av(v.size());
    shifted_apply(v, av);
    cv.w.push_back(av);
    cv.y.push_back(2.0 * av);
  }
  Vec tmp(v.size());
  for (int j = 1; j < n; ++j) {
    shifted_apply(cv.w[j], tmp);
    cv.w.push_back(2.0 * tmp - cv.w[j - 1]);
    cv.y.push_back(2.0 * cv.w[j + 1] + cv.y[j - 1]);
  }
  return cv;
}

GradSample grad_estimate_generic(const ParamMatrixOracle& pm, const ChebSeries& series,
                                 const DegreeDistribution& dist, const ProbePlan& plan_in) {
  if (plan_in.M < 1) throw ConfigError("probe count M must be >= 1");
  if (!series.interval.approx_equal(pm.eig_interval)) {
    throw ConfigError("series interval does not match the family's eigenvalue interval");
  }
  ProbePlan plan = plan_in;
  const std::vector<double> bhat = bhat_for(series, dist, plan);
  const int n = static_cast<int>(bhat.size()) - 1;
  const Interval& iv = series.interval;
  const double c = 2.0 / (iv.b - iv.a);
  const double s = (iv.b + iv.a) / (iv.b - iv.a);
  const Vec& th = pm.theta;
  auto shifted = [&](const Vec& in, Vec& out) {
    pm.apply(th, in, out);
    out = c * out - s * in;
  };
  std::vector<Mat> per_probe(plan.M);
  for_each_probe(plan.M, [&](int k) {
    const Vec v = plan_probe(plan, k, pm.dim);
    // Only w_0..w_{n-1} feed the derivative recursion.
    const ChebyshevVectors cv = chebyshev_vectors(shifted, v, std::max(n - 1, 0));
    Mat g = Mat::Zero(pm.param_dim, 1);
    Vec prev(pm.dim), cur(pm.dim), next(pm.dim), tmp(pm.dim);
    for (Index i = 0; i < pm.param_dim && n >= 1; ++i) {
      prev.setZero();
      pm.apply_partial(i, th, v, cur);
      cur *= c;
      double acc = bhat[1] * v.dot(cur);
      for (int j = 1; j < n; ++j) {
        pm.apply_partial(i, th, cv.w[j], next);
        shifted(cur, tmp);
        next = 2.0 * c * next + 2.0 * tmp - prev;
        acc += bhat[j + 1] * v.dot(next);
        std::swap(prev, cur);
        std::swap(cur, next);
      }
      g(i, 0) = acc;
    }
    check_finite(g, k, n);
    per_probe[k] = std::move(g);
  });
  const long per = std::max(n - 1, 0) + pm.param_dim * (n + std::max(n - 1, 0));
  return GradSample{ordered_mean(per_probe), plan, *plan.degree_sample, per * plan.M};
}

GradSample grad_estimate_lowrank(const LowRankPSD& lr, const ChebSeries& series,
                                 const DegreeDistribution& dist, const ProbePlan& plan_in) {
  if (plan_in.M < 1) throw ConfigError("probe count M must be >= 1");
  if (!(lr.epsilon > 0.0)) throw ConfigError("low-rank shift epsilon must be > 0");
  if (series.interval.a > lr.epsilon * (1.0 + 1e-12)) {
    throw ConfigError("series interval does not cover epsilon");
  }
  ProbePlan plan = plan_in;
  const std::vector<double> bhat = bhat_for(series, dist, plan);
  const int n = static_cast<int>(bhat.size()) - 1;
  const Interval& iv = series.interval;
  const double c = 2.0 / (iv.b - iv.a);
  const double s = (iv.b + iv.a) / (iv.b - iv.a);
  auto shifted = [&](const Vec& in, Vec& out) {
    lr.apply(in, out);
    out = c * out - s * in;
  };
  const Index d = lr.dim();
  const Index r = lr.theta.cols();
  std::vector<Mat> per_probe(plan.M);
  for_each_probe(plan.M, [&](int k) {
    const Vec v = plan_probe(plan, k, d);
    Mat g = Mat::Zero(d, r);
    if (n >= 1) {
      const ChebyshevVectors cv = chebyshev_vectors(shifted, v, n - 1);
      Vec z(d);
      for (int i = 0; i <= n - 1; ++i) {
        z.setZero();
        for (int j = i; j <= n - 1; ++j) z += bhat[j + 1] * cv.y[j - i];
        const Eigen::RowVectorXd zt_theta = z.transpose() * lr.theta;
        g.noalias() += halved_first_term_weight(i) * cv.w[i] * zt_theta;
      }
      g *= 2.0 * c;
    }
    check_finite(g, k, n);
    per_probe[k] = std::move(g);
  });
  return GradSample{ordered_mean(per_probe), plan, *plan.degree_sample,
                    static_cast<long>(std::max(n - 1, 0)) * plan.M};
}

bool second_kind_vector_identity_check(const Mat& a, const Interval& interval,
                                       const Vec& v, int n) {
  if (n > 64) throw ConfigError("identity check supports n <= 64");
  const double c = 2.0 / (interval.b - interval.a);
  const double s = (interval.b + interval.a) / (interval.b - interval.a);
  const Mat shifted = c * a - s * Mat::Identity(a.rows(), a.cols());
  const ChebyshevVectors cv = chebyshev_vectors(
      [&](const Vec& in, Vec& out) { out.noalias() = shifted * in; }, v, n);
  Eigen::SelfAdjointEigenSolver<Mat> es(shifted);
  const Mat& q = es.eigenvectors();
  const Vec qv = q.transpose() * v;
  constexpr double kTol = 1e-9;
  for (int j = 0; j <= n; ++j) {
    Vec u(qv.size());
    for (Index i = 0; i < qv.size(); ++i) u[i] = eval_U(j, es.eigenvalues()[i]) * qv[i];
    const Vec expected = q * u;
    const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
    if ((cv.y[j] - expected).cwiseAbs().maxCoeff() > kTol * scale) return false;
    if (j >= 2) {
      const Vec lhs = 2.0 * cv.w[j];
      const Vec rhs = cv.y[j] - cv.y[j - 2];
      if ((lhs - rhs).cwiseAbs().maxCoeff() > kTol * scale) return false;
    }
  }
  return true;
}

ParamMatrixOracle lowrank_as_param_oracle(const LowRankPSD& lr, const Interval& interval) {
  const Index d = lr.theta.rows();
  const Index r = lr.theta.cols();
  const double eps = lr.epsilon;
  auto as_mat = [d, r](const Vec& th) { return Eigen::Map<const Mat>(th.data(), d, r); };
  ParamMatrixOracle pm;
  pm.dim = d;
  pm.param_dim = d * r;
  pm.theta = Eigen::Map<const Vec>(lr.theta.data(), d * r);
  pm.apply = [=](const Vec& th, const Vec& v, Vec& out) {
    const auto t = as_mat(th);
    out.noalias() = t * (t.transpose() * v);
    out += eps * v;
  };
  // d(theta theta^T)/d theta_{pq} = e_p theta_q^T + theta_q e_p^T.
  pm.apply_partial = [=](Index idx, const Vec& th, const Vec& v, Vec& out) {
    const auto t = as_mat(th);
    const Index p = idx % d;
    const Index q = idx / d;
    out = t.col(q) * v[p];
    out[p] += t.col(q).dot(v);
  };
  pm.eig_interval = interval;
  return pm;
}

}  // namespace spectral
