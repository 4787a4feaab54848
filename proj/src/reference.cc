#include "spectral/reference.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectral/errors.h"
#include "spectral/matrix_io.h"

namespace spectral {
namespace {

Eigen::SelfAdjointEigenSolver<Mat> eigen_or_throw(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
  return es;
}

double spectral_norm_sym(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double cheb_t_trig(int i, double x) { return std::cos(i * std::acos(x)); }

double cheb_u_trig(int i, double x) {
  if (x >= 1.0) return i + 1.0;
  if (x <= -1.0) return (i % 2 == 0 ? 1.0 : -1.0) * (i + 1.0);
  const double phi = std::acos(x);
  return std::sin((i + 1) * phi) / std::sin(phi);
}

Mat on_eigenbasis(const Eigen::SelfAdjointEigenSolver<Mat>& es,
                  const std::function<double(double)>& f) {
  Vec fl = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * fl.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

DenseSymmetric::DenseSymmetric(Mat m) : entries(std::move(m)) {
  if (entries.rows() != entries.cols()) throw ConfigError("matrix is not square");
  if (entries.rows() > 512) throw ConfigError("dense oracle limited to d <= 512");
  if (!is_symmetric(entries, 1e-12)) throw ConfigError("matrix is not symmetric");
}

ScalarFunction log_function() {
  return {"log", [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; }};
}

ScalarFunction sqrt_function() {
  return {"sqrt", [](double x) { return std::sqrt(x); },
          [](double x) { return 0.5 / std::sqrt(x); }};
}

ScalarFunction exp_function() {
  return {"exp", [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); }};
}

ScalarFunction polynomial_function(std::vector<double> c) {
  auto value = [c](double x) {
    double acc = 0.0;
    for (size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
  };
  auto derivative = [c](double x) {
    double acc = 0.0;
    for (size_t k = c.size(); k-- > 1;) acc = acc * x + k * c[k];
    return acc;
  };
  return {"poly", value, derivative};
}

Mat dense_matrix_function(const DenseSymmetric& a, const std::function<double(double)>& f) {
  return on_eigenbasis(eigen_or_throw(a.entries), f);
}

double exact_spectral_sum(const DenseSymmetric& a, const std::function<double(double)>& f) {
  const auto es = eigen_or_throw(a.entries);
  double sum = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = f(es.eigenvalues()[i]);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "f is not finite at eigenvalue " << es.eigenvalues()[i];
      throw DomainError(os.str());
    }
    sum += v;
  }
  return sum;
}

Mat dense_from_apply(Index dim, const std::function<void(const Vec&, Vec&)>& apply) {
  Mat m(dim, dim);
  Vec e = Vec::Zero(dim);
  Vec col(dim);
  for (Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e, col);
    m.col(j) = col;
    e[j] = 0.0;
  }
  return 0.5 * (m + m.transpose());
}

Vec exact_spectral_grad(const ParamMatrixOracle& pm, const std::function<double(double)>& fprime) {
  const Mat a = dense_from_apply(pm.dim, [&](const Vec& v, Vec& out) { pm.apply(pm.theta, v, out); });
  const Mat fp = on_eigenbasis(eigen_or_throw(a), fprime);
  Vec g(pm.param_dim);
  for (Index i = 0; i < pm.param_dim; ++i) {
    const Mat da = dense_from_apply(
        pm.dim, [&](const Vec& v, Vec& out) { pm.apply_partial(i, pm.theta, v, out); });
    g[i] = (fp.array() * da.array()).sum();
  }
  return g;
}

Mat exact_spectral_grad(const LowRankPSD& lr, const std::function<double(double)>& fprime) {
  const Mat a = lr.theta * lr.theta.transpose() +
                lr.epsilon * Mat::Identity(lr.dim(), lr.dim());
  return 2.0 * on_eigenbasis(eigen_or_throw(0.5 * (a + a.transpose())), fprime) * lr.theta;
}

bool chebyshev_perturbation_check(const Mat& a, const Mat& e, int i_max) {
  if (i_max > 40) throw ConfigError("perturbation check supports i_max <= 40");
  const Mat ae = a + e;
  const auto es_a = eigen_or_throw(a);
  const auto es_ae = eigen_or_throw(ae);
  constexpr double kSpecTol = 1e-12;
  if (es_a.eigenvalues().cwiseAbs().maxCoeff() > 1.0 + kSpecTol ||
      es_ae.eigenvalues().cwiseAbs().maxCoeff() > 1.0 + kSpecTol) {
    throw ConfigError("spectra of A and A+E must lie in [-1, 1]");
  }
  auto clamp = [](double x) { return std::clamp(x, -1.0, 1.0); };
  const double e2 = spectral_norm_sym(e);
  const double ef = e.norm();
  for (int i = 0; i <= i_max; ++i) {
    const Mat dt = on_eigenbasis(es_ae, [&](double x) { return cheb_t_trig(i, clamp(x)); }) -
                   on_eigenbasis(es_a, [&](double x) { return cheb_t_trig(i, clamp(x)); });
    const Mat du = on_eigenbasis(es_ae, [&](double x) { return cheb_u_trig(i, clamp(x)); }) -
                   on_eigenbasis(es_a, [&](double x) { return cheb_u_trig(i, clamp(x)); });
    const double ct = static_cast<double>(i) * i;
    const double cu = i * (i + 1.0) * (i + 2.0) / 3.0;
    // Rounding slack proportional to the magnitude of the evaluated polynomials.
    const double slack_t = 1e-10;
    const double slack_u = 1e-10 * (i + 1.0);
    if (spectral_norm_sym(dt) > ct * e2 + slack_t) return false;
    if (spectral_norm_sym(du) > cu * e2 + slack_u) return false;
    if (dt.norm() > ct * ef + slack_t * a.rows()) return false;
    if (du.norm() > cu * ef + slack_u * a.rows()) return false;
  }
  return true;
}

bool trace_nuclear_check(const Mat& a, const Mat& b) {
  Eigen::SelfAdjointEigenSolver<Mat> ea(a, Eigen::EigenvaluesOnly);
  const double nuc = ea.eigenvalues().cwiseAbs().sum();
  const double lhs = (a.array() * b.transpose().array()).sum();
  const double rhs = nuc * spectral_norm_sym(b);
  return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}

}  // namespace spectral
