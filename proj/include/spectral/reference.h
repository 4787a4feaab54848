#ifndef SPECTRAL_REFERENCE_H_
#define SPECTRAL_REFERENCE_H_

#include <functional>
#include <string>

#include "spectral/grad_est.h"
#include "spectral/linalg.h"

namespace spectral {

// Dense symmetric matrix for brute-force oracles (d <= 512).
struct DenseSymmetric {
  Mat entries;

  explicit DenseSymmetric(Mat m);
  Index dim() const { return entries.rows(); }
};

struct ScalarFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

ScalarFunction log_function();
ScalarFunction sqrt_function();
ScalarFunction exp_function();
// f(x) = sum_k c_k x^k.
ScalarFunction polynomial_function(std::vector<double> monomial_coeffs);

// f applied to the spectrum: Q f(Lambda) Q^T.
Mat dense_matrix_function(const DenseSymmetric& a, const std::function<double(double)>& f);

double exact_spectral_sum(const DenseSymmetric& a, const std::function<double(double)>& f);

// Materializes A(theta) from matvecs with unit vectors.
Mat dense_from_apply(Index dim, const std::function<void(const Vec&, Vec&)>& apply);

// tr(f'(A) dA/dtheta_i) per coordinate.
Vec exact_spectral_grad(const ParamMatrixOracle& pm, const std::function<double(double)>& fprime);
// 2 f'(A) theta for A = theta theta^T + eps I.
Mat exact_spectral_grad(const LowRankPSD& lr, const std::function<double(double)>& fprime);

// Perturbation bounds for T_i and U_i in spectral and Frobenius norms, for
// symmetric A, E with spectra of A and A+E inside [-1, 1].
bool chebyshev_perturbation_check(const Mat& a, const Mat& e, int i_max);

// tr(AB) <= ||A||_nuc ||B||_2 for symmetric A, B.
bool trace_nuclear_check(const Mat& a, const Mat& b);

}  // namespace spectral

#endif  // SPECTRAL_REFERENCE_H_
