#ifndef SPECTRAL_CHEBYSHEV_H_
#define SPECTRAL_CHEBYSHEV_H_

#include <functional>
#include <optional>
#include <vector>

namespace spectral {

// Closed interval [a, b] assumed to contain the spectrum of an operator.
struct Interval {
  double a;
  double b;

  Interval(double lo, double hi);

  double center() const { return 0.5 * (b + a); }
  double half_width() const { return 0.5 * (b - a); }
  bool contains(double x) const { return x >= a && x <= b; }
  // Affine maps between [a, b] and [-1, 1].
  double to_unit(double x) const { return (2.0 * x - (b + a)) / (b - a); }
  double from_unit(double t) const { return half_width() * t + center(); }
  bool approx_equal(const Interval& o, double rel_tol = 1e-12) const;
};

// f is analytic inside the Bernstein ellipse with parameter rho and bounded
// there by bigU in magnitude.
struct AnalyticitySpec {
  double rho;
  double bigU;

  AnalyticitySpec(double rho_in, double bigU_in);
};

struct ChebSeries {
  Interval interval;
  std::vector<double> coeffs;
  std::optional<AnalyticitySpec> spec;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  // Throws ConfigError if coeffs is empty or violates the decay bound of spec.
  void validate() const;
};

using ScalarFn = std::function<double(double)>;

int default_quad_nodes(int degree);

// Chebyshev-Gauss quadrature of the coefficient integrals. quad_nodes = 0
// selects default_quad_nodes(degree).
ChebSeries compute_coefficients(const ScalarFn& f, const Interval& interval,
                                int degree, int quad_nodes = 0);

double eval_T(int j, double x);
double eval_U(int j, double x);

// Clenshaw evaluation; x must lie in series.interval.
double eval_series(const ChebSeries& series, double x);
// Same, on the unit variable t in [-1, 1] without domain checks.
double eval_series_unit(const std::vector<double>& coeffs, double t);

double truncation_error_bound(const AnalyticitySpec& spec, int n);

// exp(-slope) of the least-squares line through log|b_j|, j in [j_min, j_max].
double estimate_rho(const ChebSeries& series, int j_min, int j_max);

// Fit range used when rho is estimated without caller-supplied bounds:
// the middle third of the resolved part of the series.
double estimate_rho_auto(const ChebSeries& series);

// Smallest n such that |b_j| <= rel_tol * max|b| for j = n+1 .. n+4 (or the
// series end). Caller-side degree selection.
int resolved_degree(const ChebSeries& series, double rel_tol = 1e-10);

ChebSeries truncate(const ChebSeries& series, int degree);

// Bernstein parameter of the largest ellipse avoiding a real singularity at
// `pole` outside the interval.
double rho_for_real_pole(const Interval& interval, double pole);

// Series for f resolved to rel_tol: computes a generous expansion then
// truncates at resolved_degree.
ChebSeries resolved_series(const ScalarFn& f, const Interval& interval,
                           double rel_tol = 1e-10, int max_degree = 4096);

}  // namespace spectral

#endif  // SPECTRAL_CHEBYSHEV_H_
