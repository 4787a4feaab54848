#include "spectral/chebyshev.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "spectral/errors.h"

namespace spectral {

Interval::Interval(double lo, double hi) : a(lo), b(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    std::ostringstream os;
    os << "invalid interval [" << lo << ", " << hi << "]";
    throw ConfigError(os.str());
  }
}

bool Interval::approx_equal(const Interval& o, double rel_tol) const {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - o.a) <= rel_tol * scale &&
         std::abs(b - o.b) <= rel_tol * scale;
}

AnalyticitySpec::AnalyticitySpec(double rho_in, double bigU_in)
    : rho(rho_in), bigU(bigU_in) {
  if (!(rho > 1.0) || !std::isfinite(rho)) {
    throw ConfigError("analyticity parameter rho must be > 1");
  }
  if (!(bigU > 0.0) || !std::isfinite(bigU)) {
    throw ConfigError("analyticity bound U must be > 0");
  }
}

void ChebSeries::validate() const {
  if (coeffs.empty()) throw ConfigError("Chebyshev series has no coefficients");
  if (!spec) return;
  double rho_pow = 1.0;
  for (size_t j = 0; j < coeffs.size(); ++j) {
    const double bound = 2.0 * spec->bigU / rho_pow;
    if (std::abs(coeffs[j]) > bound + 1e-9) {
      std::ostringstream os;
      os << "coefficient b_" << j << " = " << coeffs[j]
         << " exceeds decay bound " << bound;
      throw ConfigError(os.str());
    }
    rho_pow *= spec->rho;
  }
}

int default_quad_nodes(int degree) { return std::max(1024, 4 * (degree + 1)); }

ChebSeries compute_coefficients(const ScalarFn& f, const Interval& interval,
                                int degree, int quad_nodes) {
  if (degree < 0) throw ConfigError("degree must be >= 0");
  const int q = quad_nodes == 0 ? default_quad_nodes(degree) : quad_nodes;
  if (q < 4 * (degree + 1)) {
    throw ConfigError("quad_nodes must be >= 4*(degree+1)");
  }
  std::vector<double> fx(q);
  std::vector<double> angle(q);
  for (int k = 0; k < q; ++k) {
    angle[k] = std::numbers::pi * (k + 0.5) / q;
    const double x = interval.from_unit(std::cos(angle[k]));
    fx[k] = f(x);
    if (!std::isfinite(fx[k])) {
      std::ostringstream os;
      os.precision(17);
      os << "function is not finite at quadrature node " << k << " (x = " << x
         << ")";
      throw DomainError(os.str());
    }
  }
  ChebSeries series{interval, std::vector<double>(degree + 1, 0.0),
                    std::nullopt};
  for (int j = 0; j <= degree; ++j) {
    double sum = 0.0;
    for (int k = 0; k < q; ++k) sum += fx[k] * std::cos(j * angle[k]);
    series.coeffs[j] = (j == 0 ? 1.0 : 2.0) * sum / q;
  }
  return series;
}

double eval_T(int j, double x) {
  if (j == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < j; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double eval_U(int j, double x) {
  if (j == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int k = 1; k < j; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double eval_series_unit(const std::vector<double>& coeffs, double t) {
  double b1 = 0.0;
  double b2 = 0.0;
  for (int j = static_cast<int>(coeffs.size()) - 1; j >= 1; --j) {
    const double b0 = coeffs[j] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coeffs.empty() ? 0.0 : coeffs[0] + t * b1 - b2;
}

double eval_series(const ChebSeries& series, double x) {
  if (!series.interval.contains(x)) {
    std::ostringstream os;
    os << "x = " << x << " outside series interval [" << series.interval.a
       << ", " << series.interval.b << "]";
    throw DomainError(os.str());
  }
  return eval_series_unit(series.coeffs, series.interval.to_unit(x));
}

double truncation_error_bound(const AnalyticitySpec& spec, int n) {
  if (n < 0) throw ConfigError("n must be >= 0");
  return 4.0 * spec.bigU / ((spec.rho - 1.0) * std::pow(spec.rho, n));
}

double estimate_rho(const ChebSeries& series, int j_min, int j_max) {
  if (j_min < 0 || j_max > series.degree() || j_max <= j_min + 3) {
    throw ConfigError("estimate_rho needs 0 <= j_min, j_max <= degree, "
                      "j_max > j_min + 3");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (int j = j_min; j <= j_max; ++j) {
    const double mag = std::abs(series.coeffs[j]);
    if (mag <= 1e-14) continue;
    const double y = std::log(mag);
    sx += j;
    sy += y;
    sxx += static_cast<double>(j) * j;
    sxy += j * y;
    ++count;
  }
  if (count < 4) {
    throw EstimationError("too few coefficients above 1e-14 to fit decay rate");
  }
  const double denom = count * sxx - sx * sx;
  const double slope = (count * sxy - sx * sy) / denom;
  const double rho = std::exp(-slope);
  if (!(rho > 1.0)) {
    std::ostringstream os;
    os << "fitted rho = " << rho
       << " <= 1: function not resolvably analytic at this degree";
    throw EstimationError(os.str());
  }
  return rho;
}

double estimate_rho_auto(const ChebSeries& series) {
  const int d = resolved_degree(series);
  if (d < 6) {
    throw EstimationError("series too short to estimate rho; supply it");
  }
  const int j_min = std::max(1, d / 3);
  const int j_max = std::max(j_min + 4, (2 * d) / 3);
  return estimate_rho(series, j_min, std::min(j_max, d));
}

int resolved_degree(const ChebSeries& series, double rel_tol) {
  const int d = series.degree();
  double peak = 0.0;
  for (double c : series.coeffs) peak = std::max(peak, std::abs(c));
  const double cutoff = rel_tol * peak;
  for (int n = 0; n <= d; ++n) {
    bool quiet = true;
    for (int j = n + 1; j <= std::min(n + 4, d); ++j) {
      if (std::abs(series.coeffs[j]) > cutoff) {
        quiet = false;
        break;
      }
    }
    if (quiet) return n;
  }
  return d;
}

ChebSeries truncate(const ChebSeries& series, int degree) {
  if (degree < 0 || degree > series.degree()) {
    throw ConfigError("truncation degree outside series range");
  }
  ChebSeries out = series;
  out.coeffs.resize(degree + 1);
  return out;
}

double rho_for_real_pole(const Interval& interval, double pole) {
  const double t = std::abs(interval.to_unit(pole));
  if (!(t > 1.0)) throw ConfigError("pole must lie outside the interval");
  return t + std::sqrt(t * t - 1.0);
}

ChebSeries resolved_series(const ScalarFn& f, const Interval& interval,
                           double rel_tol, int max_degree) {
  int degree = 64;
  while (true) {
    ChebSeries full = compute_coefficients(f, interval, degree);
    const int n = resolved_degree(full, rel_tol);
    if (n + 4 <= degree || degree >= max_degree) return truncate(full, n);
    degree = std::min(2 * degree, max_degree);
  }
}

}  // namespace spectral
