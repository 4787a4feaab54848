#include "spectral/degree_dist.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spectral/csv.h"
#include "spectral/errors.h"

namespace spectral {
namespace {

constexpr double kMassTol = 1e-12;
constexpr double kMinDenominator = 1e-14;
constexpr size_t kMaxSupport = 4'000'000;

class KahanSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::string kind_name(DistKind kind) {
  switch (kind) {
    case DistKind::kOptimal: return "opt";
    case DistKind::kPoisson: return "pois";
    case DistKind::kNegBinomial: return "neg";
    case DistKind::kDeterministic: return "det";
    case DistKind::kTabulated: return "tab";
  }
  return "?";
}

// Tabulates exp(log_pmf(i)) until the remaining mass is negligible for both
// the total-mass and the mean constraint, then renormalizes.
template <typename LogPmf>
std::vector<double> tabulate(LogPmf log_pmf, double mean_n, int min_support) {
  std::vector<double> pmf;
  KahanSum mass;
  for (size_t i = 0;; ++i) {
    const double q = std::exp(log_pmf(static_cast<double>(i)));
    pmf.push_back(q);
    mass.add(q);
    const bool past_bulk = static_cast<double>(i) >= mean_n &&
                           static_cast<int>(i) >= min_support;
    if (past_bulk && mass.value() >= 1.0 - kMassTol &&
        (static_cast<double>(i) + 1.0) * q <= 1e-16) {
      break;
    }
    if (pmf.size() >= kMaxSupport) {
      throw ConfigError("distribution support exceeds tabulation limit");
    }
  }
  const double total = mass.value();
  for (double& q : pmf) q /= total;
  return pmf;
}

}  // namespace

DegreeDistribution::DegreeDistribution(DistKind kind,
                                       std::map<std::string, double> params,
                                       std::vector<double> pmf_prefix,
                                       std::optional<GeometricTail> tail)
    : kind_(kind),
      params_(std::move(params)),
      pmf_(std::move(pmf_prefix)),
      tail_(tail) {
  if (pmf_.empty()) throw ConfigError("empty pmf prefix");
  for (size_t i = 0; i < pmf_.size(); ++i) {
    if (!(pmf_[i] >= 0.0) || !std::isfinite(pmf_[i])) {
      std::ostringstream os;
      os << "pmf entry q_" << i << " = " << pmf_[i] << " is not a probability";
      throw ConfigError(os.str());
    }
  }
  if (tail_) {
    if (!(tail_->first >= 0.0) || !(tail_->ratio >= 0.0) ||
        !(tail_->ratio < 1.0)) {
      throw ConfigError("geometric tail needs first >= 0 and ratio in [0,1)");
    }
    if (tail_->first == 0.0) tail_.reset();
  }
  cumsum_.resize(pmf_.size());
  KahanSum fwd;
  for (size_t i = 0; i < pmf_.size(); ++i) {
    fwd.add(pmf_[i]);
    cumsum_[i] = fwd.value();
  }
  suffix_.assign(pmf_.size() + 1, 0.0);
  KahanSum bwd;
  bwd.add(tail_mass());
  suffix_[pmf_.size()] = bwd.value();
  for (size_t i = pmf_.size(); i-- > 0;) {
    bwd.add(pmf_[i]);
    suffix_[i] = bwd.value();
  }
  const double total = total_mass();
  if (std::abs(total - 1.0) > kMassTol) {
    std::ostringstream os;
    os.precision(17);
    os << "pmf total mass " << total << " differs from 1 by more than 1e-12";
    throw ConfigError(os.str());
  }
}

double DegreeDistribution::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("distribution has no parameter " + name);
  return it->second;
}

std::string DegreeDistribution::label() const {
  if (kind_ == DistKind::kNegBinomial) {
    return "neg(" + format_double(param("r")) + ")";
  }
  return kind_name(kind_);
}

double DegreeDistribution::tail_mass() const {
  if (!tail_) return 0.0;
  return tail_->first / (1.0 - tail_->ratio);
}

double DegreeDistribution::pmf(long i) const {
  if (i < 0) return 0.0;
  const long last = prefix_last();
  if (i <= last) return pmf_[i];
  if (!tail_) return 0.0;
  return tail_->first * std::pow(tail_->ratio, static_cast<double>(i - last - 1));
}

double DegreeDistribution::survival(long j) const {
  if (j <= 0) return 1.0;
  const long last = prefix_last();
  if (j <= last + 1) {
    const double s = cumsum_[j - 1];
    return s <= 0.5 ? 1.0 - s : suffix_[j];
  }
  if (!tail_) return 0.0;
  return tail_->first * std::pow(tail_->ratio, static_cast<double>(j - last - 1)) /
         (1.0 - tail_->ratio);
}

double DegreeDistribution::cumulative_before(long j) const {
  if (j <= 0) return 0.0;
  const long last = prefix_last();
  if (j <= last + 1) return cumsum_[j - 1];
  return 1.0 - survival(j);
}

double DegreeDistribution::total_mass() const { return cumsum_.back() + tail_mass(); }

double DegreeDistribution::mean() const {
  KahanSum m;
  for (size_t i = 1; i < pmf_.size(); ++i) m.add(static_cast<double>(i) * pmf_[i]);
  if (tail_) {
    // sum_{m>=1} (J+m) * first * ratio^(m-1)
    const double r = tail_->ratio;
    const double last = prefix_last();
    m.add(tail_->first * (last / (1.0 - r) + 1.0 / ((1.0 - r) * (1.0 - r))));
  }
  return m.value();
}

DegreeDistribution optimal_distribution(double rho, int mean_n) {
  if (!(rho > 1.0) || !std::isfinite(rho)) {
    throw ConfigError("optimal distribution needs rho > 1");
  }
  if (mean_n < 1) throw ConfigError("optimal distribution needs mean N >= 1");
  const double ratio_floor = std::floor(rho / (rho - 1.0));
  const int big_k = std::max(0, mean_n - static_cast<int>(ratio_floor));
  const double n_minus_k = mean_n - big_k;
  // Tabulate the tail explicitly until rho^-L <= 1e-20, then analytic.
  const int extra = static_cast<int>(
      std::min<double>(std::ceil(20.0 * std::log(10.0) / std::log(rho)), 1'000'000));
  std::vector<double> pmf(big_k + extra + 1, 0.0);
  pmf[big_k] = 1.0 - n_minus_k * (rho - 1.0) / rho;
  const double scale = n_minus_k * (rho - 1.0) * (rho - 1.0);
  for (int i = big_k + 1; i <= big_k + extra; ++i) {
    pmf[i] = scale * std::pow(rho, static_cast<double>(big_k - i - 1));
  }
  const int last = big_k + extra;
  GeometricTail tail{scale * std::pow(rho, static_cast<double>(big_k - last - 2)),
                     1.0 / rho};
  return DegreeDistribution(DistKind::kOptimal,
                            {{"rho", rho}, {"N", mean_n}, {"K", big_k}},
                            std::move(pmf), tail);
}

DegreeDistribution poisson_distribution(double mean_n, int min_support) {
  if (!(mean_n > 0.0)) throw ConfigError("Poisson mean must be > 0");
  const double log_n = std::log(mean_n);
  auto log_pmf = [&](double i) {
    return -mean_n + i * log_n - std::lgamma(i + 1.0);
  };
  return DegreeDistribution(DistKind::kPoisson, {{"N", mean_n}},
                            tabulate(log_pmf, mean_n, min_support), std::nullopt);
}

DegreeDistribution negbinomial_distribution(double mean_n, double r,
                                            int min_support) {
  if (!(mean_n > 0.0)) throw ConfigError("negative binomial mean must be > 0");
  if (!(r >= 1.0)) throw ConfigError("negative binomial shape r must be >= 1");
  const double p = r / (r + mean_n);
  const double log_p = std::log(p);
  const double log_1mp = std::log1p(-p);
  const double lg_r = std::lgamma(r);
  auto log_pmf = [&](double i) {
    return std::lgamma(i + r) - lg_r - std::lgamma(i + 1.0) + r * log_p +
           i * log_1mp;
  };
  return DegreeDistribution(DistKind::kNegBinomial, {{"N", mean_n}, {"r", r}},
                            tabulate(log_pmf, mean_n, min_support), std::nullopt);
}

DegreeDistribution deterministic_distribution(int n) {
  if (n < 0) throw ConfigError("deterministic degree must be >= 0");
  std::vector<double> pmf(n + 1, 0.0);
  pmf[n] = 1.0;
  return DegreeDistribution(DistKind::kDeterministic, {{"N", n}}, std::move(pmf),
                            std::nullopt);
}

DegreeDistribution tabulated_distribution(std::vector<double> pmf,
                                          std::optional<GeometricTail> tail,
                                          std::map<std::string, double> params) {
  return DegreeDistribution(DistKind::kTabulated, std::move(params),
                            std::move(pmf), tail);
}

DegreeDistribution finite_kkt_solution(double rho, int mean_n, int T) {
  if (!(rho > 1.0)) throw ConfigError("finite KKT solution needs rho > 1");
  if (mean_n < 1 || T < 1) throw ConfigError("finite KKT solution needs N, T >= 1");
  const int k0 = std::max(
      -1, mean_n - 1 - static_cast<int>(std::floor(rho / (rho - 1.0))));
  std::string failure;
  for (int k : {k0, k0 + 1, k0 - 1}) {
    if (k < -1 || k > mean_n - 2 || T < k + 2) continue;
    const double m = mean_n - k - 1;  // N - k - 1 > 0
    const double shrink = 1.0 - std::pow(rho, static_cast<double>(-T + k + 1));
    // Interval checks from the case analysis of the KKT system.
    const bool k1 = rho * shrink / (rho - 1.0) >= m;
    const bool k2 = k < 0 || m > shrink / (rho - 1.0);
    if (!k1 || !k2) {
      std::ostringstream os;
      os << "k=" << k << " fails " << (!k1 ? "k1 (rho(1-rho^(k+1-T))/(rho-1) >= N-k-1)"
                                            : "k2 (N-k-1 > (1-rho^(k+1-T))/(rho-1))")
         << "; ";
      failure += os.str();
      continue;
    }
    std::vector<double> pmf(T + 1, 0.0);
    if (k + 1 == T) {
      // Degenerate chain: all mass at T, only feasible when m == 1.
      pmf[T] = 1.0;
    } else {
      pmf[k + 1] = 1.0 - m * (rho - 1.0) / (shrink * rho);
      for (int n = k + 2; n <= T - 1; ++n) {
        pmf[n] = m * (rho - 1.0) * (rho - 1.0) / shrink *
                 std::pow(rho, static_cast<double>(-n + k));
      }
      pmf[T] = m * (rho - 1.0) / (std::pow(rho, static_cast<double>(T - k - 1)) - 1.0);
    }
    return DegreeDistribution(
        DistKind::kTabulated, {{"rho", rho}, {"N", mean_n}, {"T", T}, {"k", k}},
        std::move(pmf), std::nullopt);
  }
  throw ConfigError("finite KKT solution infeasible for T=" + std::to_string(T) +
                    ": " + failure);
}

int sample_degree(const DegreeDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  if (dist.kind() == DistKind::kOptimal) {
    const int big_k = static_cast<int>(dist.param("K"));
    const double rho = dist.param("rho");
    const double q_k = dist.pmf(big_k);
    if (u < q_k) return big_k;
    // Conditional on exceeding K: K + 1 + Geometric(p = (rho-1)/rho).
    double v = (u - q_k) / (1.0 - q_k);
    v = std::min(v, 1.0 - 0x1.0p-53);
    const double extra = std::floor(std::log1p(-v) / -std::log(rho));
    return big_k + 1 + static_cast<int>(std::min(extra, 1e9));
  }
  const auto& cum = dist.cumsum_prefix();
  if (u < cum.back()) {
    return static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
  }
  const auto& tail = dist.tail();
  if (!tail) {
    // Rounding slack beyond the tabulated mass: last positive-mass atom.
    const auto& pmf = dist.pmf_prefix();
    int i = dist.prefix_last();
    while (i > 0 && pmf[i] == 0.0) --i;
    return i;
  }
  double v = (u - cum.back()) / (1.0 - cum.back());
  v = std::min(v, 1.0 - 0x1.0p-53);
  const double extra = std::floor(std::log1p(-v) / std::log(tail->ratio));
  return dist.prefix_last() + 1 + static_cast<int>(std::min(extra, 1e9));
}

WeightedCoeffs weighted_coefficients(const ChebSeries& series,
                                     const DegreeDistribution& dist, int n) {
  if (n < 0 || n > series.degree()) {
    throw ConfigError("weighted degree " + std::to_string(n) +
                      " outside series degree " + std::to_string(series.degree()));
  }
  WeightedCoeffs out{std::vector<double>(n + 1), n};
  for (int j = 0; j <= n; ++j) {
    const double denom = dist.survival(j);
    if (!(denom >= kMinDenominator)) {
      std::ostringstream os;
      os << "denominator 1 - S_" << (j - 1) << " = " << denom
         << " below 1e-14 at degree " << j;
      throw DegenerateDistributionError(os.str());
    }
    out.bhat[j] = series.coeffs[j] / denom;
  }
  return out;
}

double chebyshev_weighted_variance(const ChebSeries& series,
                                   const DegreeDistribution& dist,
                                   int tail_terms) {
  if (tail_terms < series.degree()) {
    throw ConfigError("tail_terms must cover the series");
  }
  KahanSum sum;
  for (int j = 1; j <= tail_terms; ++j) {
    const double b = j <= series.degree() ? series.coeffs[j] : 0.0;
    if (b == 0.0) continue;
    const double surv = dist.survival(j);
    if (!(surv > 0.0)) {
      throw InfiniteVarianceError("S_" + std::to_string(j - 1) +
                                  " = 1 with nonzero b_" + std::to_string(j));
    }
    sum.add(b * b * dist.cumulative_before(j) / surv);
  }
  return 0.5 * std::numbers::pi * sum.value();
}

double relaxed_objective(const DegreeDistribution& dist, double rho, int terms) {
  if (terms < 1) throw ConfigError("terms must be >= 1");
  KahanSum sum;
  const double r2 = 1.0 / (rho * rho);
  double w = 1.0;
  for (int j = 1; j <= terms; ++j) {
    w *= r2;
    if (w == 0.0) break;  // remaining terms are below the smallest double
    const double surv = dist.survival(j);
    if (!(surv > 0.0)) {
      throw InfiniteVarianceError("relaxed objective infinite: S_" +
                                  std::to_string(j - 1) + " = 1");
    }
    sum.add(w * dist.cumulative_before(j) / surv);
  }
  return sum.value();
}

void write_pmf_csv(const DegreeDistribution& dist, int max_i, std::ostream& out) {
  out << "i,q_i,cumsum\n";
  for (int i = 0; i <= max_i; ++i) {
    out << i << ',' << format_double(dist.pmf(i)) << ','
        << format_double(dist.cumulative_before(i + 1)) << '\n';
  }
}

}  // namespace spectral
