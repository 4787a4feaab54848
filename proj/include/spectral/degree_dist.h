#ifndef SPECTRAL_DEGREE_DIST_H_
#define SPECTRAL_DEGREE_DIST_H_

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spectral/chebyshev.h"
#include "spectral/rng.h"

namespace spectral {

enum class DistKind { kOptimal, kPoisson, kNegBinomial, kDeterministic, kTabulated };

// Analytic tail beyond the tabulated prefix: q_{J+m} = first * ratio^(m-1).
struct GeometricTail {
  double first;
  double ratio;
};

// Probability mass function over truncation degrees 0, 1, 2, ...
// Immutable after construction.
class DegreeDistribution {
 public:
  // Validates q_i >= 0 and unit total mass (within 1e-12).
  DegreeDistribution(DistKind kind, std::map<std::string, double> params,
                     std::vector<double> pmf_prefix,
                     std::optional<GeometricTail> tail);

  DistKind kind() const { return kind_; }
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& name) const;
  std::string label() const;

  // Index J of the last tabulated entry.
  int prefix_last() const { return static_cast<int>(pmf_.size()) - 1; }
  const std::vector<double>& pmf_prefix() const { return pmf_; }
  const std::vector<double>& cumsum_prefix() const { return cumsum_; }
  const std::optional<GeometricTail>& tail() const { return tail_; }

  double pmf(long i) const;
  // S_{j-1} = sum_{i<j} q_i.
  double cumulative_before(long j) const;
  // 1 - S_{j-1} = sum_{i>=j} q_i, computed without cancellation.
  double survival(long j) const;
  double tail_mass() const;
  double total_mass() const;
  double mean() const;

 private:
  DistKind kind_;
  std::map<std::string, double> params_;
  std::vector<double> pmf_;
  std::vector<double> cumsum_;
  std::vector<double> suffix_;  // suffix_[j] = sum_{i>=j} q_i, j <= J+1
  std::optional<GeometricTail> tail_;
};

DegreeDistribution optimal_distribution(double rho, int mean_n);
// min_support forces the tabulation to cover at least degrees 0..min_support.
DegreeDistribution poisson_distribution(double mean_n, int min_support = 0);
DegreeDistribution negbinomial_distribution(double mean_n, double r,
                                            int min_support = 0);
DegreeDistribution deterministic_distribution(int n);
DegreeDistribution tabulated_distribution(
    std::vector<double> pmf, std::optional<GeometricTail> tail = std::nullopt,
    std::map<std::string, double> params = {});
DegreeDistribution finite_kkt_solution(double rho, int mean_n, int T);

int sample_degree(const DegreeDistribution& dist, Rng& rng);

struct WeightedCoeffs {
  std::vector<double> bhat;
  int degree;
};

WeightedCoeffs weighted_coefficients(const ChebSeries& series,
                                     const DegreeDistribution& dist, int n);

double chebyshev_weighted_variance(const ChebSeries& series,
                                   const DegreeDistribution& dist,
                                   int tail_terms);

double relaxed_objective(const DegreeDistribution& dist, double rho, int terms);

// Columns i, q_i, cumsum for i = 0..max_i.
void write_pmf_csv(const DegreeDistribution& dist, int max_i, std::ostream& out);

}  // namespace spectral

#endif  // SPECTRAL_DEGREE_DIST_H_
