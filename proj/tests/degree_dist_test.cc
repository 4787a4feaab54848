#include "spectral/degree_dist.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "spectral/errors.h"
#include "test_util.h"

namespace spectral {
namespace {

// Brute-force constraint sums over the pmf accessor.
struct Moments {
  double mass;
  double mean;
};

Moments brute_moments(const DegreeDistribution& d, long upto) {
  long double mass = 0, mean = 0;
  for (long i = 0; i <= upto; ++i) {
    mass += d.pmf(i);
    mean += static_cast<long double>(i) * d.pmf(i);
  }
  return {static_cast<double>(mass), static_cast<double>(mean)};
}

TEST(OptimalDistributionTest, RhoTwoMeanOne) {
  const auto d = optimal_distribution(2.0, 1);
  EXPECT_EQ(d.param("K"), 0);
  EXPECT_DOUBLE_EQ(d.pmf(0), 0.5);
  EXPECT_DOUBLE_EQ(d.pmf(1), 0.25);
  EXPECT_DOUBLE_EQ(d.pmf(2), 0.125);
  const Moments m = brute_moments(d, 200);
  EXPECT_NEAR(m.mass, 1.0, 1e-12);
  EXPECT_NEAR(m.mean, 1.0, 1e-9);
}

TEST(OptimalDistributionTest, RhoThreeMeanTwo) {
  const auto d = optimal_distribution(3.0, 2);
  EXPECT_EQ(d.param("K"), 1);
  EXPECT_EQ(d.pmf(0), 0.0);
  EXPECT_NEAR(d.pmf(1), 1.0 / 3, 1e-15);
  EXPECT_NEAR(d.pmf(2), 4.0 / 9, 1e-15);
  EXPECT_NEAR(d.pmf(3), 4.0 / 27, 1e-15);
  const Moments m = brute_moments(d, 200);
  EXPECT_NEAR(m.mass, 1.0, 1e-12);
  EXPECT_NEAR(m.mean, 2.0, 1e-9);
}

TEST(OptimalDistributionTest, RhoTwoMeanFiveHasZeroAtomAtK) {
  const auto d = optimal_distribution(2.0, 5);
  EXPECT_EQ(d.param("K"), 3);
  EXPECT_EQ(d.pmf(3), 0.0);
  EXPECT_DOUBLE_EQ(d.pmf(4), 0.5);
  EXPECT_DOUBLE_EQ(d.pmf(5), 0.25);
  const Moments m = brute_moments(d, 300);
  EXPECT_NEAR(m.mass, 1.0, 1e-12);
  EXPECT_NEAR(m.mean, 5.0, 1e-9);
}

TEST(OptimalDistributionTest, ConstraintsAcrossGrid) {
  for (double rho : {1.05, 1.3, 1.5955, 2.0, 3.0, 5.0, 10.0}) {
    for (int n : {1, 2, 5, 10, 20, 50, 100}) {
      const auto d = optimal_distribution(rho, n);
      EXPECT_NEAR(d.total_mass(), 1.0, 1e-12) << rho << " " << n;
      EXPECT_NEAR(d.mean(), n, 1e-9) << rho << " " << n;
      for (int i = 0; i <= d.prefix_last(); ++i) ASSERT_GE(d.pmf(i), 0.0);
      const auto& cs = d.cumsum_prefix();
      for (size_t i = 1; i < cs.size(); ++i) ASSERT_GE(cs[i], cs[i - 1]);
      EXPECT_LE(cs.back(), 1.0 + 1e-15);
    }
  }
}

TEST(OptimalDistributionTest, RejectsBadParameters) {
  EXPECT_THROW(optimal_distribution(1.0, 3), ConfigError);
  EXPECT_THROW(optimal_distribution(0.5, 3), ConfigError);
  EXPECT_THROW(optimal_distribution(2.0, 0), ConfigError);
}

// Tail condition for unbiasedness: sum_{i>n} q_i <= C rho^-n with
// C = (N-K)(rho-1)rho^(K-1) from the geometric tail.
TEST(OptimalDistributionTest, TailConditionAndSuffixAgreement) {
  for (double rho : {1.2, 2.0, 3.0}) {
    for (int n_mean : {2, 10}) {
      const auto d = optimal_distribution(rho, n_mean);
      const int k = static_cast<int>(d.param("K"));
      const double c = (n_mean - k) * (rho - 1) * std::pow(rho, k - 1);
      for (int n = k; n <= 200; ++n) {
        const double tail = d.survival(n + 1);
        const double analytic = c * std::pow(rho, -n);
        EXPECT_LE(tail, analytic * (1 + 1e-9)) << n;
        EXPECT_NEAR(tail, analytic, 1e-12 * analytic + 1e-300) << n;
      }
    }
  }
}

TEST(SampleDegreeTest, Deterministic) {
  const auto d = deterministic_distribution(7);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(sample_degree(d, rng), 7);
  }
}

TEST(SampleDegreeTest, OptimalMomentsMatchPmf) {
  const auto d = optimal_distribution(2.0, 1);
  Rng rng(123);
  const int n = 1'000'000;
  double sum = 0, sum2 = 0;
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    const int k = sample_degree(d, rng);
    sum += k;
    sum2 += static_cast<double>(k) * k;
    zeros += k == 0;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_NEAR(mean, 1.0, 3 * std::sqrt(var / n));
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(SampleDegreeTest, OptimalSupportStartsAtK) {
  const auto d = optimal_distribution(3.0, 2);
  Rng rng(5);
  int lo = 1 << 30;
  for (int i = 0; i < 100'000; ++i) lo = std::min(lo, sample_degree(d, rng));
  EXPECT_EQ(lo, 1);
}

TEST(SampleDegreeTest, SkipsZeroMassAtom) {
  const auto d = optimal_distribution(2.0, 5);  // q_3 = 0
  Rng rng(9);
  for (int i = 0; i < 100'000; ++i) ASSERT_GE(sample_degree(d, rng), 4);
  const auto t = tabulated_distribution({0.5, 0.0, 0.5});
  for (int i = 0; i < 10'000; ++i) ASSERT_NE(sample_degree(t, rng), 1);
}

TEST(SampleDegreeTest, TabulatedFrequenciesMatchPmf) {
  const auto d = poisson_distribution(4.0);
  Rng rng(77);
  const int n = 200'000;
  std::vector<int> counts(64, 0);
  for (int i = 0; i < n; ++i) {
    const int k = sample_degree(d, rng);
    if (k < 64) ++counts[k];
  }
  for (int k = 0; k < 12; ++k) {
    const double p = d.pmf(k);
    EXPECT_NEAR(static_cast<double>(counts[k]) / n, p, 4 * std::sqrt(p * (1 - p) / n)) << k;
  }
}

TEST(SampleDegreeTest, GeometricTailOfTabulatedSampledInClosedForm) {
  // q_0 = 0.5, tail q_m = 0.25 * 0.5^(m-1) for m >= 1.
  const auto d = tabulated_distribution({0.5}, GeometricTail{0.25, 0.5});
  Rng rng(31);
  const int n = 400'000;
  double sum = 0;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    const int k = sample_degree(d, rng);
    sum += k;
    ones += k == 1;
  }
  EXPECT_NEAR(sum / n, d.mean(), 0.01);
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.25, 4 * std::sqrt(0.25 * 0.75 / n));
}

ChebSeries make_series(std::vector<double> c) {
  return ChebSeries{Interval(-1, 1), std::move(c), std::nullopt};
}

TEST(WeightedCoefficientsTest, DeterministicKeepsCoefficients) {
  const auto s = make_series({1.0, -0.5, 0.25, 0.125});
  const auto w = weighted_coefficients(s, deterministic_distribution(3), 3);
  EXPECT_EQ(w.bhat, s.coeffs);
  EXPECT_EQ(w.degree, 3);
}

TEST(WeightedCoefficientsTest, OptimalExamples) {
  const auto s = make_series({0.7, 0.3, 0.2, 0.1});
  const auto w1 = weighted_coefficients(s, optimal_distribution(2.0, 1), 3);
  EXPECT_DOUBLE_EQ(w1.bhat[1], 2 * 0.3);
  const auto w2 = weighted_coefficients(s, optimal_distribution(3.0, 2), 3);
  EXPECT_NEAR(w2.bhat[2], 0.2 * 1.5, 1e-15);
}

TEST(WeightedCoefficientsTest, BitExactBelowK) {
  Rng rng(4);
  std::vector<double> c;
  for (int j = 0; j <= 40; ++j) c.push_back(rng.normal());
  const auto s = make_series(c);
  const auto d = optimal_distribution(1.3, 20);
  const int k = static_cast<int>(d.param("K"));
  ASSERT_GT(k, 5);
  const auto w = weighted_coefficients(s, d, 40);
  for (int j = 0; j <= k; ++j) EXPECT_EQ(w.bhat[j], c[j]) << j;
}

TEST(WeightedCoefficientsTest, Errors) {
  const auto s = make_series({1.0, 1.0, 1.0});
  EXPECT_THROW(weighted_coefficients(s, deterministic_distribution(1), 2),
               DegenerateDistributionError);
  EXPECT_THROW(weighted_coefficients(s, deterministic_distribution(1), 3), ConfigError);
}

// Monte-Carlo oracle: average Chebyshev-weighted squared error of the
// randomized truncation, integrated by Gauss-Chebyshev quadrature.
double mc_weighted_variance(const ChebSeries& s, const DegreeDistribution& d, int draws,
                            uint64_t seed) {
  const int q = 2048;
  std::vector<double> t(q);
  for (int k = 0; k < q; ++k) t[k] = std::cos(std::numbers::pi * (k + 0.5) / q);
  Rng rng(seed);
  double acc = 0;
  for (int i = 0; i < draws; ++i) {
    const int n = std::min(sample_degree(d, rng), s.degree());
    const auto w = weighted_coefficients(s, d, n);
    double norm2 = 0;
    for (int k = 0; k < q; ++k) {
      const double g = eval_series_unit(w.bhat, t[k]) - eval_series_unit(s.coeffs, t[k]);
      norm2 += g * g;
    }
    acc += norm2 * std::numbers::pi / q;
  }
  return acc / draws;
}

TEST(WeightedVarianceTest, DeterministicOnPolynomialIsZero) {
  const auto s = compute_coefficients([](double x) { return x * x * x; }, Interval(-1, 1), 3);
  EXPECT_NEAR(chebyshev_weighted_variance(s, deterministic_distribution(3), 10), 0.0, 1e-30);
  EXPECT_NEAR(chebyshev_weighted_variance(s, deterministic_distribution(5), 10), 0.0, 1e-30);
}

TEST(WeightedVarianceTest, TwoPointExampleMatchesMonteCarlo) {
  const auto s = make_series({0.0, 1.0});
  const auto d = tabulated_distribution({0.5, 0.5});
  EXPECT_NEAR(chebyshev_weighted_variance(s, d, 1), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(mc_weighted_variance(s, d, 2000, 1), std::numbers::pi / 2, 1e-9);
}

TEST(WeightedVarianceTest, InfiniteWhenMassEndsBeforeNonzeroCoefficient) {
  const auto s = make_series({0.0, 1.0, 0.5});
  EXPECT_THROW(chebyshev_weighted_variance(s, deterministic_distribution(1), 2),
               InfiniteVarianceError);
  EXPECT_THROW(chebyshev_weighted_variance(s, deterministic_distribution(1), 1), ConfigError);
}

TEST(WeightedVarianceTest, ClosedFormMatchesMonteCarlo) {
  // exp on [-1,1] keeps the MC cheap and well-conditioned.
  const auto s = resolved_series([](double x) { return std::exp(x); }, Interval(-1, 1));
  const double rho = 5.0;
  const DegreeDistribution dists[] = {optimal_distribution(rho, 4),
                                      poisson_distribution(4, s.degree() + 1),
                                      negbinomial_distribution(4, 5, s.degree() + 1)};
  for (const auto& d : dists) {
    const double exact = chebyshev_weighted_variance(s, d, s.degree());
    // Per-draw values give the MC standard error.
    std::vector<double> per;
    Rng rng(2024);
    const int q = 2048;
    for (int i = 0; i < 10'000; ++i) {
      const int n = std::min(sample_degree(d, rng), s.degree());
      const auto w = weighted_coefficients(s, d, n);
      double norm2 = 0;
      for (int k = 0; k < q; ++k) {
        const double t = std::cos(std::numbers::pi * (k + 0.5) / q);
        const double g = eval_series_unit(w.bhat, t) - eval_series_unit(s.coeffs, t);
        norm2 += g * g;
      }
      per.push_back(norm2 * std::numbers::pi / q);
    }
    const auto ms = testing::mean_stderr(per);
    EXPECT_NEAR(ms.mean, exact, std::max(3 * ms.stderr_, 0.02 * exact)) << d.label();
  }
}

TEST(WeightedVarianceTest, LogOrderingAtEqualMean) {
  const auto s = resolved_series([](double x) { return std::log(x); }, Interval(0.05, 0.95));
  const double rho = rho_for_real_pole(s.interval, 0.0);
  for (int n : {5, 10, 20, 50}) {
    const double opt = chebyshev_weighted_variance(s, optimal_distribution(rho, n), s.degree());
    const double pois =
        chebyshev_weighted_variance(s, poisson_distribution(n, s.degree() + 1), s.degree());
    const double neg =
        chebyshev_weighted_variance(s, negbinomial_distribution(n, 5, s.degree() + 1), s.degree());
    EXPECT_LT(opt, pois) << n;
    EXPECT_LT(opt, neg) << n;
  }
}

TEST(RelaxedObjectiveTest, CauchySchwarzEqualityCase) {
  const double rho = 2.0;
  const double value = relaxed_objective(optimal_distribution(rho, 1), rho, 2000);
  EXPECT_NEAR(value, 1 / ((rho - 1) * (rho - 1)) - 1 / (rho * rho - 1), 1e-12);
}

TEST(RelaxedObjectiveTest, DeterministicIsInfinite) {
  EXPECT_THROW(relaxed_objective(deterministic_distribution(4), 2.0, 50), InfiniteVarianceError);
  EXPECT_THROW(relaxed_objective(deterministic_distribution(4), 2.0, 0), ConfigError);
}

TEST(RelaxedObjectiveTest, OptimalBeatsRandomFeasiblePmfs) {
  Rng rng(99);
  for (double rho : {2.0, 3.0, 5.0}) {
    for (int n : {2, 5, 10, 20}) {
      const auto opt = optimal_distribution(rho, n);
      const double best = relaxed_objective(opt, rho, 2000);
      int finite = 0;
      for (int trial = 0; trial < 200; ++trial) {
        const auto q = testing::random_feasible_pmf(n, rng);
        ASSERT_NEAR(q.mean(), n, 1e-9);
        ASSERT_NEAR(q.total_mass(), 1.0, 1e-12);
        try {
          EXPECT_LE(best, relaxed_objective(q, rho, 2000) + 1e-10);
          ++finite;
        } catch (const InfiniteVarianceError&) {
          // Tail too light for the weights: objective is infinite.
        }
      }
      EXPECT_GT(finite, 20);
    }
  }
}

TEST(BaselineDistributionTest, PoissonPmfMatchesIndependentFormula) {
  const auto d = poisson_distribution(10);
  double p = std::exp(-10.0);
  for (int i = 1; i <= 10; ++i) p *= 10.0 / i;
  EXPECT_NEAR(d.pmf(10), p, 1e-12);
  EXPECT_NEAR(d.pmf(10), 0.12511, 1e-5);
  EXPECT_NEAR(d.mean(), 10, 1e-9);
  EXPECT_NEAR(poisson_distribution(0.5).pmf(0), std::exp(-0.5), 1e-12);
}

TEST(BaselineDistributionTest, NegBinomialMeanAndPmf) {
  for (double r : {1.0, 2.0, 5.0, 10.0}) {
    for (double n : {5.0, 20.0, 100.0}) {
      const auto d = negbinomial_distribution(n, r);
      EXPECT_NEAR(d.mean(), n, 1e-9) << r << " " << n;
      EXPECT_NEAR(d.total_mass(), 1.0, 1e-12);
    }
  }
  // r = 1 is geometric with success probability 1/(1+N).
  const auto g = negbinomial_distribution(3.0, 1.0);
  EXPECT_NEAR(g.pmf(2), 0.25 * 0.75 * 0.75, 1e-12);
  EXPECT_THROW(negbinomial_distribution(3.0, 0.5), ConfigError);
  EXPECT_THROW(poisson_distribution(0.0), ConfigError);
}

TEST(BaselineDistributionTest, MinSupportExtendsTabulation) {
  const auto d = poisson_distribution(5, 60);
  EXPECT_GE(d.prefix_last(), 60);
  EXPECT_GT(d.survival(42), 0.0);
}

TEST(TabulatedDistributionTest, RejectsBadMass) {
  EXPECT_THROW(tabulated_distribution({0.5, 0.4}), ConfigError);
  EXPECT_THROW(tabulated_distribution({1.5, -0.5}), ConfigError);
  EXPECT_NO_THROW(tabulated_distribution({0.25, 0.75}));
}

// KKT oracle for min sum_{j=1}^T rho^-2j / (1 - S_{j-1}) subject to unit mass
// and mean N: lambda_i = g_i + mu + nu*i must vanish on the support and be
// nonnegative elsewhere, where g_i is the objective's partial derivative.
void expect_kkt(const DegreeDistribution& d, double rho, int big_n, int t) {
  std::vector<double> g(t + 1, 0.0);
  for (int i = 0; i <= t; ++i) {
    for (int j = i + 1; j <= t; ++j) {
      const double surv = d.survival(j);
      g[i] += std::pow(rho, -2.0 * j) / (surv * surv);
    }
  }
  std::vector<int> support;
  for (int i = 0; i <= t; ++i) {
    if (d.pmf(i) > 1e-14) support.push_back(i);
  }
  ASSERT_GE(support.size(), 2u);
  const int i0 = support.front(), i1 = support.back();
  const double nu = -(g[i1] - g[i0]) / (i1 - i0);
  const double mu = -g[i0] - nu * i0;
  const double scale = g[0] + 1;
  for (int i = 0; i <= t; ++i) {
    const double lambda = g[i] + mu + nu * i;
    if (d.pmf(i) > 1e-14) {
      EXPECT_NEAR(lambda, 0.0, 1e-9 * scale) << "support index " << i;
    } else {
      EXPECT_GE(lambda, -1e-9 * scale) << "off-support index " << i;
    }
  }
  EXPECT_NEAR(d.total_mass(), 1.0, 1e-12);
  EXPECT_NEAR(d.mean(), big_n, 1e-9);
}

TEST(FiniteKktTest, RhoThreeMeanTwoT8) {
  const auto d = finite_kkt_solution(3.0, 2, 8);
  EXPECT_NEAR(d.pmf(1), 1 - (2.0 / 3) * (2187.0 / 2186), 1e-15);
  EXPECT_NEAR(d.pmf(1), 0.333028, 1e-6);
  expect_kkt(d, 3.0, 2, 8);
}

TEST(FiniteKktTest, KktResidualsAcrossGrid) {
  for (double rho : {1.5, 2.0, 3.0, 5.0}) {
    for (int n : {2, 5, 10}) {
      for (int t : {20, 40}) {
        const auto d = finite_kkt_solution(rho, n, t);
        expect_kkt(d, rho, n, t);
      }
    }
  }
}

TEST(FiniteKktTest, ConvergesToOptimal) {
  const auto fin = finite_kkt_solution(3.0, 2, 64);
  const auto opt = optimal_distribution(3.0, 2);
  double sup = 0;
  for (int i = 0; i <= 200; ++i) sup = std::max(sup, std::abs(fin.pmf(i) - opt.pmf(i)));
  EXPECT_LT(sup, 1e-12);
}

TEST(FiniteKktTest, ObjectiveMatchesClosedForm) {
  for (double rho : {2.0, 3.0, 5.0}) {
    for (int n : {2, 5, 10}) {
      for (int t : {10, 30}) {
        const auto d = finite_kkt_solution(rho, n, t);
        const int k = static_cast<int>(d.param("k"));
        const double m = n - k - 1;
        const double closed =
            (1 - std::pow(rho, -2.0 * (k + 1))) / (rho * rho - 1) +
            std::pow(1 - std::pow(rho, -t + k + 1.0), 2) /
                (m * (rho - 1) * (rho - 1) * std::pow(rho, 2.0 * (k + 1)));
        double direct = 0, weights = 0;
        for (int j = 1; j <= t; ++j) {
          direct += std::pow(rho, -2.0 * j) / d.survival(j);
          weights += std::pow(rho, -2.0 * j);
        }
        EXPECT_NEAR(direct, closed, 1e-12 * closed) << rho << " " << n << " " << t;
        EXPECT_NEAR(relaxed_objective(d, rho, t), closed - weights, 1e-12);
      }
    }
  }
}

TEST(FiniteKktTest, InfeasibleWhenTTooSmall) {
  try {
    finite_kkt_solution(2.0, 10, 3);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("infeasible"), std::string::npos);
  }
}

TEST(FiniteKktTest, OptimalNoWorseAtT64) {
  for (double rho : {2.0, 3.0, 5.0}) {
    for (int n : {2, 5, 10, 20}) {
      const auto fin = finite_kkt_solution(rho, n, 64);
      const auto opt = optimal_distribution(rho, n);
      EXPECT_LE(relaxed_objective(opt, rho, 2000), relaxed_objective(fin, rho, 64) + 1e-10);
    }
  }
}

TEST(PmfCsvTest, Columns) {
  std::ostringstream os;
  write_pmf_csv(optimal_distribution(2.0, 1), 2, os);
  EXPECT_EQ(os.str(), "i,q_i,cumsum\n0,0.5,0.5\n1,0.25,0.75\n2,0.125,0.875\n");
}

}  // namespace
}  // namespace spectral
