#include "spectral/probes.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spectral/errors.h"
#include "spectral/matrix_io.h"
#include "spectral/reference.h"
#include "test_util.h"

namespace spectral {
namespace {

class ThreadEnv {
 public:
  explicit ThreadEnv(const char* value) {
    if (const char* old = std::getenv("SPECTRAL_CHEB_THREADS")) old_ = old;
    setenv("SPECTRAL_CHEB_THREADS", value, 1);
  }
  ~ThreadEnv() {
    if (old_.empty()) {
      unsetenv("SPECTRAL_CHEB_THREADS");
    } else {
      setenv("SPECTRAL_CHEB_THREADS", old_.c_str(), 1);
    }
  }

 private:
  std::string old_;
};

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path.string();
}

TEST(RademacherTest, DeterministicSignsAndNorm) {
  const Vec v1 = rademacher_probe(4, 99);
  const Vec v2 = rademacher_probe(4, 99);
  EXPECT_TRUE((v1.array() == v2.array()).all());
  EXPECT_TRUE((v1.array().abs() == 1.0).all());
  for (uint64_t s = 0; s < 100; ++s) EXPECT_EQ(rademacher_probe(37, s).squaredNorm(), 37.0);
  EXPECT_THROW(rademacher_probe(0, 1), ConfigError);
}

TEST(RademacherTest, CoordinateMeansNearZero) {
  const int count = 100'000;
  Vec sum = Vec::Zero(8);
  for (int k = 0; k < count; ++k) sum += rademacher_probe(8, derive_seed(5, k));
  for (Index i = 0; i < 8; ++i) EXPECT_LT(std::abs(sum[i] / count), 3.0 / std::sqrt(count));
}

TEST(RademacherTest, PairwiseIndependenceAcrossCoordinates) {
  const int count = 100'000;
  Mat acc = Mat::Zero(6, 6);
  for (int k = 0; k < count; ++k) {
    const Vec v = rademacher_probe(6, derive_seed(11, k));
    acc += v * v.transpose();
  }
  acc /= count;
  EXPECT_LT((acc - Mat::Identity(6, 6)).cwiseAbs().maxCoeff(), 4.5 / std::sqrt(count));
}

TEST(HutchinsonTest, MeanAndVarianceOfQuadraticForm) {
  Rng rng(21);
  const Mat b = testing::random_symmetric(16, 1.0, rng);
  const double frob = b.squaredNorm();
  const double diag = b.diagonal().squaredNorm();
  std::vector<double> xs;
  for (int k = 0; k < 100'000; ++k) {
    const Vec v = rademacher_probe(16, derive_seed(3, k));
    xs.push_back(v.dot(b * v));
  }
  const auto ms = testing::mean_stderr(xs);
  EXPECT_NEAR(ms.mean, b.trace(), 3 * ms.stderr_);
  EXPECT_NEAR(ms.variance, 2 * (frob - diag), 0.05 * 2 * (frob - diag));
}

TEST(FixedEstimateTest, IdentityLinearIsExact) {
  const auto a = dense_oracle(Mat::Identity(7, 7), Interval(0.5, 1.5));
  const auto s = compute_coefficients([](double x) { return x; }, a.eig_interval, 1);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_NEAR(estimate_spectral_sum_fixed(a, s, 1, {seed, 3, {}}), 7.0, 1e-12);
  }
}

TEST(FixedEstimateTest, DiagonalSquareMean) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = 2;
  const auto a = dense_oracle(m, Interval(0.5, 2.5));
  const auto s = compute_coefficients([](double x) { return x * x; }, a.eig_interval, 2);
  std::vector<double> xs;
  for (uint64_t seed = 0; seed < 100'000; ++seed) {
    xs.push_back(estimate_spectral_sum_fixed(a, s, 2, {seed, 1, {}}));
  }
  const auto ms = testing::mean_stderr(xs);
  EXPECT_NEAR(ms.mean, 5.0, 3 * ms.stderr_ + 1e-12);
}

TEST(FixedEstimateTest, ErrorShrinksLikeInverseSqrtM) {
  Rng rng(4);
  const Mat m = testing::random_spd(20, 0.5, 2.0, rng);
  const auto a = dense_oracle(m, Interval(0.4, 2.2));
  const auto s = resolved_series([](double x) { return std::log(x); }, a.eig_interval);
  const double exact = exact_spectral_sum(DenseSymmetric(m), log_function().value);
  std::vector<double> ms_values, rms;
  for (int mcount : {4, 16, 64, 256}) {
    double sq = 0.0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
      const double e =
          estimate_spectral_sum_fixed(a, s, s.degree(), {derive_seed(mcount, r), mcount, {}});
      sq += (e - exact) * (e - exact);
    }
    ms_values.push_back(mcount);
    rms.push_back(std::sqrt(sq / reps));
  }
  // log-log slope of RMS error against M is -1/2.
  for (size_t i = 1; i < rms.size(); ++i) {
    const double slope = std::log(rms[i] / rms[i - 1]) / std::log(ms_values[i] / ms_values[i - 1]);
    EXPECT_NEAR(slope, -0.5, 0.15) << i;
  }
}

TEST(FixedEstimateTest, BiasWithinTruncationBound) {
  Rng rng(9);
  const Index d = 10;
  const Mat m = testing::random_spd(d, 0.2, 1.8, rng);
  const Interval iv(0.1, 2.0);
  const auto a = dense_oracle(m, iv);
  const auto s = resolved_series([](double x) { return std::log(x); }, iv);
  const double rho = rho_for_real_pole(iv, 0.0);
  const double exact = exact_spectral_sum(DenseSymmetric(m), log_function().value);
  // E[v^T p(A) v] = tr p(A), so the bias is the dense trace of the truncated series.
  const Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  for (int n : {2, 4, 8, 16}) {
    std::vector<double> c(s.coeffs.begin(), s.coeffs.begin() + n + 1);
    double tr = 0.0;
    for (Index i = 0; i < d; ++i) tr += eval_series_unit(c, iv.to_unit(eig.eigenvalues()[i]));
    // U for log on the Bernstein ellipse of parameter rho' < rho.
    const double rho_p = 1 + 0.9 * (rho - 1);
    const double t_min = iv.center() - iv.half_width() * (rho_p + 1 / rho_p) / 2;
    const double big_u = std::hypot(std::abs(std::log(t_min)), std::numbers::pi);
    EXPECT_LE(std::abs(tr - exact), d * truncation_error_bound(AnalyticitySpec{rho_p, big_u}, n)) << n;
  }
}

TEST(FixedEstimateTest, ExactMatvecCount) {
  const Mat m = Mat::Identity(5, 5) * 1.5;
  int calls = 0;
  MatrixOracle a{5, [&](const Vec& in, Vec& out) { ++calls; out = m * in; }, Interval(1, 2)};
  const auto s = compute_coefficients([](double x) { return std::exp(x); }, a.eig_interval, 12);
  for (int n : {0, 1, 5, 12}) {
    calls = 0;
    ThreadEnv env("1");
    estimate_spectral_sum_fixed(a, s, n, {1, 3, {}});
    EXPECT_EQ(calls, 3 * n);
  }
}

TEST(FixedEstimateTest, ConfigErrors) {
  const auto a = dense_oracle(Mat::Identity(3, 3), Interval(0.5, 1.5));
  const auto s = compute_coefficients([](double x) { return x; }, Interval(0.5, 2.0), 4);
  EXPECT_THROW(estimate_spectral_sum_fixed(a, s, 2, {0, 1, {}}), ConfigError);
  const auto s2 = compute_coefficients([](double x) { return x; }, a.eig_interval, 4);
  EXPECT_THROW(estimate_spectral_sum_fixed(a, s2, 5, {0, 1, {}}), ConfigError);
  EXPECT_THROW(estimate_spectral_sum_fixed(a, s2, 2, {0, 0, {}}), ConfigError);
}

TEST(UnbiasedEstimateTest, PolynomialDeterministicEqualsFixedBitExact) {
  Rng rng(30);
  const Mat m = testing::random_spd(12, 0.5, 2.0, rng);
  const auto a = dense_oracle(m, Interval(0.4, 2.2));
  const auto f = polynomial_function({1.0, -0.5, 0.25, 0.125});
  const auto s = compute_coefficients(f.value, a.eig_interval, 3);
  for (int n : {3, 5}) {
    const auto padded = compute_coefficients(f.value, a.eig_interval, n);
    for (uint64_t seed = 0; seed < 20; ++seed) {
      ProbePlan plan{seed, 4, {}};
      const auto u = estimate_spectral_sum_unbiased(a, padded, deterministic_distribution(n), plan);
      EXPECT_EQ(u.degree, n);
      EXPECT_EQ(u.value, estimate_spectral_sum_fixed(a, padded, n, {seed, 4, {}}));
    }
  }
  (void)s;
}

TEST(UnbiasedEstimateTest, LogDetUnbiasedAndOptimalBeatsPoisson) {
  Rng rng(50);
  const Mat m = testing::random_spd(50, 0.5, 3.0, rng);
  const Interval iv(0.45, 3.3);
  const auto a = dense_oracle(m, iv);
  const auto s = resolved_series([](double x) { return std::log(x); }, iv);
  const double rho = rho_for_real_pole(iv, 0.0);
  const double exact = exact_spectral_sum(DenseSymmetric(m), log_function().value);
  const int n_mean = 8;
  const auto opt = optimal_distribution(rho, n_mean);
  const auto pois = poisson_distribution(n_mean, s.degree() + 1);
  std::vector<double> xo, xp;
  for (uint64_t seed = 0; seed < 100'000; ++seed) {
    ProbePlan po{derive_seed(1, seed), 1, {}};
    ProbePlan pp{derive_seed(2, seed), 1, {}};
    xo.push_back(estimate_spectral_sum_unbiased(a, s, opt, po).value);
    xp.push_back(estimate_spectral_sum_unbiased(a, s, pois, pp).value);
  }
  const auto mo = testing::mean_stderr(xo);
  const auto mp = testing::mean_stderr(xp);
  EXPECT_NEAR(mo.mean, exact, 3 * mo.stderr_);
  EXPECT_NEAR(mp.mean, exact, 3 * mp.stderr_);
  EXPECT_LT(mo.variance, mp.variance);
}

TEST(UnbiasedEstimateTest, RecordsDrawnDegreeInPlan) {
  const auto a = dense_oracle(Mat::Identity(3, 3), Interval(0.5, 1.5));
  const auto s = resolved_series([](double x) { return std::sqrt(x); }, a.eig_interval);
  const auto dist = optimal_distribution(rho_for_real_pole(a.eig_interval, 0.0), 4);
  ProbePlan plan{77, 2, {}};
  const auto u = estimate_spectral_sum_unbiased(a, s, dist, plan);
  ASSERT_TRUE(plan.degree_sample.has_value());
  EXPECT_EQ(*plan.degree_sample, u.degree);
  ProbePlan again{77, 2, {}};
  EXPECT_EQ(estimate_spectral_sum_unbiased(a, s, dist, again).value, u.value);
}

TEST(DeterminismTest, ThreadCountDoesNotChangeResult) {
  Rng rng(8);
  const Mat m = testing::random_spd(40, 0.5, 2.0, rng);
  const auto a = dense_oracle(m, Interval(0.4, 2.2));
  const auto s = resolved_series([](double x) { return std::log(x); }, a.eig_interval);
  const auto dist = optimal_distribution(rho_for_real_pole(a.eig_interval, 0.0), 10);
  double base = 0.0;
  {
    ThreadEnv env("1");
    ProbePlan plan{123, 37, {}};
    base = estimate_spectral_sum_unbiased(a, s, dist, plan).value;
  }
  for (const char* t : {"2", "3", "8"}) {
    ThreadEnv env(t);
    ProbePlan plan{123, 37, {}};
    EXPECT_EQ(estimate_spectral_sum_unbiased(a, s, dist, plan).value, base) << t;
  }
}

TEST(DeterminismTest, ForEachProbeVisitsEveryIndexOnceAndPropagatesErrors) {
  ThreadEnv env("4");
  std::vector<int> hits(101, 0);
  for_each_probe(101, [&](int k) { hits[k] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(for_each_probe(10, [](int k) { if (k == 7) throw NumericError("x"); }),
               NumericError);
}

TEST(PowerMethodTest, DiagonalAndIdentity) {
  const Mat d = Vec((Vec(3) << 1, 2, 3).finished()).asDiagonal();
  const double b = power_method_bound(dense_oracle(d, Interval(0, 1)), 50, 1);
  EXPECT_GE(b, 3.0);
  EXPECT_LE(b, 3.3 * (1 + 1e-15));  // 1.1 * 3 rounds up by one ulp
  EXPECT_DOUBLE_EQ(power_method_bound(dense_oracle(Mat::Identity(4, 4), Interval(0, 1)), 5, 2),
                   1.1);
  EXPECT_THROW(power_method_bound(dense_oracle(d, Interval(0, 1)), 0, 1), ConfigError);
}

TEST(PowerMethodTest, CoversDenseLambdaMax) {
  Rng rng(100);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat m = testing::random_spd(100, 0.1, 5.0, rng);
    const double lmax = Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues().maxCoeff();
    EXPECT_GE(power_method_bound(dense_oracle(m, Interval(0, 1)), 100, trial), lmax);
  }
}

TEST(OracleTest, DenseOracleIsSymmetricAndLinear) {
  Rng rng(1);
  const Mat m = testing::random_symmetric(9, 1.0, rng);
  const auto a = dense_oracle(m, Interval(-10, 10));
  const Vec u = testing::random_matrix(9, 1, rng), v = testing::random_matrix(9, 1, rng);
  Vec au(9), av(9), auv(9);
  a.apply(u, au);
  a.apply(v, av);
  a.apply(2 * u + v, auv);
  EXPECT_NEAR(u.dot(av), au.dot(v), 1e-8 * m.norm());
  EXPECT_LT((auv - 2 * au - av).norm(), 1e-12 * m.norm() * (u.norm() + v.norm()));
  EXPECT_THROW(dense_oracle(Mat::Zero(2, 3), Interval(0, 1)), ConfigError);
}

TEST(MatrixIoTest, MatrixMarketSymmetricIsMirrored) {
  const std::string path = write_temp("spectral_mm_sym.mtx",
                                      "%%MatrixMarket matrix coordinate real symmetric\n"
                                      "% comment\n"
                                      "3 3 4\n"
                                      "1 1 2.0\n2 1 -1.0\n2 2 2.0\n3 3 1.5\n");
  const SpMat a = read_matrix_market(path);
  EXPECT_EQ(a.rows(), 3);
  EXPECT_EQ(a.coeff(0, 1), -1.0);
  EXPECT_EQ(a.coeff(1, 0), -1.0);
  EXPECT_EQ(a.coeff(2, 2), 1.5);
  EXPECT_TRUE(is_symmetric(a));
  const auto oracle = sparse_oracle(std::make_shared<const SpMat>(a), Interval(0, 4));
  Vec out(3);
  oracle.apply(Vec::Ones(3), out);
  EXPECT_TRUE(out.isApprox(Vec((Vec(3) << 1.0, 1.0, 1.5).finished())));
}

TEST(MatrixIoTest, MatrixMarketGeneralAndErrors) {
  const std::string ok = write_temp("spectral_mm_gen.mtx",
                                    "%%MatrixMarket matrix coordinate integer general\n"
                                    "2 2 2\n1 2 3\n2 1 3\n");
  EXPECT_TRUE(is_symmetric(read_matrix_market(ok)));
  const std::string bad = write_temp("spectral_mm_bad.mtx",
                                     "%%MatrixMarket matrix coordinate real general\n"
                                     "2 2 1\n5 1 3\n");
  try {
    read_matrix_market(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_matrix_market("/nonexistent/file.mtx"), DataError);
}

TEST(MatrixIoTest, DenseRoundTripAndErrors) {
  Rng rng(2);
  const Mat m = testing::random_symmetric(4, 1.0, rng);
  std::ostringstream out;
  write_dense_matrix(m, out);
  const std::string path = write_temp("spectral_dense.txt", "# header\n" + out.str());
  EXPECT_EQ(read_dense_matrix(path), m);
  const std::string ragged = write_temp("spectral_ragged.txt", "1 2\n3\n");
  EXPECT_THROW(read_dense_matrix(ragged), DataError);
  const std::string junk = write_temp("spectral_junk.txt", "1 x\n3 4\n");
  EXPECT_THROW(read_dense_matrix(junk), DataError);
}

TEST(MatrixIoTest, SymmetryTolerance) {
  Mat m = Mat::Identity(3, 3);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0 + 1e-14;
  EXPECT_TRUE(is_symmetric(m));
  m(1, 0) = 1.1;
  EXPECT_FALSE(is_symmetric(m));
}

}  // namespace
}  // namespace spectral
