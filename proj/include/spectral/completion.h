#ifndef SPECTRAL_COMPLETION_H_
#define SPECTRAL_COMPLETION_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "spectral/degree_dist.h"
#include "spectral/linalg.h"
#include "spectral/optimize.h"

namespace spectral {

struct Rating {
  int user;
  int item;
  double value;
};

struct RatingSet {
  int d_users = 0;
  int d_items = 0;
  std::vector<Rating> train;
  std::vector<Rating> test;
};

enum class RatingFormat { kDoubleColon, kCsv, kAuto };

// Raw ids are compacted to dense 0-based indices in sorted id order; ratings
// are clamped to [0.5, 5]. The first floor(train_frac * count) entries of a
// seeded Fisher-Yates shuffle form the training split.
RatingSet load_movielens(const std::string& path, RatingFormat format, double train_frac,
                         uint64_t seed);

// Separate train and test files sharing one id compaction.
RatingSet load_movielens_pair(const std::string& train_path, const std::string& test_path,
                              RatingFormat format);

RatingSet split_ratings(int d_users, int d_items, std::vector<Rating> all, double train_frac,
                        uint64_t seed);

void write_ratings_csv(const std::vector<Rating>& ratings, std::ostream& out);

// Synthetic rank-`rank` ratings in [0,5]. A seeded fraction `observed` of
// the entries forms the training split; the remaining entries are the test split.
RatingSet synthetic_ratings(int d_users, int d_items, int rank, double observed,
                            uint64_t seed, Mat* truth = nullptr);

struct CompletionProblem {
  Mat theta;  // d_users x d_items
  double epsilon;
  double lambda;
  double lo = 0.0;
  double hi = 5.0;
};

double default_epsilon(const RatingSet& ratings);

double completion_data_term(const Mat& theta, const RatingSet& ratings, double lambda);
Mat completion_data_grad(const Mat& theta, const RatingSet& ratings, double lambda);
double completion_objective(const CompletionProblem& problem, const RatingSet& ratings);

// Best rank-k approximation by SVD.
Mat truncated_svd(const Mat& m, int k);
double test_rmse(const Mat& prediction, const RatingSet& ratings);
// Training entries at their ratings, zero elsewhere.
Mat masked_ratings(const RatingSet& ratings);

enum class CompletionOptimizer { kSGD, kSVRG, kGD, kSGDDet };

struct CompletionTrainConfig {
  CompletionOptimizer optimizer = CompletionOptimizer::kSGD;
  DistSpec dist;  // ignored by kGD; kSGDDet forces Deterministic
  int N = 15;
  int M = 200;
  int epochs = 10;
  int inner_iters = 100;
  double step = 0.05;
  double step_decay = 0.97;  // per epoch
  uint64_t seed = 0;
  int svd_rank = 10;
  int log_every = 10;
  bool record_time = false;
};

struct MetricsRow {
  long iter;
  long matvecs;
  double objective;
  double rmse_or_nll;
  double wallclock_ms;
};

struct CompletionResult {
  Mat theta;
  Mat prediction;  // truncated-SVD post-processing of theta
  double initial_objective;
  double final_objective;
  double initial_rmse;
  double final_rmse;
  long matvecs;
  std::vector<MetricsRow> metrics;
  std::vector<IterationRecord> trajectory;
};

CompletionResult completion_train(const CompletionProblem& problem, const RatingSet& ratings,
                                  const CompletionTrainConfig& cfg);

// Columns iter, matvecs, objective, rmse_or_nll, wallclock_ms.
void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out);

}  // namespace spectral

#endif  // SPECTRAL_COMPLETION_H_
