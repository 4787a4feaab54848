#include "spectral/completion.h"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "spectral/csv.h"
#include "spectral/errors.h"
#include "spectral/reference.h"
#include "spectral/rng.h"

namespace spectral {
namespace {

struct RawRating {
  long user;
  long item;
  double value;
};

[[noreturn]] void parse_fail(const std::string& path, long line, const std::string& why) {
  throw DataError(path + ":" + std::to_string(line) + ": " + why);
}

std::vector<std::string> split_on(const std::string& line, const std::string& sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + sep.size();
  }
  return out;
}

bool parse_long(const std::string& s, long* out) {
  try {
    size_t used = 0;
    *out = std::stol(s, &used);
    return s.find_first_not_of(" \t\r", used) == std::string::npos;
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_double(const std::string& s, double* out) {
  try {
    size_t used = 0;
    *out = std::stod(s, &used);
    return s.find_first_not_of(" \t\r", used) == std::string::npos && std::isfinite(*out);
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<RawRating> read_raw(const std::string& path, RatingFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ratings file " + path);
  std::vector<RawRating> out;
  std::set<std::pair<long, long>> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    RatingFormat f = format;
    if (f == RatingFormat::kAuto) {
      f = line.find("::") != std::string::npos ? RatingFormat::kDoubleColon : RatingFormat::kCsv;
    }
    const auto fields = split_on(line, f == RatingFormat::kDoubleColon ? "::" : ",");
    RawRating r{};
    const bool ok = fields.size() >= 3 && parse_long(fields[0], &r.user) &&
                    parse_long(fields[1], &r.item) && parse_double(fields[2], &r.value);
    if (!ok) {
      if (line_no == 1 && f == RatingFormat::kCsv) continue;  // header row
      parse_fail(path, line_no, "expected user, item, rating");
    }
    if (!seen.insert({r.user, r.item}).second) {
      parse_fail(path, line_no, "duplicate (user, item) pair");
    }
    r.value = std::clamp(r.value, 0.5, 5.0);
    out.push_back(r);
  }
  if (out.empty()) throw DataError(path + ": no ratings");
  return out;
}

struct Compaction {
  std::map<long, int> users;
  std::map<long, int> items;

  void add(const std::vector<RawRating>& raw) {
    for (const auto& r : raw) {
      users.emplace(r.user, 0);
      items.emplace(r.item, 0);
    }
  }
  void finalize() {
    int k = 0;
    for (auto& [id, idx] : users) idx = k++;
    k = 0;
    for (auto& [id, idx] : items) idx = k++;
  }
  std::vector<Rating> map(const std::vector<RawRating>& raw) const {
    std::vector<Rating> out;
    out.reserve(raw.size());
    for (const auto& r : raw) out.push_back({users.at(r.user), items.at(r.item), r.value});
    return out;
  }
};

void check_dims(const Mat& theta, const RatingSet& ratings) {
  if (theta.rows() != ratings.d_users || theta.cols() != ratings.d_items) {
    throw ConfigError("theta is " + std::to_string(theta.rows()) + "x" +
                      std::to_string(theta.cols()) + " but ratings are " +
                      std::to_string(ratings.d_users) + "x" + std::to_string(ratings.d_items));
  }
}

}  // namespace

RatingSet split_ratings(int d_users, int d_items, std::vector<Rating> all, double train_frac,
                        uint64_t seed) {
  if (!(train_frac >= 0.0 && train_frac <= 1.0)) throw ConfigError("train_frac must be in [0,1]");
  Rng rng(seed);
  for (size_t i = all.size(); i > 1; --i) {
    const size_t j = rng.below(i);
    std::swap(all[i - 1], all[j]);
  }
  const auto n_train = static_cast<size_t>(std::floor(train_frac * all.size()));
  RatingSet rs;
  rs.d_users = d_users;
  rs.d_items = d_items;
  rs.train.assign(all.begin(), all.begin() + n_train);
  rs.test.assign(all.begin() + n_train, all.end());
  return rs;
}

RatingSet load_movielens(const std::string& path, RatingFormat format, double train_frac,
                         uint64_t seed) {
  const auto raw = read_raw(path, format);
  Compaction c;
  c.add(raw);
  c.finalize();
  return split_ratings(static_cast<int>(c.users.size()), static_cast<int>(c.items.size()),
                       c.map(raw), train_frac, seed);
}

RatingSet load_movielens_pair(const std::string& train_path, const std::string& test_path,
                              RatingFormat format) {
  const auto raw_train = read_raw(train_path, format);
  const auto raw_test = read_raw(test_path, format);
  Compaction c;
  c.add(raw_train);
  c.add(raw_test);
  c.finalize();
  RatingSet rs;
  rs.d_users = static_cast<int>(c.users.size());
  rs.d_items = static_cast<int>(c.items.size());
  rs.train = c.map(raw_train);
  rs.test = c.map(raw_test);
  std::set<std::pair<int, int>> train_keys;
  for (const auto& r : rs.train) train_keys.insert({r.user, r.item});
  for (const auto& r : rs.test) {
    if (train_keys.count({r.user, r.item})) {
      throw DataError(test_path + ": test entry (" + std::to_string(r.user) + ", " +
                      std::to_string(r.item) + ") also in training file");
    }
  }
  return rs;
}

void write_ratings_csv(const std::vector<Rating>& ratings, std::ostream& out) {
  out << "user,item,rating\n";
  for (const auto& r : ratings) {
    out << r.user << ',' << r.item << ',' << format_double(r.value) << '\n';
  }
}

RatingSet synthetic_ratings(int d_users, int d_items, int rank, double observed, uint64_t seed,
                            Mat* truth) {
  if (d_users < 1 || d_items < 1 || rank < 1) throw ConfigError("bad synthetic dimensions");
  if (!(observed > 0.0 && observed < 1.0)) throw ConfigError("observed fraction must be in (0,1)");
  Rng rng(seed);
  const double amp = std::sqrt(5.0 / rank);
  Mat u(d_users, rank), v(d_items, rank);
  for (Index i = 0; i < u.size(); ++i) u.data()[i] = amp * rng.uniform();
  for (Index i = 0; i < v.size(); ++i) v.data()[i] = amp * rng.uniform();
  const Mat r = (u * v.transpose()).cwiseMax(0.5).cwiseMin(5.0);
  if (truth) *truth = r;
  std::vector<Rating> all;
  all.reserve(r.size());
  for (int i = 0; i < d_users; ++i) {
    for (int j = 0; j < d_items; ++j) all.push_back({i, j, r(i, j)});
  }
  return split_ratings(d_users, d_items, std::move(all), observed, derive_seed(seed, 1));
}

double default_epsilon(const RatingSet& ratings) {
  double sum = 0.0;
  for (const auto& r : ratings.train) sum += r.value;
  const double mean = ratings.train.empty() ? 1.0 : sum / ratings.train.size();
  return 1e-2 * mean * mean;
}

double completion_data_term(const Mat& theta, const RatingSet& ratings, double lambda) {
  check_dims(theta, ratings);
  double sum = 0.0;
  for (const auto& r : ratings.train) {
    const double diff = theta(r.user, r.item) - r.value;
    sum += diff * diff;
  }
  return lambda * sum;
}

Mat completion_data_grad(const Mat& theta, const RatingSet& ratings, double lambda) {
  check_dims(theta, ratings);
  Mat g = Mat::Zero(theta.rows(), theta.cols());
  for (const auto& r : ratings.train) {
    g(r.user, r.item) += 2.0 * lambda * (theta(r.user, r.item) - r.value);
  }
  return g;
}

double completion_objective(const CompletionProblem& problem, const RatingSet& ratings) {
  check_dims(problem.theta, ratings);
  if (!(problem.epsilon > 0.0) || !(problem.lambda > 0.0)) {
    throw ConfigError("completion needs epsilon > 0 and lambda > 0");
  }
  Mat a = problem.theta * problem.theta.transpose();
  a = 0.5 * (a + a.transpose());
  a.diagonal().array() += problem.epsilon;
  const double spectral = exact_spectral_sum(DenseSymmetric(a), [](double x) { return std::sqrt(x); });
  return spectral + completion_data_term(problem.theta, ratings, problem.lambda);
}

Mat truncated_svd(const Mat& m, int k) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const int keep = std::min<int>(k, static_cast<int>(svd.singularValues().size()));
  return svd.matrixU().leftCols(keep) * svd.singularValues().head(keep).asDiagonal() *
         svd.matrixV().leftCols(keep).transpose();
}

double test_rmse(const Mat& prediction, const RatingSet& ratings) {
  check_dims(prediction, ratings);
  if (ratings.test.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : ratings.test) {
    const double diff = prediction(r.user, r.item) - r.value;
    sum += diff * diff;
  }
  return std::sqrt(sum / ratings.test.size());
}

Mat masked_ratings(const RatingSet& ratings) {
  Mat m = Mat::Zero(ratings.d_users, ratings.d_items);
  for (const auto& r : ratings.train) m(r.user, r.item) = r.value;
  return m;
}

CompletionResult completion_train(const CompletionProblem& problem, const RatingSet& ratings,
                                  const CompletionTrainConfig& cfg) {
  check_dims(problem.theta, ratings);
  if (cfg.epochs < 1 || cfg.inner_iters < 1) throw ConfigError("epochs and inner_iters must be >= 1");
  if (cfg.log_every < 1) throw ConfigError("log_every must be >= 1");
  DistSpec dist = cfg.dist;
  if (cfg.optimizer == CompletionOptimizer::kSGDDet) dist.kind = DistKind::kDeterministic;
  auto term = std::make_shared<LowRankSpectralTerm>(sqrt_function(), problem.epsilon, dist, 0.0);
  const double lambda = problem.lambda;
  const double lo = problem.lo, hi = problem.hi;
  Objective obj;
  obj.spectral = term;
  obj.g_value = [&ratings, lambda](const Mat& th) { return completion_data_term(th, ratings, lambda); };
  obj.g_grad = [&ratings, lambda](const Mat& th) { return completion_data_grad(th, ratings, lambda); };
  obj.projection = [lo, hi](const Mat& th) { return box_projection(th, lo, hi); };

  CompletionResult res;
  res.initial_objective = obj.exact_value(problem.theta);
  res.initial_rmse = test_rmse(truncated_svd(problem.theta, cfg.svd_rank), ratings);
  res.metrics.push_back({0, 0, res.initial_objective, res.initial_rmse, 0.0});
  auto log_metrics = [&](const IterationRecord& rec, const Mat& th) {
    if ((rec.iter + 1) % cfg.log_every != 0) return;
    res.metrics.push_back({rec.iter + 1, rec.matvecs, obj.exact_value(th),
                           test_rmse(truncated_svd(th, cfg.svd_rank), ratings), rec.wallclock_ms});
  };

  const int total = cfg.epochs * cfg.inner_iters;
  OptResult opt;
  switch (cfg.optimizer) {
    case CompletionOptimizer::kSGD:
    case CompletionOptimizer::kSGDDet: {
      SGDConfig sc;
      sc.T = total;
      sc.M = cfg.M;
      sc.N = cfg.N;
      sc.step_rule = StepRule::kExpDecay;
      sc.initial_step = cfg.step;
      sc.decay_rate = cfg.step_decay;
      sc.decay_every = cfg.inner_iters;
      sc.master_seed = cfg.seed;
      sc.refresh_every = cfg.inner_iters;
      sc.record_time = cfg.record_time;
      sc.phase = cfg.optimizer == CompletionOptimizer::kSGD ? "sgd" : "sgd-det";
      opt = sgd_run(obj, problem.theta, sc, log_metrics);
      break;
    }
    case CompletionOptimizer::kSVRG: {
      SVRGConfig vc;
      vc.S = cfg.epochs;
      vc.T = cfg.inner_iters;
      vc.eta = cfg.step;
      vc.eta_decay = cfg.step_decay;
      vc.M = cfg.M;
      vc.N = cfg.N;
      vc.master_seed = cfg.seed;
      vc.record_time = cfg.record_time;
      opt = svrg_run(obj, problem.theta, vc, [&](const Mat& th) { return term->exact_gradient(th); },
                     log_metrics);
      break;
    }
    case CompletionOptimizer::kGD: {
      // Exact-gradient oracle run with the same schedule.
      SGDConfig sc;
      sc.initial_step = cfg.step;
      sc.decay_rate = cfg.step_decay;
      sc.decay_every = cfg.inner_iters;
      const auto start = std::chrono::steady_clock::now();
      opt.theta = problem.theta;
      for (long t = 0; t < total; ++t) {
        if (t % cfg.inner_iters == 0) {
          opt.matvecs += term->refresh(opt.theta, cfg.N);
        } else {
          opt.matvecs += term->ensure_covers(opt.theta, cfg.N);
        }
        const Mat grad = term->exact_gradient(opt.theta) + obj.g_grad(opt.theta);
        if (!grad.allFinite()) throw NumericError("non-finite gradient at iteration " + std::to_string(t));
        opt.theta = box_projection(opt.theta - step_size(sc, t) * grad, lo, hi);
        opt.matvecs += term->exact_gradient_cost();
        IterationRecord rec;
        rec.phase = "gd";
        rec.iter = t;
        rec.grad_norm = grad.norm();
        rec.matvecs = opt.matvecs;
        rec.objective_estimate = std::numeric_limits<double>::quiet_NaN();
        rec.wallclock_ms =
            cfg.record_time
                ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
                : 0.0;
        log_metrics(rec, opt.theta);
        opt.records.push_back(rec);
      }
      break;
    }
  }
  res.theta = opt.theta;
  res.prediction = truncated_svd(opt.theta, cfg.svd_rank);
  res.final_objective = obj.exact_value(opt.theta);
  res.final_rmse = test_rmse(res.prediction, ratings);
  res.matvecs = opt.matvecs;
  res.trajectory = std::move(opt.records);
  return res;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out) {
  out << "iter,matvecs,objective,rmse_or_nll,wallclock_ms\n";
  for (const auto& r : rows) {
    out << r.iter << ',' << r.matvecs << ',' << format_double(r.objective) << ','
        << format_double(r.rmse_or_nll) << ',' << format_double(r.wallclock_ms) << '\n';
  }
}

}  // namespace spectral
