#include "cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "spectral/chebyshev.h"
#include "spectral/completion.h"
#include "spectral/csv.h"
#include "spectral/degree_dist.h"
#include "spectral/errors.h"
#include "spectral/gp.h"
#include "spectral/matrix_io.h"
#include "spectral/probes.h"
#include "spectral/reference.h"

namespace spectral::cli {
namespace {

struct Options {
  std::string command;
  std::string input;
  std::string func = "log";
  std::optional<double> a, b;
  std::optional<std::string> rho;
  std::optional<int> N, M, degree;
  std::string dist = "opt";
  std::string neg_r = "2,5,10";
  uint64_t seed = 0;
  std::string optimizer = "sgd";
  std::optional<int> epochs, inner_iters, iterations;
  std::optional<double> step;
  double step_decay = 0.97;
  int decay_every = 10;
  double lambda = 1.0;
  std::optional<double> epsilon;
  int rank = 10;
  std::string train, test, out, trajectory, model;
  double train_frac = 0.9;
  std::string theta0 = "1,1,1";
  int log_every = 10;
  bool record_time = false;
  // generate
  std::string task = "mc";
  int users = 30, items = 20, true_rank = 2, size = 200;
  double observed = 0.6;
  std::string theta = "0.5,1,1";
};

// Function family with a complex extension for the analyticity bound.
struct FuncSpec {
  std::string name;
  std::function<double(double)> f;
  std::function<std::complex<double>(std::complex<double>)> fz;
  std::optional<double> pole;          // real singularity, when f has one
  std::optional<int> poly_degree;      // set for polynomials
  std::vector<double> monomial;        // polynomial coefficients c_0..c_n
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      xs.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse " + what + " entry '" + tok + "'");
    }
  }
  if (xs.empty()) throw ConfigError(what + " is empty");
  return xs;
}

FuncSpec make_func(const std::string& name) {
  using C = std::complex<double>;
  if (name == "log") return {name, [](double x) { return std::log(x); }, [](C z) { return std::log(z); }, 0.0, {}};
  if (name == "sqrt") return {name, [](double x) { return std::sqrt(x); }, [](C z) { return std::sqrt(z); }, 0.0, {}};
  if (name == "exp") return {name, [](double x) { return std::exp(x); }, [](C z) { return std::exp(z); }, {}, {}};
  if (name.rfind("poly:", 0) == 0) {
    const std::vector<double> c = parse_list(name.substr(5), "polynomial coefficients");
    auto horner = [c](auto x) {
      decltype(x) acc = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
      return acc;
    };
    int deg = static_cast<int>(c.size()) - 1;
    while (deg > 0 && c[deg] == 0.0) --deg;
    return {"poly", [horner](double x) { return horner(x); }, [horner](C z) { return horner(z); },
            {}, deg, std::vector<double>(c.begin(), c.begin() + deg + 1)};
  }
  throw ConfigError("unknown --func '" + name + "' (log, sqrt, exp, poly:c0,c1,...)");
}

// Exact Chebyshev expansion of a polynomial: Horner in the Chebyshev basis
// with t T_j = (T_{j+1} + T_{|j-1|}) / 2 after x = mid + half t.
ChebSeries polynomial_series(const std::vector<double>& c, const Interval& iv) {
  const double mid = 0.5 * (iv.a + iv.b);
  const double half = 0.5 * (iv.b - iv.a);
  std::vector<double> q{c.back()};  // monomial coefficients in t
  for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k) {
    std::vector<double> next(q.size() + 1, 0.0);
    for (size_t j = 0; j < q.size(); ++j) {
      next[j] += mid * q[j];
      next[j + 1] += half * q[j];
    }
    next[0] += c[k];
    q = std::move(next);
  }
  std::vector<double> r{q.back()};
  for (int k = static_cast<int>(q.size()) - 2; k >= 0; --k) {
    std::vector<double> next(r.size() + 1, 0.0);
    for (size_t j = 0; j < r.size(); ++j) {
      if (j == 0) {
        next[1] += r[0];
      } else {
        next[j + 1] += 0.5 * r[j];
        next[j - 1] += 0.5 * r[j];
      }
    }
    next[0] += q[k];
    r = std::move(next);
  }
  ChebSeries s{iv, r, std::nullopt};
  return s;
}

ChebSeries series_for(const FuncSpec& fs, const Interval& iv) {
  if (fs.poly_degree) return polynomial_series(fs.monomial, iv);
  return resolved_series(fs.f, iv);
}

Interval default_interval(const FuncSpec& fs) {
  if (fs.name == "exp" || fs.name == "poly") return Interval(-1.0, 1.0);
  return Interval(0.05, 0.95);
}

double resolve_rho(const std::string& text, const FuncSpec& fs, const ChebSeries& series) {
  if (text == "auto") {
    if (fs.pole) return rho_for_real_pole(series.interval, *fs.pole);
    return estimate_rho_auto(series);
  }
  double v = 0.0;
  try {
    size_t used = 0;
    v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ConfigError("--rho must be a number > 1 or 'auto'");
  }
  if (!(v > 1.0)) throw ConfigError("--rho must be > 1");
  return v;
}

DistSpec parse_dist(const std::string& name, const Options& o) {
  DistSpec spec;
  if (name == "opt") {
    spec.kind = DistKind::kOptimal;
  } else if (name == "pois") {
    spec.kind = DistKind::kPoisson;
  } else if (name == "neg") {
    spec.kind = DistKind::kNegBinomial;
    spec.r = parse_list(o.neg_r, "--neg-r").front();
  } else if (name == "det") {
    spec.kind = DistKind::kDeterministic;
  } else {
    throw ConfigError("unknown --dist '" + name + "' (opt, pois, neg, det)");
  }
  return spec;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

// Weighted variance rows for N = 5, 10, ..., 100 (or the single --N).
int cmd_variance_bench(const Options& o, std::ostream& out) {
  const FuncSpec fs = make_func(o.func);
  if (!o.rho) throw ConfigError("variance-bench needs --rho (a number > 1 or 'auto') for the optimal distribution");
  Interval iv = default_interval(fs);
  if (o.a || o.b) iv = Interval(o.a.value_or(iv.a), o.b.value_or(iv.b));
  const ChebSeries series = series_for(fs, iv);
  const int D = series.degree();
  const double rho = resolve_rho(*o.rho, fs, series);
  const std::vector<double> rs = parse_list(o.neg_r, "--neg-r");
  std::vector<int> ns;
  if (o.N) {
    ns.push_back(*o.N);
  } else {
    for (int n = 5; n <= 100; n += 5) ns.push_back(n);
  }
  std::ostringstream csv;
  csv << "function,distribution,N,weighted_variance\n";
  auto row = [&](const std::string& label, int n, double v) {
    csv << fs.name << ',' << label << ',' << n << ',' << format_double(v) << '\n';
  };
  for (int n : ns) {
    if (n < 1) throw ConfigError("--N must be >= 1");
    row("opt", n, chebyshev_weighted_variance(series, optimal_distribution(rho, n), D));
    row("pois", n, chebyshev_weighted_variance(series, poisson_distribution(n, D + 1), D));
    for (double r : rs) {
      std::ostringstream label;
      label << "neg(" << format_double(r) << ')';
      row(label.str(), n, chebyshev_weighted_variance(series, negbinomial_distribution(n, r, D + 1), D));
    }
    // The resolved series is finite, but a non-polynomial f has nonzero
    // coefficients past any fixed degree.
    double det = std::numeric_limits<double>::infinity();
    if (fs.poly_degree && n >= *fs.poly_degree) det = 0.0;
    row("det", n, det);
  }
  if (o.out.empty()) {
    out << csv.str();
  } else {
    open_out(o.out) << csv.str();
  }
  return 0;
}

Mat load_symmetric(const std::string& path) {
  Mat a;
  const bool mtx = path.size() >= 4 && path.compare(path.size() - 4, 4, ".mtx") == 0;
  if (mtx) {
    a = Mat(read_matrix_market(path));
  } else {
    a = read_dense_matrix(path);
  }
  if (a.rows() != a.cols()) throw DataError(path + ": matrix is not square");
  if (!is_symmetric(a)) throw DataError(path + ": matrix is not symmetric");
  return a;
}

// Gershgorin enclosure of the spectrum, padded when it collapses to a point.
Interval gershgorin(const Mat& a) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i = 0; i < a.rows(); ++i) {
    const double r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    lo = std::min(lo, a(i, i) - r);
    hi = std::max(hi, a(i, i) + r);
  }
  const double pad = 1e-3 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  if (hi - lo < pad) {
    lo -= pad;
    hi += pad;
  }
  return Interval(lo, hi);
}

// max |f| on the Bernstein ellipse of parameter rho mapped to the interval.
double ellipse_max(const FuncSpec& fs, const Interval& iv, double rho) {
  double u = 0.0;
  for (int k = 0; k < 1024; ++k) {
    const std::complex<double> e = std::polar(1.0, 2.0 * std::numbers::pi * k / 1024);
    const std::complex<double> w = 0.5 * (rho * e + 1.0 / (rho * e));
    const std::complex<double> z = 0.5 * (iv.b - iv.a) * w + 0.5 * (iv.b + iv.a);
    u = std::max(u, std::abs(fs.fz(z)));
  }
  return u;
}

double bias_bound(const FuncSpec& fs, const Interval& iv, double rho, int n, Index d) {
  if (fs.poly_degree && n >= *fs.poly_degree) return 0.0;
  // Shrink toward 1 so the ellipse stays clear of a singularity.
  const double r = fs.pole ? 1.0 + 0.9 * (rho_for_real_pole(iv, *fs.pole) - 1.0) : std::max(rho, 2.0);
  return static_cast<double>(d) * truncation_error_bound(AnalyticitySpec(r, ellipse_max(fs, iv, r)), n);
}

int cmd_estimate(const Options& o, std::ostream& out) {
  if (o.input.empty()) throw ConfigError("estimate needs a matrix file");
  const FuncSpec fs = make_func(o.func);
  const int M = o.M.value_or(10);
  if (M < 1) throw ConfigError("--M must be >= 1");
  const DistSpec spec = parse_dist(o.dist, o);
  if (spec.kind == DistKind::kDeterministic && !o.degree) throw ConfigError("--dist det needs --degree");
  const auto a = std::make_shared<const Mat>(load_symmetric(o.input));
  Interval iv = gershgorin(*a);
  if (o.a || o.b) iv = Interval(o.a.value_or(iv.a), o.b.value_or(iv.b));
  if (fs.pole && iv.a <= *fs.pole) {
    throw ConfigError("eigenvalue enclosure [" + format_double(iv.a) + ", " + format_double(iv.b) +
                      "] reaches the singularity of " + fs.name + "; supply --a");
  }
  ChebSeries series = series_for(fs, iv);
  if (o.degree && *o.degree > series.degree()) {
    if (fs.poly_degree) {
      series.coeffs.resize(*o.degree + 1, 0.0);
    } else {
      series = compute_coefficients(fs.f, iv, *o.degree);
    }
  }
  // rho only shapes the optimal distribution; the bound falls back to 2 for
  // entire functions.
  const double rho = spec.kind == DistKind::kOptimal ? resolve_rho(o.rho.value_or("auto"), fs, series) : 2.0;
  const DegreeDistribution dist =
      spec.kind == DistKind::kDeterministic ? deterministic_distribution(*o.degree)
                                            : make_distribution(spec, o.N.value_or(15), rho, series.degree());
  ProbePlan plan{o.seed, M, {}};
  const UnbiasedEstimate est = estimate_spectral_sum_unbiased(dense_oracle(a, iv), series, dist, plan);
  const int n = std::min(est.degree, series.degree());
  out << "estimate " << format_double(est.value) << '\n'
      << "degree " << est.degree << '\n'
      << "M " << M << '\n'
      << "interval " << format_double(iv.a) << ' ' << format_double(iv.b) << '\n'
      << "bias_bound " << format_double(bias_bound(fs, iv, rho, n, a->rows())) << '\n';
  return 0;
}

CompletionOptimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return CompletionOptimizer::kSGD;
  if (name == "svrg") return CompletionOptimizer::kSVRG;
  if (name == "gd") return CompletionOptimizer::kGD;
  if (name == "sgd-det") return CompletionOptimizer::kSGDDet;
  throw ConfigError("unknown --optimizer '" + name + "' (sgd, svrg, gd, sgd-det)");
}

int cmd_mc_train(const Options& o, std::ostream& out) {
  if (o.train.empty()) throw ConfigError("mc-train needs --train");
  CompletionTrainConfig cfg;
  cfg.optimizer = parse_optimizer(o.optimizer);
  cfg.dist = parse_dist(o.dist, o);
  if (o.rho && *o.rho != "auto") cfg.dist.rho = std::stod(*o.rho);
  cfg.N = o.N.value_or(cfg.N);
  cfg.M = o.M.value_or(cfg.M);
  cfg.epochs = o.epochs.value_or(cfg.epochs);
  cfg.inner_iters = o.inner_iters.value_or(cfg.inner_iters);
  cfg.step = o.step.value_or(cfg.step);
  cfg.step_decay = o.step_decay;
  cfg.seed = o.seed;
  cfg.svd_rank = o.rank;
  cfg.log_every = o.log_every;
  cfg.record_time = o.record_time;
  if (!(o.lambda > 0.0)) throw ConfigError("--lambda must be > 0");
  const RatingSet rs = o.test.empty()
                           ? load_movielens(o.train, RatingFormat::kAuto, o.train_frac, o.seed)
                           : load_movielens_pair(o.train, o.test, RatingFormat::kAuto);
  const double eps = o.epsilon.value_or(default_epsilon(rs));
  if (!(eps > 0.0)) throw ConfigError("--epsilon must be > 0");
  const CompletionProblem problem{masked_ratings(rs), eps, o.lambda};
  const CompletionResult res = completion_train(problem, rs, cfg);
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    write_metrics_csv(res.metrics, f);
  }
  if (!o.trajectory.empty()) {
    auto f = open_out(o.trajectory);
    write_trajectory_csv(res.trajectory, f);
  }
  if (!o.model.empty()) {
    auto f = open_out(o.model);
    write_dense_matrix(res.prediction, f);
  }
  out << "users " << rs.d_users << " items " << rs.d_items << " train " << rs.train.size()
      << " test " << rs.test.size() << '\n'
      << "epsilon " << format_double(eps) << '\n'
      << "initial_objective " << format_double(res.initial_objective) << '\n'
      << "final_objective " << format_double(res.final_objective) << '\n'
      << "initial_rmse " << format_double(res.initial_rmse) << '\n'
      << "final_rmse " << format_double(res.final_rmse) << '\n'
      << "matvecs " << res.matvecs << '\n';
  return 0;
}

Vec3 parse_theta(const std::string& text, const std::string& what) {
  const std::vector<double> v = parse_list(text, what);
  if (v.size() != 3) throw ConfigError(what + " needs three values (noise, scale, lengthscale)");
  return Vec3(v[0], v[1], v[2]);
}

int cmd_gp_train(const Options& o, std::ostream& out) {
  if (o.train.empty()) throw ConfigError("gp-train needs --train");
  GPTrainConfig cfg;
  cfg.est.N = o.N.value_or(50);
  cfg.est.M = o.M.value_or(4);
  cfg.est.dist = parse_dist(o.dist, o);
  if (cfg.est.dist.kind == DistKind::kDeterministic) {
    throw ConfigError("gp-train estimates with a random degree; use opt, pois or neg");
  }
  if (o.rho && *o.rho != "auto") cfg.est.dist.rho = std::stod(*o.rho);
  cfg.iterations = o.iterations.value_or(300);
  cfg.step = o.step.value_or(0.002);
  cfg.step_decay = o.step_decay;
  cfg.decay_every = o.decay_every;
  cfg.seed = o.seed;
  cfg.log_every = o.log_every;
  cfg.record_time = o.record_time;
  const GPProblem gp = load_gp_data(o.train, parse_theta(o.theta0, "--theta0"));
  const GPTrainResult res = gp_train(gp, cfg);
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    write_metrics_csv(res.metrics, f);
  }
  if (!o.trajectory.empty()) {
    auto f = open_out(o.trajectory);
    write_trajectory_csv(res.trajectory, f);
  }
  if (!o.model.empty()) {
    open_out(o.model) << format_double(res.theta[0]) << ' ' << format_double(res.theta[1]) << ' '
                      << format_double(res.theta[2]) << '\n';
  }
  out << "points " << gp.y.size() << '\n'
      << "initial_nll " << format_double(res.initial_nll) << '\n'
      << "final_nll " << format_double(res.final_nll) << '\n'
      << "theta " << format_double(res.theta[0]) << ' ' << format_double(res.theta[1]) << ' '
      << format_double(res.theta[2]) << '\n';
  return 0;
}

// Synthetic fixtures: completion train/test CSV pair or GP (x, y) data.
int cmd_generate(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ConfigError("generate needs --out");
  if (o.task == "mc") {
    const RatingSet rs = synthetic_ratings(o.users, o.items, o.true_rank, o.observed, o.seed);
    auto train = open_out(o.out + "_train.csv");
    write_ratings_csv(rs.train, train);
    auto test = open_out(o.out + "_test.csv");
    write_ratings_csv(rs.test, test);
    out << "train " << rs.train.size() << " test " << rs.test.size() << '\n';
  } else if (o.task == "gp") {
    const GPProblem gp = synthetic_gp(o.size, parse_theta(o.theta, "--theta"), o.seed);
    auto f = open_out(o.out);
    write_gp_data(gp, f);
    out << "points " << gp.y.size() << " nll " << format_double(gp_negloglik_exact(gp)) << '\n';
  } else {
    throw ConfigError("unknown --task '" + o.task + "' (mc, gp)");
  }
  return 0;
}

// Flat key=value lines; '#' starts a comment.
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::vector<std::string> args;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    args.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
  }
  return args;
}

void build_app(CLI::App& app, Options& o) {
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("command", o.command, "variance-bench | estimate | mc-train | gp-train | generate")
      ->required();
  app.add_option("input", o.input, "matrix file for estimate (.mtx or whitespace dense)");
  app.add_option("--config", "flat key=value file; command-line flags override it");
  app.add_option("--func", o.func, "log | sqrt | exp | poly:c0,c1,...");
  app.add_option("--a", o.a, "interval lower end");
  app.add_option("--b", o.b, "interval upper end");
  app.add_option("--rho", o.rho, "Bernstein ellipse parameter (> 1) or 'auto'");
  app.add_option("--N", o.N, "mean truncation degree");
  app.add_option("--M,--probes", o.M, "probe vectors per estimate");
  app.add_option("--dist", o.dist, "opt | pois | neg | det");
  app.add_option("--neg-r", o.neg_r, "negative-binomial shape(s), comma separated");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--degree", o.degree, "fixed degree for --dist det");
  app.add_option("--optimizer", o.optimizer, "sgd | svrg | gd | sgd-det");
  app.add_option("--epochs", o.epochs, "outer epochs");
  app.add_option("--inner-iters", o.inner_iters, "iterations per epoch");
  app.add_option("--iterations", o.iterations, "gp-train iterations");
  app.add_option("--step", o.step, "initial step size");
  app.add_option("--step-decay", o.step_decay, "step decay factor");
  app.add_option("--decay-every", o.decay_every, "gp-train iterations per step decay");
  app.add_option("--lambda", o.lambda, "data-fit weight");
  app.add_option("--epsilon", o.epsilon, "spectral shift (default 1e-2 * mean rating^2)");
  app.add_option("--rank", o.rank, "truncated-SVD rank before test RMSE");
  app.add_option("--train", o.train, "training data file");
  app.add_option("--test", o.test, "test data file (otherwise split --train)");
  app.add_option("--train-frac", o.train_frac, "training fraction when splitting");
  app.add_option("--out", o.out, "output CSV (metrics, bench rows) or file prefix for generate");
  app.add_option("--trajectory", o.trajectory, "per-iteration CSV with the phase column");
  app.add_option("--model", o.model, "final model file");
  app.add_option("--theta0", o.theta0, "initial GP hyperparameters noise,scale,lengthscale");
  app.add_option("--log-every", o.log_every, "metrics row period");
  app.add_flag("--record-time", o.record_time, "fill wallclock_ms columns");
  app.add_option("--task", o.task, "generate: mc | gp");
  app.add_option("--users", o.users, "generate mc: rows");
  app.add_option("--items", o.items, "generate mc: columns");
  app.add_option("--true-rank", o.true_rank, "generate mc: rank of the ground truth");
  app.add_option("--observed", o.observed, "generate mc: observed fraction");
  app.add_option("--size", o.size, "generate gp: number of points");
  app.add_option("--theta", o.theta, "generate gp: generating hyperparameters");
}

int dispatch(const Options& o, std::ostream& out) {
  if (o.command == "variance-bench") return cmd_variance_bench(o, out);
  if (o.command == "estimate") return cmd_estimate(o, out);
  if (o.command == "mc-train") return cmd_mc_train(o, out);
  if (o.command == "gp-train") return cmd_gp_train(o, out);
  if (o.command == "generate") return cmd_generate(o, out);
  throw ConfigError("unknown command '" + o.command + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app("Randomized Chebyshev spectral-sum estimation and training", "spectral_cheb");
  build_app(app, o);
  try {
    std::vector<std::string> all;
    for (size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (!path.empty()) {
        const auto extra = config_args(path);
        all.insert(all.end(), extra.begin(), extra.end());
      }
    }
    all.insert(all.end(), args.begin(), args.end());
    std::reverse(all.begin(), all.end());  // CLI11 consumes a reversed vector
    app.parse(all);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  }
  try {
    return dispatch(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const DomainError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace spectral::cli
