#pragma once

// Instance generators, single-job dispatch with trace/report output, and the
// key = value sweep runner behind the command-line tool.

#include "hosmooth/baselines.hpp"
#include "hosmooth/io.hpp"
#include "hosmooth/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace hosmooth {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Generators

struct LinfInstance {
  Matrix a;
  Vector b;
  std::optional<double> f_opt;  // known optimum, when the construction fixes it
};

struct SvmInstance {
  Matrix points;
  Vector labels;
  Vector plant;  // planted separator (unit norm)
};

/// Standard normal entries, redrawn until A'A is positive definite.
inline LinfInstance gen_linf_random(Rng& rng, Eigen::Index m, Eigen::Index d) {
  if (m < 1 || d < 1) throw std::invalid_argument("linf-random: sizes must be positive");
  if (m < d) throw std::invalid_argument("linf-random: need m >= d for a positive definite A'A");
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix a = rng.normal_matrix(m, d);
    Vector b = rng.normal_vector(m);
    try {
      (void)detail::checked_llt(a.transpose() * a, "linf-random");
      return {std::move(a), std::move(b), std::nullopt};
    } catch (const NotSpdError&) {
    }
  }
  throw std::runtime_error("linf-random: could not draw a full-rank matrix");
}

/// Square identity system with right-hand side uniform on [0,1); optimum 0 at x = b.
inline LinfInstance gen_linf_interp(Rng& rng, Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("linf-interp: size must be positive");
  Vector b(d);
  for (Eigen::Index i = 0; i < d; ++i) b(i) = rng.uniform();
  return {Matrix::Identity(d, d), std::move(b), 0.0};
}

/// Normal points, labels from a random unit-norm separator; points inside
/// the margin are pushed out along the separator so b_i <a_i, x_plant> >= 1.
/// flip > 0 then flips each label with that probability.
inline SvmInstance gen_svm(Rng& rng, Eigen::Index m, Eigen::Index d, double flip = 0.0) {
  if (m < 1 || d < 1) throw std::invalid_argument("svm: sizes must be positive");
  if (!(flip >= 0.0 && flip < 1.0)) throw std::invalid_argument("svm: flip probability must lie in [0,1)");
  SvmInstance out;
  out.plant = rng.normal_vector(d);
  out.plant /= out.plant.norm();
  out.points = rng.normal_matrix(m, d);
  out.labels.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = out.points.row(i).dot(out.plant);
    const double y = s >= 0.0 ? 1.0 : -1.0;
    const double short_by = 1.0 - y * s;
    if (short_by > 0.0) out.points.row(i) += (y * short_by) * out.plant.transpose();
    out.labels(i) = y;
  }
  if (flip > 0.0)
    for (Eigen::Index i = 0; i < m; ++i)
      if (rng.uniform() < flip) out.labels(i) = -out.labels(i);
  return out;
}

// ---------------------------------------------------------------------------
// Jobs

struct ProblemData {
  std::string kind;  // linf, l1svm, l4svm
  Matrix a;          // linf
  Vector b;
  Matrix points;  // svm
  Vector labels;
  double lambda = 0.1;
  double sigma4 = 0.0;  // l4svm; <= 0 selects lambda / d
};

struct JobOptions {
  std::string method = "accel";  // accel, restart, agd, subgradient
  double eps = 1e-2;
  int max_iter = 100000;
  double theta = 2.0;
  double inner_tol = 0.0;
  int inner_max_iter = 200;
  int max_rho_probes = 60;
  double restart_c = 8.0;
  int max_epochs = 100;
  std::uint64_t seed = 1;
  double eta0 = 1.0;
  double l1 = 0.0;
  double f_target = std::numeric_limits<double>::quiet_NaN();
};

struct JobResult {
  SolverReport report;
  double mu = 0.0;
  double l3 = 0.0;
  int exit_code = 0;
  nlohmann::json json;
};

inline int exit_code_for(Status s) { return s == Status::Converged ? 0 : 2; }

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"accel", "restart", "agd", "subgradient"};
  return m;
}

namespace detail {

using AnyProblem = std::variant<LinfProblem, L1SvmProblem, L4SvmProblem>;

inline AnyProblem build_problem(const ProblemData& data, double eps) {
  if (data.kind == "linf") return build_linf(data.a, data.b, eps);
  if (data.kind == "l1svm") return build_l1svm(data.points, data.labels, data.lambda, eps);
  if (data.kind == "l4svm") return build_l4svm(data.points, data.labels, data.lambda, eps, data.sigma4);
  throw std::invalid_argument("unknown problem kind '" + data.kind + "'");
}

inline nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

template <SmoothProblem P>
SolverReport dispatch(const P& prob, const JobOptions& opt, const TraceSink& sink, nlohmann::json& echo) {
  if (opt.method == "accel" || opt.method == "restart") {
    RunConfig cfg;
    cfg.eps = opt.eps;
    cfg.max_iter = opt.max_iter;
    cfg.theta = opt.theta;
    cfg.inner_tol = opt.inner_tol;
    cfg.inner_max_iter = opt.inner_max_iter;
    cfg.max_rho_probes = opt.max_rho_probes;
    cfg.restart_c = opt.restart_c;
    cfg.max_epochs = opt.max_epochs;
    cfg.seed = opt.seed;
    cfg.trace = sink;
    echo["theta"] = cfg.theta;
    echo["inner_tol"] = cfg.inner_tol > 0.0 ? nlohmann::json(cfg.inner_tol) : nlohmann::json("1e-8*(1+||grad||)");
    echo["inner_max_iter"] = cfg.inner_max_iter;
    echo["max_rho_probes"] = cfg.max_rho_probes;
    echo["max_iter"] = cfg.max_iter;
    echo["stop_rule"] = "certified gap <= eps/2";
    if (opt.method == "accel") return run(prob, cfg);
    if constexpr (requires { prob.sigma4(); }) {
      echo["sigma4"] = prob.sigma4();
      echo["kappa4"] = prob.kappa4();
      echo["restart_c"] = cfg.restart_c;
      echo["max_epochs"] = cfg.max_epochs;
      SolverReport r = run_restarted(prob, cfg);
      echo["epoch_budget"] = r.epoch_budget;
      echo["epochs"] = r.epochs;
      return r;
    } else {
      throw std::invalid_argument("method 'restart' needs a uniformly convex problem (l4svm)");
    }
  }
  BaselineConfig bc;
  bc.eps = opt.eps;
  bc.max_iter = opt.max_iter;
  bc.eta0 = opt.eta0;
  bc.f_target = opt.f_target;
  bc.trace = sink;
  echo["max_iter"] = bc.max_iter;
  echo["f_target"] = num(bc.f_target);
  if (opt.method == "agd") {
    if constexpr (requires { prob.sigma4(); }) {
      throw std::invalid_argument("method 'agd' needs a globally smooth problem (linf or l1svm)");
    } else {
      bc.l1 = opt.l1 > 0.0 ? opt.l1 : prob.l1();
      echo["l1"] = bc.l1;
      echo["stop_rule"] = "certified gap <= eps/2";
      return agd_run(prob, bc);
    }
  }
  if (opt.method == "subgradient") {
    echo["eta0"] = bc.eta0;
    echo["stop_rule"] = "f_target or zero subgradient";
    return subgradient_run(prob, bc);
  }
  throw std::invalid_argument("unknown method '" + opt.method + "'");
}

}  // namespace detail

/// Runs one (problem, method, eps) job. With a non-empty out_dir, streams
/// out_dir/trace.csv and writes out_dir/report.json.
inline JobResult run_job(const ProblemData& data, const JobOptions& opt, const fs::path& out_dir = {}) {
  if (!(opt.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (opt.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  const detail::AnyProblem any = detail::build_problem(data, opt.eps);

  std::optional<TraceWriter> writer;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    writer.emplace(out_dir / "trace.csv");
  }
  TraceSink sink;
  if (writer) sink = [&writer](const TracePoint& t) { (*writer)(t); };

  JobResult res;
  nlohmann::json echo;
  std::visit(
      [&](const auto& prob) {
        res.mu = prob.mu();
        res.l3 = prob.l3();
        echo["dim"] = prob.dim();
        if constexpr (requires { prob.lambda(); }) {
          echo["lambda"] = prob.lambda();
          echo["samples"] = prob.samples();
        } else {
          echo["rows"] = prob.a_tilde().rows();
        }
        res.report = detail::dispatch(prob, opt, sink, echo);
      },
      any);
  res.exit_code = exit_code_for(res.report.status);

  echo["eps"] = opt.eps;
  echo["mu"] = res.mu;
  echo["l3"] = res.l3;
  echo["method"] = opt.method;
  echo["seed"] = opt.seed;
  echo["gap_est"] = detail::num(res.report.gap_est);
  echo["inner_iters"] = res.report.inner_iters;
  if (!res.report.message.empty()) echo["message"] = res.report.message;

  res.json = {{"problem", data.kind},
              {"method", opt.method},
              {"eps", opt.eps},
              {"mu", res.mu},
              {"l3", res.l3},
              {"iterations", res.report.iterations},
              {"final_f", detail::num(res.report.f)},
              {"final_f_mu", detail::num(res.report.f_mu)},
              {"status", to_string(res.report.status)},
              {"seed", opt.seed},
              {"config_echo", echo}};
  if (!out_dir.empty()) {
    auto out = detail::open_out(out_dir / "report.json");
    out << res.json.dump(2) << '\n';
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sweeps

/// Flat `key = value` file; `#` starts a comment.
inline std::map<std::string, std::string> read_kv_file(const fs::path& path) {
  auto in = detail::open_in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw InputError(detail::where(path, line_no) + ": expected key = value");
    const std::string key(detail::trim(t.substr(0, eq)));
    if (key.empty()) throw InputError(detail::where(path, line_no) + ": empty key");
    kv[key] = std::string(detail::trim(t.substr(eq + 1)));
  }
  return kv;
}

struct ExperimentSpec {
  ProblemData data;
  std::vector<double> eps;
  std::vector<std::string> methods;
  JobOptions base;
  fs::path out_dir = "sweep_out";
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : split(s, ',')) {
    const auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline double kv_double(const std::map<std::string, std::string>& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_double_or_throw(it->second, key);
}

inline long long kv_int(const std::map<std::string, std::string>& kv, const std::string& key, long long fallback) {
  const double v = kv_double(kv, key, static_cast<double>(fallback));
  if (v != std::floor(v)) throw InputError(key + ": expected an integer");
  return static_cast<long long>(v);
}

}  // namespace detail

/// Loads problem data either from files (matrix + rhs, or data) or from a
/// generator (gen, seed, m, d, flip). Paths resolve relative to base_dir.
inline ProblemData load_problem(const std::map<std::string, std::string>& kv, const fs::path& base_dir = {}) {
  ProblemData data;
  const auto kind = kv.find("problem");
  if (kind == kv.end()) throw InputError("missing key 'problem'");
  data.kind = kind->second;
  if (data.kind != "linf" && data.kind != "l1svm" && data.kind != "l4svm")
    throw InputError("unknown problem '" + data.kind + "'");
  data.lambda = detail::kv_double(kv, "lambda", data.lambda);
  data.sigma4 = detail::kv_double(kv, "sigma4", 0.0);
  auto path = [&](const std::string& key) { return base_dir / fs::path(kv.at(key)); };

  if (const auto gen = kv.find("gen"); gen != kv.end()) {
    Rng rng(static_cast<std::uint64_t>(detail::kv_int(kv, "seed", 1)));
    const auto m = static_cast<Eigen::Index>(detail::kv_int(kv, "m", 40));
    const auto d = static_cast<Eigen::Index>(detail::kv_int(kv, "d", 10));
    if (data.kind == "linf") {
      LinfInstance inst;
      if (gen->second == "linf-random") {
        inst = gen_linf_random(rng, m, d);
      } else if (gen->second == "linf-interp") {
        inst = gen_linf_interp(rng, d);
      } else {
        throw InputError("generator '" + gen->second + "' does not produce linf data");
      }
      data.a = std::move(inst.a);
      data.b = std::move(inst.b);
    } else {
      double flip = 0.0;
      if (gen->second == "svm-noisy") {
        flip = detail::kv_double(kv, "flip", 0.1);
      } else if (gen->second != "svm-separable") {
        throw InputError("generator '" + gen->second + "' does not produce svm data");
      }
      SvmInstance inst = gen_svm(rng, m, d, flip);
      data.points = std::move(inst.points);
      data.labels = std::move(inst.labels);
    }
    return data;
  }
  if (data.kind == "linf") {
    if (!kv.count("matrix") || !kv.count("rhs")) throw InputError("linf needs 'matrix' and 'rhs' (or 'gen')");
    data.a = read_matrix(path("matrix"));
    data.b = read_vector(path("rhs"));
    if (data.b.size() != data.a.rows())
      throw InputError("rhs has " + std::to_string(data.b.size()) + " entries, matrix has " +
                       std::to_string(data.a.rows()) + " rows");
  } else {
    if (!kv.count("data")) throw InputError(data.kind + " needs 'data' (or 'gen')");
    LabeledData ld = read_svmlight(path("data"), static_cast<Eigen::Index>(detail::kv_int(kv, "dim", 0)));
    data.points = std::move(ld.points);
    data.labels = std::move(ld.labels);
  }
  return data;
}

inline ExperimentSpec parse_experiment(const std::map<std::string, std::string>& kv, const fs::path& base_dir = {}) {
  static const std::vector<std::string> known{
      "problem",   "gen",        "seed",           "m",          "d",       "flip",          "matrix",
      "rhs",       "data",       "dim",            "lambda",     "sigma4",  "eps",           "methods",
      "method",    "out",        "max_iter",       "theta",      "inner_tol", "inner_max_iter", "max_rho_probes",
      "restart_c", "max_epochs", "eta0",           "l1",         "f_target", "jobs"};
  for (const auto& [k, v] : kv)
    if (std::find(known.begin(), known.end(), k) == known.end()) throw InputError("unknown key '" + k + "'");

  ExperimentSpec spec;
  spec.data = load_problem(kv, base_dir);
  const auto eps = kv.find("eps");
  if (eps == kv.end()) throw InputError("missing key 'eps'");
  for (const auto& e : detail::split_list(eps->second)) {
    const double v = detail::parse_double_or_throw(e, "eps");
    if (!(v > 0.0)) throw InputError("eps values must be positive");
    spec.eps.push_back(v);
  }
  if (spec.eps.empty()) throw InputError("empty eps list");
  const auto methods = kv.count("methods") ? kv.at("methods") : (kv.count("method") ? kv.at("method") : "");
  spec.methods = detail::split_list(methods);
  if (spec.methods.empty()) throw InputError("empty method list");
  for (const auto& m : spec.methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw InputError("unknown method '" + m + "'");

  JobOptions& o = spec.base;
  o.max_iter = static_cast<int>(detail::kv_int(kv, "max_iter", o.max_iter));
  o.theta = detail::kv_double(kv, "theta", o.theta);
  o.inner_tol = detail::kv_double(kv, "inner_tol", o.inner_tol);
  o.inner_max_iter = static_cast<int>(detail::kv_int(kv, "inner_max_iter", o.inner_max_iter));
  o.max_rho_probes = static_cast<int>(detail::kv_int(kv, "max_rho_probes", o.max_rho_probes));
  o.restart_c = detail::kv_double(kv, "restart_c", o.restart_c);
  o.max_epochs = static_cast<int>(detail::kv_int(kv, "max_epochs", o.max_epochs));
  o.seed = static_cast<std::uint64_t>(detail::kv_int(kv, "seed", 1));
  o.eta0 = detail::kv_double(kv, "eta0", o.eta0);
  o.l1 = detail::kv_double(kv, "l1", o.l1);
  o.f_target = detail::kv_double(kv, "f_target", o.f_target);
  if (kv.count("out")) spec.out_dir = base_dir / fs::path(kv.at("out"));
  return spec;
}

struct SweepRow {
  std::string problem;
  std::string method;
  double eps = 0.0;
  int iters = 0;
  double final_f = std::numeric_limits<double>::quiet_NaN();
  std::string status;
  bool failed = false;
};

inline std::string job_dir_name(const std::string& method, double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_eps%g", method.c_str(), eps);
  return buf;
}

/// Runs every (eps, method) pair on up to `jobs` threads; each job writes
/// into its own subdirectory. Rows come back in grid order (eps-major).
inline std::vector<SweepRow> run_sweep(const ExperimentSpec& spec, int jobs = 1) {
  struct Task {
    double eps;
    std::string method;
  };
  std::vector<Task> tasks;
  for (double e : spec.eps)
    for (const auto& m : spec.methods) tasks.push_back({e, m});
  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      SweepRow& row = rows[i];
      row.problem = spec.data.kind;
      row.method = tasks[i].method;
      row.eps = tasks[i].eps;
      JobOptions opt = spec.base;
      opt.method = tasks[i].method;
      opt.eps = tasks[i].eps;
      try {
        const JobResult r = run_job(spec.data, opt, spec.out_dir / job_dir_name(opt.method, opt.eps));
        row.iters = r.report.iterations;
        row.final_f = r.report.f;
        row.status = to_string(r.report.status);
        row.failed = r.exit_code != 0;
      } catch (const std::exception& e) {
        row.status = std::string("Error: ") + e.what();
        row.failed = true;
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  auto out = detail::open_out(spec.out_dir / "summary.csv");
  out << "problem,method,eps,iters,final_f,status\n";
  char buf[64];
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    std::snprintf(buf, sizeof buf, "%.17g", r.final_f);
    out << r.problem << ',' << r.method << ',' << r.eps << ',' << r.iters << ',' << buf << ',' << status << '\n';
  }
  return rows;
}

}  // namespace hosmooth
