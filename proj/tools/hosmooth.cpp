// hosmooth: solve / gen / sweep front end.

#include "hosmooth/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace hosmooth;

namespace {

struct SolveArgs {
  std::string problem;
  std::string matrix, rhs, data;
  int dim = 0;
  double lambda = 0.1;
  double sigma4 = 0.0;
  std::string out = "runs";
  JobOptions job;
};

struct GenArgs {
  std::string kind;
  std::uint64_t seed = 1;
  int m = 40;
  int d = 10;
  double flip = 0.1;
  std::string out = ".";
};

int do_solve(const SolveArgs& a) {
  std::map<std::string, std::string> kv{{"problem", a.problem}};
  if (!a.matrix.empty()) kv["matrix"] = a.matrix;
  if (!a.rhs.empty()) kv["rhs"] = a.rhs;
  if (!a.data.empty()) kv["data"] = a.data;
  kv["dim"] = std::to_string(a.dim);
  ProblemData data = load_problem(kv);
  data.lambda = a.lambda;
  data.sigma4 = a.sigma4;
  const JobResult r = run_job(data, a.job, a.out);
  std::printf("%s %s: %s after %d iterations, f = %.10g, f_mu = %.10g\n", a.problem.c_str(), a.job.method.c_str(),
              to_string(r.report.status), r.report.iterations, r.report.f, r.report.f_mu);
  if (!r.report.message.empty()) std::fprintf(stderr, "%s\n", r.report.message.c_str());
  return r.exit_code;
}

int do_gen(const GenArgs& g) {
  Rng rng(g.seed);
  const fs::path out(g.out);
  nlohmann::json meta{{"kind", g.kind}, {"seed", g.seed}};
  if (g.kind == "linf-random" || g.kind == "linf-interp") {
    const LinfInstance inst = g.kind == "linf-random" ? gen_linf_random(rng, g.m, g.d) : gen_linf_interp(rng, g.d);
    write_matrix_market(out / "A.mtx", inst.a);
    write_vector(out / "b.txt", inst.b);
    meta["m"] = inst.a.rows();
    meta["d"] = inst.a.cols();
    meta["f_opt"] = inst.f_opt ? nlohmann::json(*inst.f_opt) : nlohmann::json(nullptr);
  } else if (g.kind == "svm-separable" || g.kind == "svm-noisy") {
    const double flip = g.kind == "svm-noisy" ? g.flip : 0.0;
    const SvmInstance inst = gen_svm(rng, g.m, g.d, flip);
    write_svmlight(out / "data.svmlight", inst.points, inst.labels);
    write_vector(out / "plant.txt", inst.plant);
    meta["m"] = g.m;
    meta["d"] = g.d;
    meta["flip"] = flip;
  } else {
    throw std::invalid_argument("unknown generator '" + g.kind + "'");
  }
  auto f = detail::open_out(out / "meta.json");
  f << meta.dump(2) << '\n';
  return 0;
}

int do_sweep(const std::string& spec_file, int jobs, const std::string& out_override) {
  const auto kv = read_kv_file(spec_file);
  ExperimentSpec spec = parse_experiment(kv, fs::path(spec_file).parent_path());
  if (!out_override.empty()) spec.out_dir = out_override;
  if (jobs <= 0 && kv.count("jobs")) jobs = static_cast<int>(detail::kv_int(kv, "jobs", 1));
  const auto rows = run_sweep(spec, std::max(jobs, 1));
  int failed = 0;
  for (const auto& r : rows) {
    std::printf("%-12s eps=%-8g %-13s iters=%d f=%.10g\n", r.method.c_str(), r.eps, r.status.c_str(), r.iters,
                r.final_f);
    failed += r.failed;
  }
  std::printf("summary: %s\n", (spec.out_dir / "summary.csv").string().c_str());
  return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order smoothing and accelerated third-order minimization"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Run one solver on one problem");
  solve->add_option("problem", sa.problem, "linf | l1svm | l4svm")
      ->required()
      ->check(CLI::IsMember({"linf", "l1svm", "l4svm"}));
  solve->add_option("--matrix", sa.matrix, "Matrix Market or CSV matrix (linf)");
  solve->add_option("--rhs", sa.rhs, "right-hand side, one value per line (linf)");
  solve->add_option("--data", sa.data, "svmlight data (l1svm, l4svm)");
  solve->add_option("--dim", sa.dim, "feature count for svmlight data (0: infer)");
  solve->add_option("--lambda", sa.lambda, "regularization weight")->capture_default_str();
  solve->add_option("--sigma4", sa.sigma4, "uniform convexity modulus (l4svm; 0: lambda/d)");
  solve->add_option("--eps", sa.job.eps, "target accuracy")->capture_default_str();
  solve->add_option("--method", sa.job.method, "accel | restart | agd | subgradient")
      ->capture_default_str()
      ->check(CLI::IsMember(known_methods()));
  solve->add_option("--out", sa.out, "output directory")->capture_default_str();
  solve->add_option("--max-iter", sa.job.max_iter, "iteration cap")->capture_default_str();
  solve->add_option("--theta", sa.job.theta, "rho window factor")->capture_default_str();
  solve->add_option("--inner-tol", sa.job.inner_tol, "model stationarity tolerance (0: automatic)");
  solve->add_option("--inner-max-iter", sa.job.inner_max_iter, "model solver cap")->capture_default_str();
  solve->add_option("--restart-c", sa.job.restart_c, "epoch budget multiplier")->capture_default_str();
  solve->add_option("--seed", sa.job.seed, "seed for sampled checks")->capture_default_str();
  solve->add_option("--eta0", sa.job.eta0, "subgradient step scale")->capture_default_str();
  solve->add_option("--l1", sa.job.l1, "AGD Lipschitz constant (0: problem bound)");
  solve->add_option("--f-target", sa.job.f_target, "baseline stopping value");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Write a synthetic instance");
  gen->add_option("kind", ga.kind, "linf-random | linf-interp | svm-separable | svm-noisy")
      ->required()
      ->check(CLI::IsMember({"linf-random", "linf-interp", "svm-separable", "svm-noisy"}));
  gen->add_option("--seed", ga.seed)->capture_default_str();
  gen->add_option("--m", ga.m, "rows / samples")->capture_default_str();
  gen->add_option("--d", ga.d, "columns / features")->capture_default_str();
  gen->add_option("--flip", ga.flip, "label flip probability (svm-noisy)")->capture_default_str();
  gen->add_option("--out", ga.out, "output directory")->capture_default_str();

  std::string spec_file, sweep_out;
  int jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "Run an eps x method grid from a key = value file");
  sweep->add_option("spec", spec_file, "experiment file")->required();
  sweep->add_option("--jobs", jobs, "concurrent jobs (default: 'jobs' key or 1)");
  sweep->add_option("--out", sweep_out, "output directory (overrides 'out')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return do_solve(sa);
    if (*gen) return do_gen(ga);
    if (*sweep) return do_sweep(spec_file, jobs, sweep_out);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
