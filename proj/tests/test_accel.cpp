#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace hosmooth;
using hosmooth::testing::QuadraticProblem;

namespace {

LinfProblem linf_eps(std::uint64_t seed, int m, int d, double eps) {
  Rng rng(seed);
  const LinfInstance inst = gen_linf_random(rng, m, d);
  return build_linf(inst.a, inst.b, eps);
}

void audit_trace(const SolverReport& r, double l3, double theta) {
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace.front().iter, 0);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    const TracePoint& prev = r.trace[i - 1];
    const TracePoint& tp = r.trace[i];
    if (tp.epoch != prev.epoch) continue;
    EXPECT_EQ(tp.iter, prev.iter + 1);
    // a^2 = (A_k + a) / (L3 rho) and A_{k+1} = A_k + a
    EXPECT_NEAR(tp.a * tp.a, tp.big_a / (l3 * tp.rho), 1e-12 * tp.a * tp.a) << "iter " << tp.iter;
    EXPECT_EQ(tp.big_a, prev.big_a + tp.a) << "iter " << tp.iter;
    EXPECT_GT(tp.big_a, prev.big_a);
    if (tp.disp > 0.0) {
      EXPECT_GE(tp.disp, tp.rho / theta) << "iter " << tp.iter;
      EXPECT_LE(tp.disp, tp.rho * theta) << "iter " << tp.iter;
    }
    EXPECT_LE(tp.f_mu, prev.f_mu) << "iter " << tp.iter;
    EXPECT_LE(tp.f_mu_step, tp.f_mu_y + 1e-13 * std::abs(tp.f_mu_y)) << "iter " << tp.iter;
    EXPECT_GE(tp.gap_est, 0.0);
  }
}

}  // namespace

TEST(StepA, Examples) {
  EXPECT_DOUBLE_EQ(step_a(0, 1, 1), 1.0);
  EXPECT_NEAR(step_a(0, 4, 0.125), 2.0, 1e-15);
  const double a = step_a(3, 2, 0.5);
  EXPECT_NEAR(a, (1 + std::sqrt(13.0)) / 2, 1e-15);
  EXPECT_NEAR(a, 2.3027756, 5e-8);
  EXPECT_NEAR(a * a, (3 + a) / (2 * 0.5), 1e-12 * a * a);
}

TEST(StepA, IdentityOverRanges) {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const double big_a = t % 5 ? std::pow(10.0, rng.uniform(-6, 8)) : 0.0;
    const double l3 = std::pow(10.0, rng.uniform(-3, 9));
    const double rho = std::pow(10.0, rng.uniform(-10, 4));
    const double a = step_a(big_a, l3, rho);
    EXPECT_GT(a, 0.0);
    EXPECT_NEAR(a * a, (big_a + a) / (l3 * rho), 1e-12 * a * a);
  }
}

TEST(StepA, Errors) {
  EXPECT_THROW(step_a(0, 0, 1), std::invalid_argument);
  EXPECT_THROW(step_a(0, 1, -1), std::invalid_argument);
  EXPECT_THROW(step_a(-1, 1, 1), std::invalid_argument);
}

TEST(EstimateSequence, MinimizerAndEnvelope) {
  Rng rng(2);
  const LinfProblem p = linf_eps(3, 20, 4, 0.1);
  const Vector x0 = rng.normal_vector(4);
  EstimateSequence psi(x0, p.norm());
  EXPECT_EQ(psi.minimizer(), x0);
  EXPECT_EQ(psi.weight(), 0.0);
  EXPECT_EQ(psi.lower_envelope(x0), -std::numeric_limits<double>::infinity());

  double total = 0.0;
  for (int i = 0; i < 8; ++i) {
    const Vector xi = rng.normal_vector(4);
    const auto loc = p.local(xi);
    const double a = rng.uniform(0.1, 2.0);
    psi.add(a, loc.value(), loc.gradient(), xi);
    total += a;
  }
  EXPECT_DOUBLE_EQ(psi.weight(), total);
  // v = x0 - B^{-1} g_acc: the gradient of psi vanishes there
  const Vector v = psi.minimizer();
  EXPECT_LT(p.norm().dual_norm(p.norm().apply(v - x0) + psi.gradient_sum()), 1e-10 * (1 + psi.gradient_sum().norm()));
  for (int t = 0; t < 50; ++t) {
    const Vector h = rng.normal_vector(4);
    EXPECT_LE(psi.value(v), psi.value(v + 0.1 * h));
  }
  // supporting hyperplanes of a convex function
  for (int t = 0; t < 1000; ++t) {
    const Vector x = 3.0 * rng.normal_vector(4);
    EXPECT_LE(psi.lower_envelope(x), p.value(x) + 1e-12);
  }
}

TEST(LowerEnvelope, MinOverBall) {
  LowerEnvelope env(2);
  Vector g(2);
  g << 3, 4;
  env.add(2.0, 1.0, g, Vector::Zero(2));
  const NormMatrix b = NormMatrix::identity(2);
  EXPECT_DOUBLE_EQ(env.min_over({Vector::Zero(2), 2.0}, b), 1.0 - 10.0);
  EXPECT_DOUBLE_EQ(env.value(Vector::Ones(2)), 8.0);
}

TEST(CertifiedGap, BoundsTrueGapOnQuadratic) {
  Rng rng(4);
  const Matrix r = rng.normal_matrix(3, 3);
  const QuadraticProblem p(r.transpose() * r + Matrix::Identity(3, 3), rng.normal_vector(3), 1.0);
  const double fstar = p.value(p.minimizer());
  LowerEnvelope env(3);
  for (int t = 0; t < 30; ++t) {
    const Vector x = p.minimizer() + rng.normal_vector(3) / (t + 1.0);
    const auto loc = p.local(x);
    env.add(1.0, loc.value(), loc.gradient(), x);
    EXPECT_GE(certified_gap(p, env, x, loc.value(), loc.gradient()), loc.value() - fstar - 1e-12);
  }
}

TEST(RhoSearch, FixedPointAcceptsInOneProbe) {
  const LinfProblem p = linf_eps(5, 30, 6, 0.1);
  Rng rng(6);
  const Vector x = rng.normal_vector(6);
  RunConfig cfg;
  const RhoSearchResult first = rho_search(p, x, x, 0.0, 1.0, cfg);
  EXPECT_GE(first.disp, first.rho / cfg.theta);
  EXPECT_LE(first.disp, first.rho * cfg.theta);
  const RhoSearchResult again = rho_search(p, x, x, 0.0, first.rho, cfg);
  EXPECT_EQ(again.probes, 1);
  EXPECT_EQ(again.rho, first.rho);
  EXPECT_EQ(again.x_next, first.x_next);
}

TEST(RhoSearch, NarrowWindowAndBracket) {
  const LinfProblem p = linf_eps(7, 30, 6, 0.1);
  Rng rng(8);
  const Vector x = rng.normal_vector(6);
  const Vector v = x + 0.1 * rng.normal_vector(6);
  RunConfig cfg;
  cfg.theta = 1.01;
  const RhoSearchResult r = rho_search(p, x, v, 0.5, 1e-6, cfg);
  EXPECT_GE(r.disp, r.rho / 1.01);
  EXPECT_LE(r.disp, r.rho * 1.01);
  // y is the tau-combination of x and v
  const double tau = r.a / (0.5 + r.a);
  EXPECT_LT((r.y - ((1 - tau) * x + tau * v)).norm(), 1e-14 * (1 + r.y.norm()));
  if (r.lo > 0.0 && std::isfinite(r.hi)) {
    EXPECT_LE(r.lo, r.rho);
    EXPECT_GE(r.hi, r.rho);
  }
}

TEST(RhoSearch, Errors) {
  const LinfProblem p = linf_eps(9, 30, 6, 0.1);
  const Vector x = Vector::Constant(6, 3.0);
  RunConfig cfg;
  cfg.theta = 1.0;
  EXPECT_THROW(rho_search(p, x, x, 0.0, 1.0, cfg), std::invalid_argument);
  cfg.theta = 1.0001;
  cfg.max_rho_probes = 1;
  try {
    rho_search(p, x, x, 0.0, 1e-12, cfg);
    FAIL() << "expected RhoSearchError";
  } catch (const RhoSearchError& e) {
    EXPECT_GT(e.lo, 0.0);
  }
}

TEST(Run, StationaryStartConvergesAtIterationZero) {
  const LinfProblem p = build_linf(Matrix::Identity(3, 3), Vector::Zero(3), 0.1);
  RunConfig cfg;
  cfg.eps = 0.1;
  const SolverReport r = run(p, cfg);
  EXPECT_EQ(r.status, Status::Converged);
  EXPECT_EQ(r.iterations, 0);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.gap_est, 0.0);
}

TEST(Run, ConfigErrors) {
  const LinfProblem p = build_linf(Matrix::Identity(3, 3), Vector::Ones(3), 0.1);
  RunConfig cfg;
  cfg.eps = 0.0;
  EXPECT_THROW(run(p, cfg), std::invalid_argument);
  cfg.eps = 0.1;
  cfg.theta = 0.5;
  EXPECT_THROW(run(p, cfg), std::invalid_argument);
  cfg.theta = 2.0;
  cfg.x0 = Vector::Zero(2);
  EXPECT_THROW(run(p, cfg), DimensionError);
}

TEST(Run, InterpolationInstance) {
  Rng rng(10);
  const LinfInstance inst = gen_linf_interp(rng, 10);
  ASSERT_TRUE(inst.f_opt.has_value());
  EXPECT_EQ(*inst.f_opt, 0.0);
  const LinfProblem p = build_linf(inst.a, inst.b, 1e-2);
  RunConfig cfg;
  cfg.eps = 1e-2;
  cfg.max_iter = 5000;
  const SolverReport r = run(p, cfg);
  EXPECT_EQ(r.status, Status::Converged);
  EXPECT_LE(r.f, 1e-2);
  EXPECT_NEAR(r.f, (r.x - inst.b).lpNorm<Eigen::Infinity>(), 1e-15);
  audit_trace(r, p.l3(), cfg.theta);
}

TEST(Run, RandomInstanceAgainstReferenceOptimum) {
  const double eps = 1e-2;
  const LinfProblem p = linf_eps(42, 40, 10, eps);
  RunConfig cfg;
  cfg.eps = eps;
  cfg.max_iter = 20000;
  const SolverReport r = run(p, cfg);
  ASSERT_EQ(r.status, Status::Converged) << r.message;
  EXPECT_LE(r.f - hosmooth::testing::kLinf40x10Seed42, eps);
  EXPECT_GE(r.f, hosmooth::testing::kLinf40x10Seed42 - 1e-9);
  EXPECT_LE(r.gap_est, eps / 2);
  // the certified gap bounds the true smoothed gap
  EXPECT_LE(r.f_mu - (hosmooth::testing::kLinf40x10Seed42), r.gap_est + p.smoothing_gap());
  audit_trace(r, p.l3(), cfg.theta);
  EXPECT_EQ(r.trace.back().iter, r.iterations);
  EXPECT_EQ(r.trace.back().f_mu, r.f_mu);
}

TEST(Run, CapReachedIsReported) {
  const LinfProblem p = linf_eps(42, 40, 10, 1e-3);
  RunConfig cfg;
  cfg.eps = 1e-3;
  cfg.max_iter = 5;
  const SolverReport r = run(p, cfg);
  EXPECT_EQ(r.status, Status::CapReached);
  EXPECT_EQ(r.iterations, 5);
  EXPECT_EQ(r.trace.size(), 6u);
}

TEST(Run, InnerFailureIsReported) {
  const LinfProblem p = linf_eps(42, 40, 10, 1e-2);
  RunConfig cfg;
  cfg.eps = 1e-2;
  cfg.inner_max_iter = 1;
  cfg.inner_tol = 1e-15;
  const SolverReport r = run(p, cfg);
  EXPECT_EQ(r.status, Status::InnerFailure);
  EXPECT_FALSE(r.message.empty());
}

TEST(Run, TraceSinkSeesEveryRow) {
  const LinfProblem p = linf_eps(3, 20, 4, 0.1);
  RunConfig cfg;
  cfg.eps = 0.1;
  std::vector<int> seen;
  cfg.trace = [&](const TracePoint& tp) { seen.push_back(tp.iter); };
  const SolverReport r = run(p, cfg);
  ASSERT_EQ(seen.size(), r.trace.size());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], static_cast<int>(i));
}

TEST(Run, SvmProblems) {
  Rng rng(7);
  const SvmInstance s = gen_svm(rng, 40, 10, 0.0);
  const double eps = 0.05;
  const L1SvmProblem p = build_l1svm(s.points, s.labels, 0.1, eps);
  RunConfig cfg;
  cfg.eps = eps;
  cfg.max_iter = 20000;
  const SolverReport r = run(p, cfg);
  ASSERT_EQ(r.status, Status::Converged) << r.message;
  EXPECT_LE(r.f - hosmooth::testing::kL1SvmSep40x10Seed7Lambda01, eps);
  audit_trace(r, p.l3(), cfg.theta);
}

namespace {

L4SvmProblem l4_toy(double eps, double sigma4 = 0.0) {
  Rng rng(7);
  const SvmInstance s = gen_svm(rng, 20, 5, 0.0);
  return build_l4svm(s.points, s.labels, 0.5, eps, sigma4);
}

}  // namespace

TEST(RunRestarted, AlreadyOptimalStart) {
  // same smoothed problem, solved far past the target first
  const L4SvmProblem p = l4_toy(1e-1);
  RunConfig cfg;
  cfg.eps = 1e-9;
  cfg.max_iter = 50000;
  const SolverReport ref = run(p, cfg);
  ASSERT_EQ(ref.status, Status::Converged);

  RunConfig rc;
  rc.eps = 1e-1;
  rc.x0 = ref.x;
  const SolverReport r = run_restarted(p, rc);
  EXPECT_EQ(r.status, Status::Converged);
  EXPECT_EQ(r.epochs, 1);
  EXPECT_EQ(r.iterations, 0);
}

TEST(RunRestarted, EpochsDecreaseSmoothedObjective) {
  const L4SvmProblem p = l4_toy(1e-3);
  RunConfig cfg;
  cfg.eps = 1e-3;
  cfg.restart_c = 0.5;  // short epochs, so several are used
  const SolverReport r = run_restarted(p, cfg);
  ASSERT_EQ(r.status, Status::Converged) << r.message;
  EXPECT_GT(r.epochs, 1);
  EXPECT_EQ(r.epoch_budget, static_cast<int>(std::ceil(0.5 * std::pow(p.kappa4(), 0.2))));
  std::map<int, double> last;
  std::map<int, int> count;
  for (const TracePoint& tp : r.trace) {
    last[tp.epoch] = tp.f_mu;
    if (tp.iter > 0) ++count[tp.epoch];
  }
  double prev = p.value(Vector::Zero(5));
  for (const auto& [epoch, f] : last) {
    EXPECT_LT(f, prev) << "epoch " << epoch;
    EXPECT_LE(count[epoch], r.epoch_budget);
    prev = f;
  }
  audit_trace(r, p.l3(), cfg.theta);
}

TEST(RunRestarted, FalsifiedModulusIsRejected) {
  const L4SvmProblem p = l4_toy(1e-2, 100.0);
  RunConfig cfg;
  cfg.eps = 1e-2;
  EXPECT_THROW(run_restarted(p, cfg), std::runtime_error);
}
