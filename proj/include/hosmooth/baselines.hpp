#pragma once

// First-order baselines: Nesterov's accelerated gradient on the smoothed
// problem and a normalized subgradient method on the exact one.

#include "hosmooth/accel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hosmooth {

struct BaselineConfig {
  double eps = 1e-2;
  int max_iter = 10000;
  /// Lipschitz constant of grad f_mu in the Euclidean norm; <= 0 uses prob.l1().
  double l1 = 0.0;
  /// Subgradient step scale: eta_k = eta0 / sqrt(k + 1).
  double eta0 = 1.0;
  /// Stop once f (subgradient) or f_mu (AGD) reaches this value; NaN disables.
  double f_target = std::numeric_limits<double>::quiet_NaN();
  /// AGD also stops once the certified gap reaches eps/2.
  bool certified_stop = true;
  Vector x0;
  TraceSink trace;
};

/// Accelerated gradient (similar triangles form) with fixed step 1/L1:
///   a = (1 + sqrt(1 + 4 L1 A)) / (2 L1),  y = (A x + a v) / (A + a),
///   v = x0 - sum_i a_i g_i,               x+ = (A x + a v+) / (A + a).
/// Gradients at y feed the same lower envelope and certified gap as run().
/// The sequence itself is not monotone in f_mu; the report and trace follow
/// the best iterate so far, and the gap is certified there.
template <SmoothProblem P>
SolverReport agd_run(const P& prob, const BaselineConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("agd_run: eps must be positive");
  const double l1 = cfg.l1 > 0.0 ? cfg.l1 : prob.l1();
  if (!(l1 > 0.0) || !std::isfinite(l1)) throw std::invalid_argument("agd_run: L1 must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig sink;
  sink.trace = cfg.trace;

  SolverReport report;
  report.method = "agd";
  const Vector x0 = cfg.x0.size() ? cfg.x0 : Vector::Zero(prob.dim());
  require_dim(x0.size(), prob.dim(), "agd_run x0");
  Vector x = x0;
  Vector v = x0;
  Vector g_acc = Vector::Zero(prob.dim());
  LowerEnvelope env(prob.dim());
  double big_a = 0.0;
  const auto at_x0 = prob.local(x);
  double fx = at_x0.value();
  Vector best = x;
  double f_best = fx;
  Vector g_best = at_x0.gradient();
  const double gap0 = certified_gap(prob, env, x, fx, g_best);
  report.gap_est = gap0;

  auto finish = [&](Status s) {
    report.status = s;
    report.x = best;
    report.f_mu = f_best;
    report.f = prob.exact_value(best);
    return report;
  };
  auto reached_target = [&] { return std::isfinite(cfg.f_target) && f_best <= cfg.f_target; };

  {
    TracePoint tp;
    tp.f = prob.exact_value(x);
    tp.f_mu = fx;
    tp.gap_est = gap0;
    tp.big_a = 0.0;
    tp.wall_s = detail::seconds_since(t0);
    detail::emit(report, sink, tp);
  }
  if (reached_target() || (cfg.certified_stop && gap0 <= cfg.eps / 2.0) || at_x0.gradient().isZero(0.0))
    return finish(Status::Converged);

  for (int k = 0; k < cfg.max_iter; ++k) {
    const double a = (1.0 + std::sqrt(1.0 + 4.0 * l1 * big_a)) / (2.0 * l1);
    const double next_a = big_a + a;
    const Vector y = (big_a * x + a * v) / next_a;
    const auto loc = prob.local(y);
    const Vector& g = loc.gradient();
    env.add(a, loc.value(), g, y);
    g_acc += a * g;
    v = x0 - g_acc;
    x = (big_a * x + a * v) / next_a;
    big_a = next_a;
    const auto at_x = prob.local(x);
    fx = at_x.value();
    if (fx <= f_best) {
      best = x;
      f_best = fx;
      g_best = at_x.gradient();
    }

    const double gap = certified_gap(prob, env, best, f_best, g_best);
    report.iterations = k + 1;
    report.gap_est = gap;

    TracePoint tp;
    tp.iter = k + 1;
    tp.f = prob.exact_value(best);
    tp.f_mu = f_best;
    tp.gap_est = gap;
    tp.a = a;
    tp.big_a = big_a;
    tp.f_mu_y = loc.value();
    tp.wall_s = detail::seconds_since(t0);
    detail::emit(report, sink, tp);

    if (reached_target() || (cfg.certified_stop && gap <= cfg.eps / 2.0) || g.isZero(0.0))
      return finish(Status::Converged);
  }
  return finish(Status::CapReached);
}

/// Subgradient method on the exact objective with normalized steps
/// x+ = x - eta0/sqrt(k+1) * g/||g||_2. Reports the best iterate seen; ties
/// keep the earlier point. Subgradient choice at kinks follows the problem's
/// exact_subgradient (lowest index for max ties, zero at hinge kinks).
template <SmoothProblem P>
SolverReport subgradient_run(const P& prob, const BaselineConfig& cfg) {
  if (!(cfg.eta0 > 0.0)) throw std::invalid_argument("subgradient_run: eta0 must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig sink;
  sink.trace = cfg.trace;

  SolverReport report;
  report.method = "subgradient";
  Vector x = cfg.x0.size() ? cfg.x0 : Vector::Zero(prob.dim());
  require_dim(x.size(), prob.dim(), "subgradient_run x0");
  Vector best = x;
  double f_best = prob.exact_value(x);

  auto finish = [&](Status s) {
    report.status = s;
    report.x = best;
    report.f = f_best;
    report.f_mu = prob.value(best);
    return report;
  };
  auto row = [&](int iter) {
    TracePoint tp;
    tp.iter = iter;
    tp.f = f_best;
    tp.f_mu = std::numeric_limits<double>::quiet_NaN();
    tp.gap_est = std::numeric_limits<double>::quiet_NaN();
    tp.wall_s = detail::seconds_since(t0);
    detail::emit(report, sink, tp);
  };
  row(0);
  if (std::isfinite(cfg.f_target) && f_best <= cfg.f_target) return finish(Status::Converged);

  for (int k = 0; k < cfg.max_iter; ++k) {
    const Vector g = prob.exact_subgradient(x);
    const double gn = g.norm();
    if (gn == 0.0) {
      report.iterations = k;
      return finish(Status::Converged);
    }
    x -= (cfg.eta0 / std::sqrt(static_cast<double>(k) + 1.0) / gn) * g;
    const double f = prob.exact_value(x);
    if (f < f_best) {
      f_best = f;
      best = x;
    }
    report.iterations = k + 1;
    row(k + 1);
    if (std::isfinite(cfg.f_target) && f_best <= cfg.f_target) return finish(Status::Converged);
  }
  return finish(Status::CapReached);
}

}  // namespace hosmooth
