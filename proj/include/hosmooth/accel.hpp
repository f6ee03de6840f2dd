#pragma once

// Accelerated third-order method: an estimate sequence
//   psi_k(x) = 1/2 ||x - x0||_B^2 + sum_i a_i [f(x_i) + <grad f(x_i), x - x_i>]
// whose minimizer v_k steers the extrapolation point y_k, a search over rho
// coupling the step weight a_{k+1} to the realized model step, and a
// restart wrapper for uniformly convex problems.

#include "hosmooth/taylor_model.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hosmooth {

enum class Status { Converged, CapReached, InnerFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Converged: return "Converged";
    case Status::CapReached: return "CapReached";
    case Status::InnerFailure: return "InnerFailure";
  }
  return "Unknown";
}

/// One row of a solver trace. disp and f_mu_y are left at NaN by methods
/// that have no model step.
struct TracePoint {
  int iter = 0;
  double wall_s = 0.0;
  double f = 0.0;       // exact objective at the reported iterate
  double f_mu = 0.0;    // smoothed objective at the reported iterate
  double gap_est = 0.0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double a = std::numeric_limits<double>::quiet_NaN();
  double big_a = std::numeric_limits<double>::quiet_NaN();
  int inner_iters = 0;
  double disp = std::numeric_limits<double>::quiet_NaN();     // ||x_{k+1} - y_k||_B^2
  double f_mu_y = std::numeric_limits<double>::quiet_NaN();   // f_mu(y_k)
  double f_mu_step = std::numeric_limits<double>::quiet_NaN();  // f_mu(y_k + h_k)
  int epoch = 0;
};

using TraceSink = std::function<void(const TracePoint&)>;

struct RunConfig {
  double eps = 1e-2;
  int max_iter = 1000;
  double theta = 2.0;
  /// Model stationarity tolerance; <= 0 selects the model's default.
  double inner_tol = 0.0;
  int inner_max_iter = 200;
  int max_rho_probes = 60;
  /// Starting point; empty means the origin.
  Vector x0;
  /// Restart settings (uniformly convex problems only).
  double restart_c = 8.0;
  int max_epochs = 100;
  std::uint64_t seed = 1;
  TraceSink trace;
};

struct SolverReport {
  std::string method;
  Status status = Status::CapReached;
  Vector x;
  double f = 0.0;
  double f_mu = 0.0;
  double gap_est = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int inner_iters = 0;
  int epochs = 0;
  int epoch_budget = 0;
  std::string message;
  std::vector<TracePoint> trace;
};

/// Positive root of L3 rho a^2 = A + a:  a = (1 + sqrt(1 + 4 L3 A rho)) / (2 L3 rho).
inline double step_a(double big_a, double l3, double rho) {
  if (!(l3 > 0.0) || !(rho > 0.0)) throw std::invalid_argument("step_a: L3 and rho must be positive");
  if (!(big_a >= 0.0)) throw std::invalid_argument("step_a: A must be non-negative");
  const double lr = l3 * rho;
  return (1.0 + std::sqrt(1.0 + 4.0 * lr * big_a)) / (2.0 * lr);
}

/// Running weighted sum of supporting hyperplanes sum_i a_i [f_i + <g_i, x - x_i>].
class LowerEnvelope {
 public:
  explicit LowerEnvelope(Eigen::Index dim) : g_acc_(Vector::Zero(dim)) {}

  void add(double a, double f, const Vector& g, const Vector& x) {
    g_acc_ += a * g;
    c_acc_ += a * (f - g.dot(x));
    weight_ += a;
  }

  const Vector& gradient_sum() const { return g_acc_; }
  double constant() const { return c_acc_; }
  double weight() const { return weight_; }

  /// Weighted average of the hyperplanes at x; a lower bound on f(x) for
  /// convex f.
  double value(const Vector& x) const {
    if (weight_ <= 0.0) return -std::numeric_limits<double>::infinity();
    return (g_acc_.dot(x) + c_acc_) / weight_;
  }

  /// Minimum of value() over the B-ball.
  double min_over(const LevelBall& ball, const NormMatrix& b) const {
    if (weight_ <= 0.0) return -std::numeric_limits<double>::infinity();
    return value(ball.center) - ball.radius * b.dual_norm(g_acc_) / weight_;
  }

 private:
  Vector g_acc_;
  double c_acc_ = 0.0;
  double weight_ = 0.0;
};

/// psi_k(x) = 1/2 ||x - x0||_B^2 + sum_i a_i [f(x_i) + <g_i, x - x_i>].
class EstimateSequence {
 public:
  EstimateSequence(Vector x0, const NormMatrix& b) : x0_(std::move(x0)), b_(&b), env_(x0_.size()) {}

  const Vector& anchor() const { return x0_; }
  const LowerEnvelope& envelope() const { return env_; }
  const Vector& gradient_sum() const { return env_.gradient_sum(); }
  double weight() const { return env_.weight(); }

  /// v_k = x0 - B^{-1} g_acc
  Vector minimizer() const { return x0_ - b_->solve(env_.gradient_sum()); }

  /// psi += a [f + <g, . - x>]
  void add(double a, double f, const Vector& g, const Vector& x) { env_.add(a, f, g, x); }

  double value(const Vector& x) const {
    const double r = b_->norm(x - x0_);
    return 0.5 * r * r + env_.gradient_sum().dot(x) + env_.constant();
  }

  double lower_envelope(const Vector& x) const { return env_.value(x); }

 private:
  Vector x0_;
  const NormMatrix* b_;
  LowerEnvelope env_;
};

struct RhoSearchResult {
  double rho = 0.0;
  double a = 0.0;
  Vector y;
  Vector x_next;
  double disp = 0.0;
  double f_y = 0.0;
  int probes = 0;
  int inner_iters = 0;
  // Last bracket on rho; 0 / inf for an open side.
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

struct RhoSearchError : std::runtime_error {
  RhoSearchError(const std::string& what, double lo, double hi) : std::runtime_error(what), lo(lo), hi(hi) {}
  double lo;
  double hi;
};

/// Finds rho with rho/theta <= ||x_{k+1} - y_k||_B^2 <= theta rho where
/// y_k = (1 - tau) x_k + tau v_k, tau = a/(A_k + a), a = step_a(A_k, L3, rho),
/// and x_{k+1} = y_k + argmin Omega_{y_k}. Proposals follow rho <- disp(rho)
/// until the target is bracketed, then bisect on log rho.
template <SmoothProblem P>
RhoSearchResult rho_search(const P& prob, const Vector& x, const Vector& v, double big_a, double rho_guess,
                           const RunConfig& cfg) {
  if (!(cfg.theta > 1.0)) throw std::invalid_argument("rho_search: theta must exceed 1");
  const double l3 = prob.l3();
  ModelSolveOptions opt;
  opt.tol = cfg.inner_tol;
  opt.max_iter = cfg.inner_max_iter;

  RhoSearchResult out;
  double rho = rho_guess;
  int inner_total = 0;
  for (int probe = 1; probe <= cfg.max_rho_probes; ++probe) {
    const double a = step_a(big_a, l3, rho);
    const double tau = a / (big_a + a);
    Vector y = (1.0 - tau) * x + tau * v;
    const QuarticModel<P> model(prob, y);
    ModelSolution sol = model.minimize(opt);
    inner_total += sol.inner_iters;
    const double disp = prob.norm().squared_norm(sol.h);

    const bool inside = disp >= rho / cfg.theta && disp <= cfg.theta * rho;
    if (inside || disp == 0.0) {
      out.rho = rho;
      out.a = a;
      out.x_next = y + sol.h;
      out.f_y = model.center_value();
      out.y = std::move(y);
      out.disp = disp;
      out.probes = probe;
      out.inner_iters = inner_total;
      return out;
    }
    if (disp > rho) {
      out.lo = rho;
    } else {
      out.hi = rho;
    }
    if (out.lo > 0.0 && std::isfinite(out.hi)) {
      rho = std::sqrt(out.lo * out.hi);
    } else {
      rho = disp;
    }
  }
  throw RhoSearchError("rho_search: window not reached after " + std::to_string(cfg.max_rho_probes) +
                           " probes, bracket [" + std::to_string(out.lo) + ", " + std::to_string(out.hi) + "]",
                       out.lo, out.hi);
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void emit(SolverReport& report, const RunConfig& cfg, const TracePoint& tp) {
  report.trace.push_back(tp);
  if (cfg.trace) cfg.trace(tp);
}

}  // namespace detail

/// Upper bound on f_mu(x) - min f_mu. The ball contains {f_mu <= f_mu(x)} and
/// hence a minimizer; two bounds are taken over it, the averaged lower envelope
/// and the gradient inequality f(x) - f* <= ||g||_* ||x - x*||.
template <SmoothProblem P>
double certified_gap(const P& prob, const LowerEnvelope& env, const Vector& x, double f_mu, const Vector& grad) {
  const LevelBall ball = prob.level_ball(f_mu);
  const NormMatrix& b = prob.norm();
  const double by_envelope = f_mu - env.min_over(ball, b);
  const double by_gradient = b.dual_norm(grad) * (b.norm(x - ball.center) + ball.radius);
  return std::max(0.0, std::min(by_envelope, by_gradient));
}

/// Accelerated third-order method on the smoothed problem. Stops when the
/// certified gap f_mu(x_k) - min_{ball} l_k drops to eps/2, where l_k is the
/// averaged lower envelope of psi_k. Reported iterates are monotone in f_mu:
/// a step that does not decrease f_mu still enters psi but is not adopted.
template <SmoothProblem P>
SolverReport run(const P& prob, const RunConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("run: eps must be positive");
  if (!(cfg.theta > 1.0)) throw std::invalid_argument("run: theta must exceed 1");
  const auto t0 = std::chrono::steady_clock::now();
  const NormMatrix& b = prob.norm();
  const double l3 = prob.l3();

  SolverReport report;
  report.method = "accel";
  Vector x = cfg.x0.size() ? cfg.x0 : Vector::Zero(prob.dim());
  require_dim(x.size(), prob.dim(), "run x0");

  EstimateSequence psi(x, b);
  auto loc = prob.local(x);
  double fx = loc.value();
  Vector gx = loc.gradient();
  const double g0 = b.dual_norm(gx);

  auto finish = [&](Status s, double gap) {
    report.status = s;
    report.x = x;
    report.f_mu = fx;
    report.f = prob.exact_value(x);
    report.gap_est = gap;
    return report;
  };

  const double gap0 = g0 == 0.0 ? 0.0 : certified_gap(prob, psi.envelope(), x, fx, gx);
  report.gap_est = gap0;
  {
    TracePoint tp;
    tp.iter = 0;
    tp.f = prob.exact_value(x);
    tp.f_mu = fx;
    tp.gap_est = gap0;
    tp.big_a = 0.0;
    tp.wall_s = detail::seconds_since(t0);
    detail::emit(report, cfg, tp);
  }
  if (gap0 <= cfg.eps / 2.0) return finish(Status::Converged, gap0);

  double rho = std::clamp(g0 * g0 / std::cbrt(l3 * l3), 1e-12, 1e12);
  for (int k = 0; k < cfg.max_iter; ++k) {
    const Vector v = psi.minimizer();
    RhoSearchResult step;
    try {
      step = rho_search(prob, x, v, psi.weight(), rho, cfg);
    } catch (const InnerSolveError& e) {
      report.message = e.what();
      return finish(Status::InnerFailure, report.gap_est);
    } catch (const RhoSearchError& e) {
      report.message = e.what();
      return finish(Status::InnerFailure, report.gap_est);
    } catch (const NotSpdError& e) {
      report.message = e.what();
      return finish(Status::InnerFailure, report.gap_est);
    }
    rho = step.rho;
    report.inner_iters += step.inner_iters;

    const auto cand = prob.local(step.x_next);
    psi.add(step.a, cand.value(), cand.gradient(), step.x_next);
    if (cand.value() <= fx) {
      x = step.x_next;
      fx = cand.value();
      gx = cand.gradient();
    }
    const double gap = certified_gap(prob, psi.envelope(), x, fx, gx);
    report.iterations = k + 1;
    report.gap_est = gap;

    TracePoint tp;
    tp.iter = k + 1;
    tp.f = prob.exact_value(x);
    tp.f_mu = fx;
    tp.gap_est = gap;
    tp.rho = step.rho;
    tp.a = step.a;
    tp.big_a = psi.weight();
    tp.inner_iters = step.inner_iters;
    tp.disp = step.disp;
    tp.f_mu_y = step.f_y;
    tp.f_mu_step = cand.value();
    tp.wall_s = detail::seconds_since(t0);
    detail::emit(report, cfg, tp);

    if (gap <= cfg.eps / 2.0 || step.disp == 0.0) return finish(Status::Converged, gap);
  }
  return finish(Status::CapReached, report.gap_est);
}

/// Restarted runs for uniformly convex problems (problem.sigma4() > 0). Each
/// epoch runs at most ceil(c kappa4^{1/5}) iterations from the previous
/// epoch's best point with a fresh estimate sequence.
template <SmoothProblem P>
SolverReport run_restarted(const P& prob, const RunConfig& cfg) {
  const double sigma4 = prob.sigma4();
  if (!(sigma4 > 0.0)) throw std::invalid_argument("run_restarted: sigma4 must be positive");
  {
    Rng rng(cfg.seed);
    const double worst = sampled_uniform_convexity(prob, rng, 200);
    if (worst < sigma4) {
      throw std::runtime_error("run_restarted: sampled uniform convexity " + std::to_string(worst) +
                               " falsifies sigma4 = " + std::to_string(sigma4));
    }
  }
  const double kappa = prob.l3() / sigma4;
  const int budget = static_cast<int>(std::ceil(cfg.restart_c * std::pow(kappa, 0.2)));

  SolverReport report;
  report.method = "accel-restart";
  report.epoch_budget = budget;
  Vector x = cfg.x0.size() ? cfg.x0 : Vector::Zero(prob.dim());

  int offset = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    RunConfig sub = cfg;
    sub.x0 = x;
    sub.max_iter = budget;
    sub.trace = nullptr;
    SolverReport r = run(prob, sub);
    for (TracePoint tp : r.trace) {
      if (epoch > 1 && tp.iter == 0) continue;  // the anchor row repeats the previous epoch's end
      tp.iter += offset;
      tp.epoch = epoch;
      detail::emit(report, cfg, tp);
    }
    offset += r.iterations;
    report.iterations = offset;
    report.inner_iters += r.inner_iters;
    report.epochs = epoch;
    const double before = prob.value(x);
    x = r.x;
    report.x = r.x;
    report.f = r.f;
    report.f_mu = r.f_mu;
    report.gap_est = r.gap_est;
    report.message = r.message;
    if (r.status == Status::Converged || r.status == Status::InnerFailure) {
      report.status = r.status;
      return report;
    }
    if (!(r.f_mu < before)) {
      report.status = Status::CapReached;
      report.message = "restart epoch made no progress";
      return report;
    }
  }
  report.status = Status::CapReached;
  return report;
}

}  // namespace hosmooth
