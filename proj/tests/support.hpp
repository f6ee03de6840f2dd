#pragma once

// Shared test fixtures: a quadratic problem with known minimizer, an
// extended-precision softmax for finite-difference oracles, and reference
// optima of the generated instances.

#include "hosmooth/harness.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace hosmooth::testing {

/// f(x) = 1/2 x'Qx - c'x with a configurable L3 for the quartic model.
class QuadraticProblem {
 public:
  class Local {
   public:
    Local(const QuadraticProblem& p, const Vector& x) : p_(&p), value_(0.5 * x.dot(p.q_ * x) - p.c_.dot(x)), grad_(p.q_ * x - p.c_) {}
    double value() const { return value_; }
    const Vector& gradient() const { return grad_; }
    Vector hess_apply(const Vector& h) const { return p_->q_ * h; }
    double hess_form(const Vector& h) const { return h.dot(p_->q_ * h); }
    ThirdForm third_form(const Vector& h) const { return {Vector::Zero(h.size()), 0.0}; }
    double fourth_dir(const Vector&) const { return 0.0; }
    Matrix solve_shifted(double lambda, const Matrix& rhs) const {
      const Matrix m = p_->q_ + std::sqrt(2.0) * lambda * Matrix::Identity(p_->q_.rows(), p_->q_.cols());
      return solve_spd(m, rhs);
    }

   private:
    const QuadraticProblem* p_;
    double value_;
    Vector grad_;
  };

  QuadraticProblem(Matrix q, Vector c, double l3)
      : q_(std::move(q)), c_(std::move(c)), l3_(l3), norm_(NormMatrix::identity(c_.size())) {}

  std::string name() const { return "quadratic"; }
  Eigen::Index dim() const { return c_.size(); }
  const NormMatrix& norm() const { return norm_; }
  double mu() const { return 1.0; }
  double l3() const { return l3_; }
  double l1() const { return Eigen::SelfAdjointEigenSolver<Matrix>(q_).eigenvalues().maxCoeff(); }
  double value(const Vector& x) const { return 0.5 * x.dot(q_ * x) - c_.dot(x); }
  double exact_value(const Vector& x) const { return value(x); }
  Vector exact_subgradient(const Vector& x) const { return q_ * x - c_; }
  Local local(const Vector& x) const { return Local(*this, x); }
  Vector minimizer() const { return solve_spd(q_, c_); }
  LevelBall level_ball(double level) const {
    const Vector xs = minimizer();
    const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(q_).eigenvalues().minCoeff();
    return {xs, std::sqrt(2.0 * std::max(level - value(xs), 0.0) / lo)};
  }

 private:
  Matrix q_;
  Vector c_;
  double l3_;
  NormMatrix norm_;
};

static_assert(SmoothProblem<QuadraticProblem>);

/// mu log sum exp(z_i / mu) in long double, written independently of the
/// library (plain max shift, no caching).
inline long double smax_ld(const std::vector<long double>& z, long double mu) {
  long double top = z[0];
  for (long double v : z) top = std::max(top, v);
  long double s = 0.0L;
  for (long double v : z) s += std::exp((v - top) / mu);
  return top + mu * std::log(s);
}

/// k-th derivative at t = 0 of phi(t) = smax(z + t h), by Richardson-combined
/// central differences (step eta and eta/2) in long double.
inline double smax_directional_fd(const Vector& z, const Vector& h, double mu, int k, double eta) {
  auto phi = [&](long double t) {
    std::vector<long double> w(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i)
      w[std::size_t(i)] = static_cast<long double>(z(i)) + t * static_cast<long double>(h(i));
    return smax_ld(w, mu);
  };
  auto central = [&](long double s) -> long double {
    switch (k) {
      case 1: return (phi(s) - phi(-s)) / (2 * s);
      case 2: return (phi(s) - 2 * phi(0) + phi(-s)) / (s * s);
      case 3: return (phi(2 * s) - 2 * phi(s) + 2 * phi(-s) - phi(-2 * s)) / (2 * s * s * s);
      case 4: return (phi(2 * s) - 4 * phi(s) + 6 * phi(0) - 4 * phi(-s) + phi(-2 * s)) / (s * s * s * s);
    }
    return 0.0L;
  };
  const long double coarse = central(eta);
  const long double fine = central(eta / 2);
  return static_cast<double>((4 * fine - coarse) / 3);
}

/// Central difference with one Richardson step, for double-valued scalar maps.
template <typename F>
double richardson_derivative(F&& f, double eta) {
  const double coarse = (f(eta) - f(-eta)) / (2.0 * eta);
  const double fine = (f(eta / 2) - f(-eta / 2)) / eta;
  return (4.0 * fine - coarse) / 3.0;
}

inline Vector random_direction(Rng& rng, Eigen::Index n) {
  Vector h = rng.normal_vector(n);
  return h / h.norm();
}

// Optima of generated instances, from an external LP solver (HiGHS, primal
// and dual feasibility 1e-10) on the files written by `hosmooth gen`.
inline constexpr double kLinf200x50Seed42 = 1.3583824306809227;
inline constexpr double kLinf40x10Seed42 = 0.9744594044157195;
inline constexpr double kLinf12x10Seed42 = 0.14630846696862754;
inline constexpr double kL1SvmSep40x10Seed7Lambda01 = 0.26206946870285935;
inline constexpr double kL1SvmNoisy40x10Seed7Lambda01 = 0.5465618995123798;
inline constexpr double kL1SvmSep20x5Seed7Lambda05 = 0.706353301807405;

}  // namespace hosmooth::testing
