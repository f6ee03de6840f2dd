#pragma once

// Third-order Taylor model with quartic regularization,
//   Omega(h) = f(x) + <g,h> + 1/2 D2f[h,h] + 1/6 D3f[h,h,h] + (L3/4) ||h||_B^4,
// and a shifted-Newton minimizer for it.

#include "hosmooth/objectives.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hosmooth {

struct ModelSolveOptions {
  /// Stationarity target on ||grad Omega(h)||_{B^-1}; <= 0 selects
  /// 1e-8 * (1 + ||grad f(x)||_{B^-1}).
  double tol = 0.0;
  int max_iter = 200;
  double armijo = 1e-4;
  int max_halvings = 60;
};

struct ModelSolution {
  Vector h;
  int inner_iters = 0;
  double residual = 0.0;  // ||grad Omega(h)||_{B^-1}
  double value = 0.0;     // Omega(h)
};

/// Thrown when the inner iteration cap is hit; carries the best point found.
struct InnerSolveError : std::runtime_error {
  InnerSolveError(const std::string& what, ModelSolution best) : std::runtime_error(what), best(std::move(best)) {}
  ModelSolution best;
};

template <SmoothProblem P>
class QuarticModel {
 public:
  using Local = decltype(std::declval<const P&>().local(std::declval<const Vector&>()));

  QuarticModel(const P& prob, Vector center)
      : prob_(&prob), center_(std::move(center)), local_(prob.local(center_)), l3_(prob.l3()) {}

  const Vector& center() const { return center_; }
  const Local& local() const { return local_; }
  double l3() const { return l3_; }
  double center_value() const { return local_.value(); }
  const Vector& center_gradient() const { return local_.gradient(); }

  double value(const Vector& h) const { return local_.value() + increment(h); }

  /// Omega(h) - f(x); line searches compare these to avoid cancellation
  /// against f(x).
  double increment(const Vector& h) const {
    require_dim(h.size(), prob_->dim(), "model_value");
    const double r2 = prob_->norm().squared_norm(h);
    return local_.gradient().dot(h) + 0.5 * local_.hess_form(h) + local_.third_form(h).scalar / 6.0 +
           0.25 * l3_ * r2 * r2;
  }

  /// g + D2f h + 1/2 D3f[h,h] + L3 ||h||_B^2 B h
  Vector gradient(const Vector& h) const {
    require_dim(h.size(), prob_->dim(), "model_grad");
    const double r2 = prob_->norm().squared_norm(h);
    return local_.gradient() + local_.hess_apply(h) + 0.5 * local_.third_form(h).vec +
           l3_ * r2 * prob_->norm().apply(h);
  }

  /// Damped Newton descent from h = 0 on Omega, with the third-derivative
  /// term left out of the Newton matrix (see newton_step) and Armijo
  /// backtracking on Omega.
  ModelSolution minimize(const ModelSolveOptions& opt = {}) const {
    const NormMatrix& b = prob_->norm();
    const double tol =
        opt.tol > 0.0 ? opt.tol : 1e-8 * (1.0 + b.dual_norm(local_.gradient()));

    ModelSolution cur;
    cur.h = Vector::Zero(prob_->dim());
    double inc = 0.0;
    Vector grad = local_.gradient();
    cur.residual = b.dual_norm(grad);

    for (int it = 0; it < opt.max_iter; ++it) {
      if (cur.residual <= tol) break;
      const double r2 = b.squared_norm(cur.h);
      const Vector step = newton_step(cur.h, r2, grad);
      const double slope = grad.dot(step);
      double t = 1.0;
      bool accepted = false;
      for (int k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
        const Vector trial = cur.h - t * step;
        const double v = increment(trial);
        if (v <= inc - opt.armijo * t * slope) {
          cur.h = trial;
          inc = v;
          accepted = true;
          break;
        }
      }
      ++cur.inner_iters;
      if (!accepted) break;
      grad = gradient(cur.h);
      cur.residual = b.dual_norm(grad);
    }
    cur.value = local_.value() + inc;
    if (cur.residual <= tol) return cur;
    throw InnerSolveError("minimize_model: residual " + std::to_string(cur.residual) + " above tolerance " +
                              std::to_string(tol) + " after " + std::to_string(cur.inner_iters) + " iterations",
                          cur);
  }

 private:
  // Solves (D2f + L3 ||h||^2 B + 2 L3 (Bh)(Bh)') s = r: the problem's shifted
  // solve with sqrt(2) lam = L3 ||h||^2, plus a Sherman-Morrison correction
  // for the rank-one part. At h = 0 the shift would vanish, so it is set to
  // the scale of the pure quartic step, ||h||_B = (||g|| / L3)^{1/3}.
  Vector newton_step(const Vector& h, double r2, const Vector& r) const {
    if (r2 <= 0.0) {
      const double g = prob_->norm().dual_norm(r);
      return local_.solve_shifted(std::cbrt(l3_ * g * g), Matrix(r)).col(0);
    }
    Matrix rhs(r.size(), 2);
    rhs.col(0) = r;
    rhs.col(1) = std::sqrt(2.0 * l3_) * prob_->norm().apply(h);
    const Matrix sol = local_.solve_shifted(l3_ * r2 / std::sqrt(2.0), rhs);
    const auto w = rhs.col(1);
    return sol.col(0) - sol.col(1) * (w.dot(sol.col(0)) / (1.0 + w.dot(sol.col(1))));
  }

  const P* prob_;
  Vector center_;
  Local local_;
  double l3_;
};

template <SmoothProblem P>
double model_value(const QuarticModel<P>& model, const Vector& h) {
  return model.value(h);
}

template <SmoothProblem P>
Vector model_grad(const QuarticModel<P>& model, const Vector& h) {
  return model.gradient(h);
}

template <SmoothProblem P>
ModelSolution minimize_model(const QuarticModel<P>& model, const ModelSolveOptions& opt = {}) {
  return model.minimize(opt);
}

}  // namespace hosmooth
