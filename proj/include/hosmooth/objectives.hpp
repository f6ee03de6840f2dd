#pragma once

// Smoothed non-smooth objectives: l_inf regression, l1-regularized SVM and
// l4-regularized SVM. Each problem exposes a local oracle at a point (value,
// gradient, Hessian and third-derivative contractions, fourth directional
// derivative, shifted-Hessian solve), its norm matrix B, the smoothing
// parameter mu, and the order-3 smoothness constant L3.

#include "hosmooth/dense.hpp"
#include "hosmooth/rng.hpp"
#include "hosmooth/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <optional>
#include <vector>

namespace hosmooth {

/// Ball {x : ||x - center||_B <= radius} containing a sublevel set of f_mu.
struct LevelBall {
  Vector center;
  double radius = 0.0;
};

template <typename L>
concept LocalOracle = requires(const L& loc, const Vector& h, double lambda) {
  { loc.value() } -> std::convertible_to<double>;
  { loc.gradient() } -> std::convertible_to<const Vector&>;
  { loc.hess_apply(h) } -> std::convertible_to<Vector>;
  { loc.hess_form(h) } -> std::convertible_to<double>;
  { loc.third_form(h) } -> std::same_as<ThirdForm>;
  { loc.fourth_dir(h) } -> std::convertible_to<double>;
  { loc.solve_shifted(lambda, Matrix(h)) } -> std::convertible_to<Matrix>;
};

template <typename P>
concept SmoothProblem = requires(const P& prob, const Vector& x) {
  { prob.name() } -> std::convertible_to<std::string>;
  { prob.dim() } -> std::convertible_to<Eigen::Index>;
  { prob.norm() } -> std::convertible_to<const NormMatrix&>;
  { prob.mu() } -> std::convertible_to<double>;
  { prob.l3() } -> std::convertible_to<double>;
  { prob.l1() } -> std::convertible_to<double>;
  { prob.value(x) } -> std::convertible_to<double>;
  { prob.exact_value(x) } -> std::convertible_to<double>;
  { prob.exact_subgradient(x) } -> std::convertible_to<Vector>;
  { prob.local(x) } -> LocalOracle;
  { prob.level_ball(1.0) } -> std::same_as<LevelBall>;
};

// ---------------------------------------------------------------------------
// l_inf regression

/// min ||A~ x - b~||_inf smoothed as smax_mu(A x - b) with A = [A~; -A~] and
/// b = [b~; -b~]. B = A'A, L3 = 15 / mu^3.
class LinfProblem {
 public:
  class Local {
   public:
    Local(const LinfProblem& prob, const Vector& x)
        : prob_(&prob), state_(prob.a_ * x - prob.b_, prob.mu_), grad_(prob.a_.transpose() * state_.p()) {}

    double value() const { return state_.value(); }
    const Vector& gradient() const { return grad_; }
    const SoftmaxState& softmax() const { return state_; }

    Vector hess_apply(const Vector& h) const {
      return prob_->a_.transpose() * smax_hess_apply(state_, prob_->a_ * h);
    }
    double hess_form(const Vector& h) const {
      const Vector u = prob_->a_ * h;
      return smax_hess_form(state_, u, u);
    }
    ThirdForm third_form(const Vector& h) const {
      ThirdForm t = smax_third_form(state_, prob_->a_ * h);
      t.vec = prob_->a_.transpose() * t.vec;
      return t;
    }
    double fourth_dir(const Vector& h) const { return smax_fourth_dir(state_, prob_->a_ * h); }

    /// (Hessian + sqrt(2) lambda A'A)^{-1} V through the structured solver.
    Matrix solve_shifted(double lambda, const Matrix& v) const {
      return solve_shifted_softmax_hessian(prob_->a_, state_.p(), prob_->mu_, lambda, v);
    }

   private:
    const LinfProblem* prob_;
    SoftmaxState state_;
    Vector grad_;
  };

  /// Uses the given mu directly; build_linf derives mu from a target accuracy.
  LinfProblem(Matrix a_tilde, Vector b_tilde, double mu)
      : a_tilde_(std::move(a_tilde)), b_tilde_(std::move(b_tilde)), mu_(mu), norm_(NormMatrix::identity(1)) {
    require_finite(a_tilde_, "LinfProblem matrix");
    require_finite(b_tilde_, "LinfProblem rhs");
    require_dim(b_tilde_.size(), a_tilde_.rows(), "LinfProblem rhs");
    if (!(mu_ > 0.0)) throw std::invalid_argument("LinfProblem: mu must be positive");
    const auto m = a_tilde_.rows();
    const auto d = a_tilde_.cols();
    a_.resize(2 * m, d);
    a_ << a_tilde_, -a_tilde_;
    b_.resize(2 * m);
    b_ << b_tilde_, -b_tilde_;
    // Rejects rank-deficient A~ (A'A = 2 A~'A~).
    norm_ = NormMatrix::gram(a_);
    l3_ = 15.0 / (mu_ * mu_ * mu_);
    gram_top_ = top_eigenvalue(a_.transpose() * a_);
  }

  std::string name() const { return "linf"; }
  Eigen::Index dim() const { return a_.cols(); }
  /// Stacked row count, the m in every log m factor.
  Eigen::Index stacked_rows() const { return a_.rows(); }
  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const Matrix& a_tilde() const { return a_tilde_; }
  const Vector& b_tilde() const { return b_tilde_; }
  const NormMatrix& norm() const { return norm_; }
  double mu() const { return mu_; }
  double l3() const { return l3_; }
  /// First-order smoothness in the Euclidean norm, ||A'A|| / mu.
  double l1() const { return gram_top_ / mu_; }
  /// Additive gap mu log m between the smoothed and exact objectives.
  double smoothing_gap() const { return mu_ * std::log(static_cast<double>(a_.rows())); }

  Local local(const Vector& x) const {
    require_dim(x.size(), dim(), "LinfProblem point");
    return Local(*this, x);
  }
  double value(const Vector& x) const {
    require_dim(x.size(), dim(), "LinfProblem point");
    return smax_value(a_ * x - b_, mu_);
  }
  double exact_value(const Vector& x) const {
    require_dim(x.size(), dim(), "LinfProblem point");
    return (a_tilde_ * x - b_tilde_).lpNorm<Eigen::Infinity>();
  }
  /// Ball around the least-squares solution x_ls holding {f_mu <= level}:
  /// ||A~(x - x_ls)||^2 = ||A~x - b~||^2 - ||r_ls||^2 <= m~ level^2 - ||r_ls||^2,
  /// and ||.||_B = sqrt(2) ||A~ .||.
  LevelBall level_ball(double level) const {
    if (!least_squares_) {
      least_squares_ = norm_.solve(a_.transpose() * b_);
      ls_residual_sq_ = (a_tilde_ * *least_squares_ - b_tilde_).squaredNorm();
    }
    const double m = static_cast<double>(a_tilde_.rows());
    const double c = std::max(level, 0.0);
    return {*least_squares_, std::sqrt(2.0 * std::max(m * c * c - ls_residual_sq_, 0.0))};
  }

  /// sign(r_i) a~_i for the lowest index i attaining max |r_i|.
  Vector exact_subgradient(const Vector& x) const {
    const Vector r = a_tilde_ * x - b_tilde_;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < r.size(); ++i)
      if (std::abs(r(i)) > std::abs(r(best))) best = i;
    const double sign = r(best) > 0 ? 1.0 : (r(best) < 0 ? -1.0 : 0.0);
    return sign * a_tilde_.row(best).transpose();
  }

 private:
  Matrix a_tilde_;
  Vector b_tilde_;
  Matrix a_;
  Vector b_;
  double mu_;
  NormMatrix norm_;
  double l3_ = 0.0;
  double gram_top_ = 0.0;
  mutable std::optional<Vector> least_squares_;
  mutable double ls_residual_sq_ = 0.0;
};

/// mu = eps / (2 log m) with m the stacked row count; then solving the
/// smoothed problem to eps/2 solves the exact one to eps.
inline LinfProblem build_linf(Matrix a_tilde, Vector b_tilde, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("build_linf: eps must be positive");
  const double m = 2.0 * static_cast<double>(a_tilde.rows());
  const double mu = eps / (2.0 * std::log(m));
  return LinfProblem(std::move(a_tilde), std::move(b_tilde), mu);
}

// ---------------------------------------------------------------------------
// Soft-margin SVMs

namespace detail {

inline Matrix signed_rows(const Matrix& points, const Vector& labels) {
  require_finite(points, "SVM points");
  require_dim(labels.size(), points.rows(), "SVM labels");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw std::invalid_argument("SVM labels must be +1 or -1 (row " + std::to_string(i) + ")");
    }
  }
  return labels.asDiagonal() * points;
}

// Shared hinge part (1/m) sum_i soft_hinge(1 - (Q x)_i) evaluated at a point.
struct HingePart {
  Vector qx;
  std::vector<ScalarDerivs> k;  // kernel derivatives at 1 - (Qx)_i
  double value = 0.0;
  Vector grad;

  HingePart(const Matrix& q, const Vector& x, double mu) : qx(q * x), k(static_cast<std::size_t>(q.rows())) {
    const double inv_m = 1.0 / static_cast<double>(q.rows());
    Vector w(q.rows());
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      k[static_cast<std::size_t>(i)] = soft_hinge_derivs(1.0 - qx(i), mu);
      value += k[static_cast<std::size_t>(i)].d0;
      w(i) = -k[static_cast<std::size_t>(i)].d1;
    }
    value *= inv_m;
    grad = inv_m * (q.transpose() * w);
  }

  // Derivatives along u = Q h pick up a factor (-1)^order from c = 1 - Qx.
  Vector weights(int order) const {
    Vector w(static_cast<Eigen::Index>(k.size()));
    for (std::size_t i = 0; i < k.size(); ++i) {
      const auto& kd = k[i];
      w(static_cast<Eigen::Index>(i)) = order == 2 ? kd.d2 : (order == 3 ? -kd.d3 : kd.d4);
    }
    return w / static_cast<double>(k.size());
  }
};

inline double exact_hinge(const Matrix& q, const Vector& x) {
  return (1.0 - (q * x).array()).max(0.0).sum() / static_cast<double>(q.rows());
}

// (1/m) sum over strictly active margins of -q_i.
inline Vector hinge_subgradient(const Matrix& q, const Vector& x) {
  const Vector qx = q * x;
  Vector g = Vector::Zero(q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    if (1.0 - qx(i) > 0.0) g -= q.row(i).transpose();
  return g / static_cast<double>(q.rows());
}

inline double sign_or_zero(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace detail

/// f_mu(x) = lambda sum_i soft_abs(x_i) + (1/m) sum_i soft_hinge(1 - (Q x)_i)
/// with Q = diag(labels) * points; B = I, L3 = 15 (lambda d + ||Q'Q||^2) / mu^3.
class L1SvmProblem {
 public:
  class Local {
   public:
    Local(const L1SvmProblem& prob, const Vector& x)
        : prob_(&prob), hinge_(prob.q_, x, prob.mu_), abs_(static_cast<std::size_t>(x.size())) {
      double reg = 0.0;
      grad_ = hinge_.grad;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        auto& a = abs_[static_cast<std::size_t>(j)];
        a = soft_abs_derivs(x(j), prob.mu_);
        reg += a.d0;
        grad_(j) += prob.lambda_ * a.d1;
      }
      value_ = prob.lambda_ * reg + hinge_.value;
    }

    double value() const { return value_; }
    const Vector& gradient() const { return grad_; }

    Vector hess_apply(const Vector& h) const {
      Vector out = prob_->q_.transpose() * hinge_.weights(2).cwiseProduct(prob_->q_ * h);
      for (Eigen::Index j = 0; j < h.size(); ++j) out(j) += prob_->lambda_ * abs_[static_cast<std::size_t>(j)].d2 * h(j);
      return out;
    }
    double hess_form(const Vector& h) const { return h.dot(hess_apply(h)); }
    ThirdForm third_form(const Vector& h) const {
      const Vector u = prob_->q_ * h;
      ThirdForm t;
      t.vec = prob_->q_.transpose() * hinge_.weights(3).cwiseProduct(u.cwiseProduct(u));
      for (Eigen::Index j = 0; j < h.size(); ++j)
        t.vec(j) += prob_->lambda_ * abs_[static_cast<std::size_t>(j)].d3 * h(j) * h(j);
      t.scalar = t.vec.dot(h);
      return t;
    }
    double fourth_dir(const Vector& h) const {
      const Vector u = prob_->q_ * h;
      double out = hinge_.weights(4).dot(u.array().pow(4).matrix());
      for (Eigen::Index j = 0; j < h.size(); ++j)
        out += prob_->lambda_ * abs_[static_cast<std::size_t>(j)].d4 * std::pow(h(j), 4);
      return out;
    }
    Matrix hessian() const {
      Matrix hs = prob_->q_.transpose() * hinge_.weights(2).asDiagonal() * prob_->q_;
      for (Eigen::Index j = 0; j < hs.rows(); ++j) hs(j, j) += prob_->lambda_ * abs_[static_cast<std::size_t>(j)].d2;
      return hs;
    }
    /// (Hessian + sqrt(2) lambda I)^{-1} V
    Matrix solve_shifted(double lambda, const Matrix& v) const {
      Matrix m = hessian();
      m.diagonal().array() += std::sqrt(2.0) * lambda;
      return solve_spd(m, v);
    }

   private:
    const L1SvmProblem* prob_;
    detail::HingePart hinge_;
    std::vector<ScalarDerivs> abs_;
    double value_ = 0.0;
    Vector grad_;
  };

  L1SvmProblem(const Matrix& points, const Vector& labels, double lambda, double mu)
      : q_(detail::signed_rows(points, labels)), lambda_(lambda), mu_(mu), norm_(NormMatrix::identity(points.cols())) {
    if (!(lambda_ > 0.0)) throw std::invalid_argument("L1SvmProblem: lambda must be positive");
    if (!(mu_ > 0.0)) throw std::invalid_argument("L1SvmProblem: mu must be positive");
    qtq_top_ = top_eigenvalue(q_.transpose() * q_);
    const double d = static_cast<double>(q_.cols());
    l3_ = 15.0 * (lambda_ * d + qtq_top_ * qtq_top_) / (mu_ * mu_ * mu_);
  }

  std::string name() const { return "l1svm"; }
  Eigen::Index dim() const { return q_.cols(); }
  Eigen::Index samples() const { return q_.rows(); }
  const Matrix& q() const { return q_; }
  double lambda() const { return lambda_; }
  const NormMatrix& norm() const { return norm_; }
  double mu() const { return mu_; }
  double l3() const { return l3_; }
  double qtq_norm() const { return qtq_top_; }
  double l1() const { return lambda_ / mu_ + qtq_top_ / (static_cast<double>(q_.rows()) * mu_); }
  /// f <= f_mu <= f + mu log2 (lambda d + 1); below 2 mu lambda d once lambda d >= 0.53.
  double smoothing_gap() const {
    return mu_ * std::log(2.0) * (lambda_ * static_cast<double>(q_.cols()) + 1.0);
  }

  Local local(const Vector& x) const {
    require_dim(x.size(), dim(), "L1SvmProblem point");
    return Local(*this, x);
  }
  double value(const Vector& x) const {
    require_dim(x.size(), dim(), "L1SvmProblem point");
    double reg = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) reg += soft_abs(x(j), mu_);
    const Vector qx = q_ * x;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < qx.size(); ++i) loss += soft_hinge(1.0 - qx(i), mu_);
    return lambda_ * reg + loss / static_cast<double>(q_.rows());
  }
  double exact_value(const Vector& x) const {
    require_dim(x.size(), dim(), "L1SvmProblem point");
    return lambda_ * x.lpNorm<1>() + detail::exact_hinge(q_, x);
  }
  /// lambda ||x||_2 <= lambda ||x||_1 <= f_mu(x).
  LevelBall level_ball(double level) const {
    return {Vector::Zero(dim()), std::max(level, 0.0) / lambda_};
  }

  /// lambda sign(x) (0 at x_j = 0) plus the strictly active hinge terms.
  Vector exact_subgradient(const Vector& x) const {
    Vector g = detail::hinge_subgradient(q_, x);
    for (Eigen::Index j = 0; j < x.size(); ++j) g(j) += lambda_ * detail::sign_or_zero(x(j));
    return g;
  }

 private:
  Matrix q_;
  double lambda_;
  double mu_;
  NormMatrix norm_;
  double qtq_top_ = 0.0;
  double l3_ = 0.0;
};

/// mu = eps / (4 lambda d), so the smoothing gap 2 mu lambda d is eps/2.
inline L1SvmProblem build_l1svm(const Matrix& points, const Vector& labels, double lambda, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("build_l1svm: eps must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("build_l1svm: lambda must be positive");
  const double mu = eps / (4.0 * lambda * static_cast<double>(points.cols()));
  return L1SvmProblem(points, labels, lambda, mu);
}

/// f_mu(x) = lambda ||x||_4^4 + (1/m) sum_i soft_hinge(1 - (Q x)_i); B = I,
/// L3 = 24 lambda + 15 ||Q'Q||^2 / mu^3, uniform convexity modulus sigma4.
class L4SvmProblem {
 public:
  class Local {
   public:
    Local(const L4SvmProblem& prob, const Vector& x) : prob_(&prob), x_(x), hinge_(prob.q_, x, prob.mu_) {
      value_ = prob.lambda_ * x.array().pow(4).sum() + hinge_.value;
      grad_ = hinge_.grad + 4.0 * prob.lambda_ * x.array().cube().matrix();
    }

    double value() const { return value_; }
    const Vector& gradient() const { return grad_; }

    Vector hess_apply(const Vector& h) const {
      return prob_->q_.transpose() * hinge_.weights(2).cwiseProduct(prob_->q_ * h) +
             (12.0 * prob_->lambda_ * x_.array().square() * h.array()).matrix();
    }
    double hess_form(const Vector& h) const { return h.dot(hess_apply(h)); }
    ThirdForm third_form(const Vector& h) const {
      const Vector u = prob_->q_ * h;
      ThirdForm t;
      t.vec = prob_->q_.transpose() * hinge_.weights(3).cwiseProduct(u.cwiseProduct(u)) +
              (24.0 * prob_->lambda_ * x_.array() * h.array().square()).matrix();
      t.scalar = t.vec.dot(h);
      return t;
    }
    double fourth_dir(const Vector& h) const {
      const Vector u = prob_->q_ * h;
      return hinge_.weights(4).dot(u.array().pow(4).matrix()) + 24.0 * prob_->lambda_ * h.array().pow(4).sum();
    }
    Matrix hessian() const {
      Matrix hs = prob_->q_.transpose() * hinge_.weights(2).asDiagonal() * prob_->q_;
      hs.diagonal() += 12.0 * prob_->lambda_ * x_.array().square().matrix();
      return hs;
    }
    /// (Hessian + sqrt(2) lambda I)^{-1} V
    Matrix solve_shifted(double lambda, const Matrix& v) const {
      Matrix m = hessian();
      m.diagonal().array() += std::sqrt(2.0) * lambda;
      return solve_spd(m, v);
    }

   private:
    const L4SvmProblem* prob_;
    Vector x_;
    detail::HingePart hinge_;
    double value_ = 0.0;
    Vector grad_;
  };

  /// sigma4 <= 0 selects the default lambda / d.
  L4SvmProblem(const Matrix& points, const Vector& labels, double lambda, double mu, double sigma4 = 0.0)
      : q_(detail::signed_rows(points, labels)), lambda_(lambda), mu_(mu), norm_(NormMatrix::identity(points.cols())) {
    if (!(lambda_ > 0.0)) throw std::invalid_argument("L4SvmProblem: lambda must be positive");
    if (!(mu_ > 0.0)) throw std::invalid_argument("L4SvmProblem: mu must be positive");
    qtq_top_ = top_eigenvalue(q_.transpose() * q_);
    l3_ = 24.0 * lambda_ + 15.0 * qtq_top_ * qtq_top_ / (mu_ * mu_ * mu_);
    sigma4_ = sigma4 > 0.0 ? sigma4 : lambda_ / static_cast<double>(q_.cols());
  }

  std::string name() const { return "l4svm"; }
  Eigen::Index dim() const { return q_.cols(); }
  Eigen::Index samples() const { return q_.rows(); }
  const Matrix& q() const { return q_; }
  double lambda() const { return lambda_; }
  const NormMatrix& norm() const { return norm_; }
  double mu() const { return mu_; }
  double l3() const { return l3_; }
  double sigma4() const { return sigma4_; }
  double kappa4() const { return l3_ / sigma4_; }
  double qtq_norm() const { return qtq_top_; }
  /// Not globally Lipschitz because of the quartic; this is the hinge part only.
  double l1() const { return qtq_top_ / (static_cast<double>(q_.rows()) * mu_); }
  /// f <= f_mu <= f + mu log 2.
  double smoothing_gap() const { return mu_ * std::log(2.0); }

  Local local(const Vector& x) const {
    require_dim(x.size(), dim(), "L4SvmProblem point");
    return Local(*this, x);
  }
  double value(const Vector& x) const {
    require_dim(x.size(), dim(), "L4SvmProblem point");
    const Vector qx = q_ * x;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < qx.size(); ++i) loss += soft_hinge(1.0 - qx(i), mu_);
    return lambda_ * x.array().pow(4).sum() + loss / static_cast<double>(q_.rows());
  }
  double exact_value(const Vector& x) const {
    require_dim(x.size(), dim(), "L4SvmProblem point");
    return lambda_ * x.array().pow(4).sum() + detail::exact_hinge(q_, x);
  }
  Vector exact_subgradient(const Vector& x) const {
    return detail::hinge_subgradient(q_, x) + 4.0 * lambda_ * x.array().cube().matrix();
  }
  /// lambda ||x||_2^4 / d <= lambda ||x||_4^4 <= f_mu(x).
  LevelBall level_ball(double level) const {
    const double d = static_cast<double>(dim());
    return {Vector::Zero(dim()), std::pow(d * std::max(level, 0.0) / lambda_, 0.25)};
  }

 private:
  Matrix q_;
  double lambda_;
  double mu_;
  NormMatrix norm_;
  double qtq_top_ = 0.0;
  double l3_ = 0.0;
  double sigma4_ = 0.0;
};

/// mu = eps / 4; the hinge smoothing gap mu is then eps/4 < eps/2.
inline L4SvmProblem build_l4svm(const Matrix& points, const Vector& labels, double lambda, double eps,
                                double sigma4 = 0.0) {
  if (!(eps > 0.0)) throw std::invalid_argument("build_l4svm: eps must be positive");
  return L4SvmProblem(points, labels, lambda, eps / 4.0, sigma4);
}

static_assert(SmoothProblem<LinfProblem>);
static_assert(SmoothProblem<L1SvmProblem>);
static_assert(SmoothProblem<L4SvmProblem>);

// ---------------------------------------------------------------------------
// Generic oracle queries

enum class OracleOrder { Value, Gradient, HessianDir, ThirdDir };

struct OracleResult {
  double value = 0.0;
  Vector gradient;     // order >= Gradient
  double hess_hh = 0.0;  // order >= HessianDir
  Vector hess_h;
  ThirdForm third;     // order == ThirdDir
};

/// Evaluates f_mu and its contractions along h up to the requested order.
template <SmoothProblem P>
OracleResult oracle_eval(const P& prob, const Vector& x, OracleOrder order, const Vector& h = Vector()) {
  const auto loc = prob.local(x);
  OracleResult out;
  out.value = loc.value();
  if (order == OracleOrder::Value) return out;
  out.gradient = loc.gradient();
  if (order == OracleOrder::Gradient) return out;
  require_dim(h.size(), prob.dim(), "oracle_eval direction");
  out.hess_h = loc.hess_apply(h);
  out.hess_hh = h.dot(out.hess_h);
  if (order == OracleOrder::HessianDir) return out;
  out.third = loc.third_form(h);
  return out;
}

/// Smallest sampled ratio [f(y) - f(x) - <grad f(x), y - x>] / (||y - x||_B^4 / 4);
/// the modulus sigma passes when this is >= sigma. Points are drawn from
/// N(0, scale^2 I).
template <SmoothProblem P>
double sampled_uniform_convexity(const P& prob, Rng& rng, int samples, double scale = 1.0) {
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vector x = scale * rng.normal_vector(prob.dim());
    const Vector y = scale * rng.normal_vector(prob.dim());
    const auto loc = prob.local(x);
    const double gap = prob.value(y) - loc.value() - loc.gradient().dot(y - x);
    const double r = prob.norm().norm(y - x);
    worst = std::min(worst, gap / (r * r * r * r / 4.0));
  }
  return worst;
}

}  // namespace hosmooth
