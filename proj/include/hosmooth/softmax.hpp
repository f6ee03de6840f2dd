#pragma once

// Softmax calculus: smax_mu(z) = mu * log(sum_i exp(z_i / mu)) and its
// directional derivatives up to order four, plus the two-term kernels
// soft_abs and soft_hinge.

#include "hosmooth/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace hosmooth {

/// Stable quantities of smax_mu at one point z. All exponentials are taken
/// after shifting by max_i z_i, so nothing overflows.
class SoftmaxState {
 public:
  SoftmaxState(Vector z, double mu) : z_(std::move(z)), mu_(mu) {
    if (!(mu_ > 0.0) || !std::isfinite(mu_)) throw std::invalid_argument("softmax: mu must be positive");
    if (z_.size() == 0) throw DimensionError("softmax: empty argument");
    require_finite(z_, "softmax argument");
    shift_ = z_.maxCoeff();
    p_ = ((z_.array() - shift_) / mu_).exp().matrix();
    const double total = p_.sum();  // >= 1, the max entry contributes exp(0)
    log_z_shifted_ = std::log(total);
    p_ /= total;
  }

  const Vector& z() const { return z_; }
  double mu() const { return mu_; }
  double shift() const { return shift_; }
  double log_z_shifted() const { return log_z_shifted_; }
  Eigen::Index dim() const { return z_.size(); }

  double value() const { return shift_ + mu_ * log_z_shifted_; }
  /// Gradient; a point of the probability simplex.
  const Vector& p() const { return p_; }

 private:
  Vector z_;
  double mu_;
  double shift_ = 0.0;
  double log_z_shifted_ = 0.0;
  Vector p_;
};

/// Third derivative contracted twice: vec = D3[h,h], scalar = D3[h,h,h].
struct ThirdForm {
  Vector vec;
  double scalar = 0.0;
};

inline double smax_value(const Vector& z, double mu) { return SoftmaxState(z, mu).value(); }

inline const Vector& smax_grad(const SoftmaxState& s) { return s.p(); }

/// (1/mu)(p o h - <p,h> p)
inline Vector smax_hess_apply(const SoftmaxState& s, const Vector& h) {
  require_dim(h.size(), s.dim(), "smax_hess_apply");
  const Vector& p = s.p();
  return (p.cwiseProduct(h) - p.dot(h) * p) / s.mu();
}

/// Hessian bilinear form (1/mu)(<p, h1 o h2> - <p,h1><p,h2>).
inline double smax_hess_form(const SoftmaxState& s, const Vector& h1, const Vector& h2) {
  require_dim(h1.size(), s.dim(), "smax_hess_form");
  require_dim(h2.size(), s.dim(), "smax_hess_form");
  const Vector& p = s.p();
  return (p.dot(h1.cwiseProduct(h2)) - p.dot(h1) * p.dot(h2)) / s.mu();
}

/// D3[h1,h2] = (1/mu)(H[h1 o h2] - <p,h1> H[h2] - <p,h2> H[h1]).
inline Vector smax_third_apply(const SoftmaxState& s, const Vector& h1, const Vector& h2) {
  const Vector& p = s.p();
  return (smax_hess_apply(s, h1.cwiseProduct(h2)) - p.dot(h1) * smax_hess_apply(s, h2) -
          p.dot(h2) * smax_hess_apply(s, h1)) /
         s.mu();
}

inline ThirdForm smax_third_form(const SoftmaxState& s, const Vector& h) {
  require_dim(h.size(), s.dim(), "smax_third_form");
  const Vector& p = s.p();
  const Vector hess_h = smax_hess_apply(s, h);
  ThirdForm out;
  out.vec = (smax_hess_apply(s, h.cwiseProduct(h)) - 2.0 * p.dot(h) * hess_h) / s.mu();
  out.scalar = out.vec.dot(h);
  return out;
}

/// D3[h o h, h, h] = (1/mu)(H[h^3,h] - <p,h^2> H[h,h] - <p,h> H[h^2,h]).
inline double smax_third_squared_form(const SoftmaxState& s, const Vector& h) {
  require_dim(h.size(), s.dim(), "smax_third_squared_form");
  const Vector& p = s.p();
  const Vector h2 = h.cwiseProduct(h);
  const Vector h3 = h2.cwiseProduct(h);
  return (smax_hess_form(s, h3, h) - p.dot(h2) * smax_hess_form(s, h, h) - p.dot(h) * smax_hess_form(s, h2, h)) /
         s.mu();
}

/// D4[h,h,h,h] = (1/mu)(D3[h^2,h,h] - 2<p,h> D3[h,h,h] - 2 (H[h,h])^2).
inline double smax_fourth_dir(const SoftmaxState& s, const Vector& h) {
  require_dim(h.size(), s.dim(), "smax_fourth_dir");
  const double quad = smax_hess_form(s, h, h);
  const double third = smax_third_form(s, h).scalar;
  return (smax_third_squared_form(s, h) - 2.0 * s.p().dot(h) * third - 2.0 * quad * quad) / s.mu();
}

/// Value and first four derivatives of a scalar kernel.
struct ScalarDerivs {
  double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0;
};

namespace detail {
inline void require_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive");
}
}  // namespace detail

/// smax_mu([c, -c]) = |c| + mu * log1p(exp(-2|c|/mu)).
inline double soft_abs(double c, double mu) {
  detail::require_mu(mu);
  return std::abs(c) + mu * std::log1p(std::exp(-2.0 * std::abs(c) / mu));
}

/// smax_mu([0, c]) = max(0,c) + mu * log1p(exp(-|c|/mu)).
inline double soft_hinge(double c, double mu) {
  detail::require_mu(mu);
  return std::max(0.0, c) + mu * std::log1p(std::exp(-std::abs(c) / mu));
}

inline ScalarDerivs soft_abs_derivs(double c, double mu) {
  ScalarDerivs d;
  d.d0 = soft_abs(c, mu);
  const double u = c / mu;
  const double t = std::tanh(u);
  // sech^2(u) without cancellation for large |u|
  const double e = std::exp(-2.0 * std::abs(u));
  const double s = 4.0 * e / ((1.0 + e) * (1.0 + e));
  d.d1 = t;
  d.d2 = s / mu;
  d.d3 = -2.0 * t * s / (mu * mu);
  d.d4 = 2.0 * s * (3.0 * t * t - 1.0) / (mu * mu * mu);
  return d;
}

inline ScalarDerivs soft_hinge_derivs(double c, double mu) {
  ScalarDerivs d;
  d.d0 = soft_hinge(c, mu);
  const double u = c / mu;
  const double e = std::exp(-std::abs(u));
  // sig = 1/(1+exp(-u)), rest = 1 - sig, both formed without cancellation
  const double sig = u >= 0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  const double rest = u >= 0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
  const double w = sig * rest;
  d.d1 = sig;
  d.d2 = w / mu;
  d.d3 = w * (rest - sig) / (mu * mu);
  d.d4 = w * (1.0 - 6.0 * w) / (mu * mu * mu);
  return d;
}

}  // namespace hosmooth
