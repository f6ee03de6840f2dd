#pragma once

// Dense linear algebra used throughout hosmooth: checked vector/matrix
// construction, matrix-induced norms, SPD solves, and the structured solver
// for Gram matrices shifted by a softmax Hessian.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace hosmooth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a matrix that must be symmetric positive definite is not
/// (numerically) so.
struct NotSpdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Derived>
inline void require_finite(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteError(std::string(what) + ": non-finite entry");
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(got) +
                         ", expected " + std::to_string(want));
  }
}

/// Builds a matrix from row-major data; rejects NaN/Inf.
inline Matrix make_matrix(Eigen::Index rows, Eigen::Index cols, std::span<const double> row_major) {
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != row_major.size()) {
    throw DimensionError("make_matrix: storage length does not match shape");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row_major[static_cast<std::size_t>(i * cols + j)];
  require_finite(m, "make_matrix");
  return m;
}

inline Vector make_vector(std::span<const double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  require_finite(v, "make_vector");
  return v;
}

namespace detail {

// Cholesky of a symmetric matrix with the pivot floor 1e-14 * trace(M) / n.
inline Eigen::LLT<Matrix> checked_llt(const Matrix& m, const char* what) {
  const auto n = m.rows();
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NotSpdError(std::string(what) + ": matrix is not positive definite");
  }
  const double floor = 1e-14 * m.trace() / static_cast<double>(n);
  const Matrix& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pivot = l(i, i) * l(i, i);
    if (!(pivot > floor)) {
      throw NotSpdError(std::string(what) + ": pivot " + std::to_string(pivot) +
                        " below threshold " + std::to_string(floor));
    }
  }
  return llt;
}

// One round of iterative refinement keeps the residual near roundoff.
inline Matrix refined_solve(const Eigen::LLT<Matrix>& llt, const Matrix& m, const Matrix& rhs) {
  Matrix x = llt.solve(rhs);
  const Matrix r = rhs - m * x;
  x += llt.solve(r);
  return x;
}

}  // namespace detail

/// Solves M X = rhs for symmetric positive definite M.
inline Matrix solve_spd(const Matrix& m, const Matrix& rhs) {
  if (m.rows() != m.cols()) throw DimensionError("solve_spd: matrix is not square");
  require_dim(rhs.rows(), m.rows(), "solve_spd rhs");
  if (m.rows() == 0) return Matrix(0, rhs.cols());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw NotSpdError("solve_spd: matrix is not symmetric");
  }
  const auto llt = detail::checked_llt(m, "solve_spd");
  return detail::refined_solve(llt, m, rhs);
}

inline Vector solve_spd(const Matrix& m, const Vector& rhs) { return solve_spd(m, Matrix(rhs)).col(0); }

/// The matrix B of a norm ||v||_B = sqrt(v' B v). Either the identity or the
/// Gram matrix A'A of a full-column-rank factor A, which is kept implicitly.
class NormMatrix {
 public:
  enum class Kind { Identity, Gram };

  static NormMatrix identity(Eigen::Index dim) {
    if (dim <= 0) throw DimensionError("NormMatrix::identity: dimension must be positive");
    NormMatrix b;
    b.kind_ = Kind::Identity;
    b.dim_ = dim;
    return b;
  }

  /// Throws NotSpdError when A'A is not positive definite (rank(A) < cols).
  static NormMatrix gram(Matrix factor) {
    require_finite(factor, "NormMatrix::gram");
    if (factor.cols() == 0 || factor.rows() < factor.cols()) {
      throw NotSpdError("NormMatrix::gram: factor has fewer rows than columns");
    }
    NormMatrix b;
    b.kind_ = Kind::Gram;
    b.dim_ = factor.cols();
    b.gram_ = factor.transpose() * factor;
    b.llt_ = detail::checked_llt(b.gram_, "NormMatrix::gram");
    b.factor_ = std::move(factor);
    return b;
  }

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  const Matrix& factor() const { return factor_; }

  /// B v
  Vector apply(const Vector& v) const {
    require_dim(v.size(), dim_, "NormMatrix::apply");
    if (kind_ == Kind::Identity) return v;
    return factor_.transpose() * (factor_ * v);
  }

  /// B^{-1} g
  Vector solve(const Vector& g) const {
    require_dim(g.size(), dim_, "NormMatrix::solve");
    if (kind_ == Kind::Identity) return g;
    return detail::refined_solve(llt_, gram_, g).col(0);
  }

  double norm(const Vector& v) const {
    require_dim(v.size(), dim_, "bnorm");
    if (kind_ == Kind::Identity) return v.norm();
    return (factor_ * v).norm();
  }

  double squared_norm(const Vector& v) const {
    const double n = norm(v);
    return n * n;
  }

  /// Dual norm sqrt(g' B^{-1} g).
  double dual_norm(const Vector& g) const {
    if (kind_ == Kind::Identity) {
      require_dim(g.size(), dim_, "dual_norm");
      return g.norm();
    }
    return std::sqrt(std::max(0.0, g.dot(solve(g))));
  }

  /// Dense B; for tests and small dense assemblies.
  Matrix dense() const {
    if (kind_ == Kind::Identity) return Matrix::Identity(dim_, dim_);
    return gram_;
  }

 private:
  NormMatrix() = default;

  Kind kind_ = Kind::Identity;
  Eigen::Index dim_ = 0;
  Matrix factor_;
  Matrix gram_;
  Eigen::LLT<Matrix> llt_;
};

inline double bnorm(const Vector& v, const NormMatrix& b) { return b.norm(v); }

/// Solves (sqrt(2) lambda A'A + (1/mu)(A' diag(p) A - A'p p'A)) H = V for
/// every column of V.
///
/// The operator is M - u u'/mu with M = A'(diag(p)/mu + sqrt(2) lambda I)A and
/// u = A'p, so one factorization of M plus a Sherman-Morrison correction
/// gives h = M^{-1}(v + xi u), xi = u'M^{-1}v / (mu - u'M^{-1}u).
inline Matrix solve_shifted_softmax_hessian(const Matrix& a, const Vector& p, double mu, double lambda,
                                            const Matrix& rhs) {
  require_dim(p.size(), a.rows(), "solve_shifted_softmax_hessian p");
  require_dim(rhs.rows(), a.cols(), "solve_shifted_softmax_hessian v");
  if (!(mu > 0.0)) throw std::invalid_argument("solve_shifted_softmax_hessian: mu must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("solve_shifted_softmax_hessian: lambda must be >= 0");
  if (rhs.isZero(0.0)) return Matrix::Zero(rhs.rows(), rhs.cols());

  const Vector weights = (p.array() / mu + std::sqrt(2.0) * lambda).matrix();
  const Matrix m = a.transpose() * weights.asDiagonal() * a;
  const Vector u = a.transpose() * p;

  const auto llt = detail::checked_llt(m, "solve_shifted_softmax_hessian");
  const Vector m_inv_u = detail::refined_solve(llt, m, u);
  const double denom = mu - u.dot(m_inv_u);
  // u'M^{-1}u <= mu always; equality means the shifted operator is singular.
  if (!(denom > 1e-14 * mu)) {
    throw NotSpdError("solve_shifted_softmax_hessian: shifted operator is singular");
  }
  Matrix out(rhs.rows(), rhs.cols());
  for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
    const Vector m_inv_v = detail::refined_solve(llt, m, rhs.col(j));
    const double xi = u.dot(m_inv_v) / denom;
    out.col(j) = m_inv_v + xi * m_inv_u;
  }
  return out;
}

inline Vector solve_shifted_softmax_hessian(const Matrix& a, const Vector& p, double mu, double lambda,
                                            const Vector& v) {
  return solve_shifted_softmax_hessian(a, p, mu, lambda, Matrix(v)).col(0);
}

/// g(lambda) = c'S^{-1} A'A S^{-1} c for S = sqrt(2) lambda A'A + Hessian,
/// evaluated as ||A S^{-1} c||^2.
inline double eval_g_lambda(const Matrix& a, const Vector& p, double mu, double lambda, const Vector& c) {
  const Vector h = solve_shifted_softmax_hessian(a, p, mu, lambda, c);
  return (a * h).squaredNorm();
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration, to the requested relative tolerance.
inline double top_eigenvalue(const Matrix& s, double rel_tol = 1e-6, int max_iter = 10000) {
  if (s.rows() != s.cols()) throw DimensionError("top_eigenvalue: matrix is not square");
  if (s.rows() == 0) return 0.0;
  // Deterministic start with components in every direction.
  Vector x = Vector::LinSpaced(s.rows(), 1.0, 2.0);
  x.normalize();
  double rayleigh = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector y = s * x;
    rayleigh = x.dot(y);
    if (rayleigh <= 0.0) return 0.0;
    // An eigenvalue lies within the residual of the quotient; returning the
    // upper end keeps constants built from this on the safe side.
    const double resid = (y - rayleigh * x).norm();
    if (resid <= rel_tol * rayleigh) return rayleigh + resid;
    x = y.normalized();
  }
  return rayleigh;
}

}  // namespace hosmooth
