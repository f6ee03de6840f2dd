#include "support.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace hosmooth;
using hosmooth::testing::random_direction;

namespace {

Matrix dense_shifted_operator(const Matrix& a, const Vector& p, double mu, double lambda) {
  const Matrix gram = a.transpose() * a;
  const Vector u = a.transpose() * p;
  return std::sqrt(2.0) * lambda * gram + (a.transpose() * p.asDiagonal() * a - u * u.transpose()) / mu;
}

double rel_err(const Vector& x, const Vector& ref) { return (x - ref).norm() / std::max(ref.norm(), 1e-300); }

}  // namespace

TEST(Bnorm, ZeroVector) { EXPECT_EQ(bnorm(Vector::Zero(3), NormMatrix::identity(3)), 0.0); }

TEST(Bnorm, IdentityIsEuclidean) {
  Vector v(2);
  v << 3, 4;
  EXPECT_DOUBLE_EQ(bnorm(v, NormMatrix::identity(2)), 5.0);
}

TEST(Bnorm, GramHandComputed) {
  Matrix a(2, 2);
  a << 1, 0, 0, 2;
  Vector v(2);
  v << 1, 1;
  EXPECT_NEAR(bnorm(v, NormMatrix::gram(a)), std::sqrt(5.0), 1e-15);
}

TEST(Bnorm, DimensionMismatch) {
  EXPECT_THROW(bnorm(Vector::Zero(3), NormMatrix::identity(2)), DimensionError);
}

TEST(NormMatrix, GramMatchesQuadraticForm) {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = rng.normal_matrix(8, 4);
    const NormMatrix b = NormMatrix::gram(a);
    const Vector v = rng.normal_vector(4);
    const double direct = std::sqrt(v.dot(a.transpose() * a * v));
    EXPECT_NEAR(b.norm(v), direct, 1e-12 * direct);
  }
}

TEST(NormMatrix, TriangleAndHomogeneity) {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const NormMatrix b = NormMatrix::gram(rng.normal_matrix(7, 3));
    const Vector x = rng.normal_vector(3), y = rng.normal_vector(3);
    const double s = rng.uniform(-5, 5);
    EXPECT_LE(b.norm(x + y), (b.norm(x) + b.norm(y)) * (1 + 1e-12));
    EXPECT_NEAR(b.norm(s * x), std::abs(s) * b.norm(x), 1e-12 * std::abs(s) * b.norm(x) + 1e-300);
  }
}

TEST(NormMatrix, DualNormAndSolve) {
  Rng rng(13);
  const Matrix a = rng.normal_matrix(9, 4);
  const NormMatrix b = NormMatrix::gram(a);
  const Vector g = rng.normal_vector(4);
  const Vector x = b.solve(g);
  EXPECT_LT((b.apply(x) - g).norm(), 1e-12 * g.norm());
  EXPECT_NEAR(b.dual_norm(g), std::sqrt(g.dot(x)), 1e-12);
  // dual norm is the sup of <g, v> over the unit B-ball
  EXPECT_NEAR(g.dot(x) / b.norm(x), b.dual_norm(g), 1e-12);
}

TEST(NormMatrix, GramRejectsRankDeficient) {
  Matrix a(4, 3);
  a << 1, 2, 3, 2, 4, 6, 0, 0, 0, 1, 2, 3;  // rank 1
  EXPECT_THROW(NormMatrix::gram(a), NotSpdError);
  Rng rng(14);
  Matrix b = rng.normal_matrix(6, 3);
  b.col(2) = b.col(0) - 0.5 * b.col(1);
  EXPECT_THROW(NormMatrix::gram(b), NotSpdError);
  EXPECT_THROW(NormMatrix::gram(rng.normal_matrix(2, 3)), NotSpdError);
}

TEST(Construction, RejectsNonFinite) {
  std::vector<double> vals{1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0};
  EXPECT_THROW(make_matrix(2, 2, vals), NonFiniteError);
  vals[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(make_vector(vals), NonFiniteError);
  EXPECT_THROW(make_matrix(3, 2, vals), DimensionError);
}

TEST(Construction, RowMajorLayout) {
  const std::vector<double> vals{1, 2, 3, 4, 5, 6};
  const Matrix m = make_matrix(2, 3, vals);
  EXPECT_EQ(m(0, 2), 3.0);
  EXPECT_EQ(m(1, 0), 4.0);
}

TEST(SolveSpd, Identity) {
  Vector r(3);
  r << 1, -2, 3;
  EXPECT_EQ(solve_spd(Matrix::Identity(3, 3), r), r);
}

TEST(SolveSpd, Diagonal) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2;
  m(1, 1) = 4;
  Vector r(2);
  r << 2, 4;
  const Vector x = solve_spd(m, r);
  EXPECT_NEAR(x(0), 1.0, 1e-15);
  EXPECT_NEAR(x(1), 1.0, 1e-15);
}

TEST(SolveSpd, RandomResidual) {
  Rng rng(15);
  for (int t = 0; t < 20; ++t) {
    const Matrix g = rng.normal_matrix(8, 8);
    const Matrix m = g.transpose() * g + 0.1 * Matrix::Identity(8, 8);
    const Vector r = rng.normal_vector(8);
    const Vector x = solve_spd(m, r);
    EXPECT_LE((m * x - r).norm(), 1e-10 * (1 + r.norm()));
  }
}

TEST(SolveSpd, ErrorsAreDistinct) {
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(solve_spd(indefinite, Vector(Vector::Ones(2))), NotSpdError);
  Matrix nonsym(2, 2);
  nonsym << 2, 1, 0, 2;
  EXPECT_THROW(solve_spd(nonsym, Vector(Vector::Ones(2))), NotSpdError);
  EXPECT_THROW(solve_spd(Matrix::Identity(2, 2), Vector(Vector::Ones(3))), DimensionError);
  EXPECT_THROW(solve_spd(Matrix::Identity(2, 3), Vector(Vector::Ones(2))), DimensionError);
  Matrix tiny = Matrix::Identity(3, 3);
  tiny(2, 2) = 1e-20;  // pivot below 1e-14 * trace / n
  EXPECT_THROW(solve_spd(tiny, Vector(Vector::Ones(3))), NotSpdError);
}

TEST(ShiftedSolve, UniformIdentityCase) {
  const int m = 6;
  const Vector p = Vector::Constant(m, 1.0 / m);
  const Matrix a = Matrix::Identity(m, m);
  Rng rng(16);
  const Vector v = rng.normal_vector(m);
  for (double lambda : {0.01, 1.0, 10.0}) {
    const Vector h = solve_shifted_softmax_hessian(a, p, 1.0, lambda, v);
    const Vector ref = solve_spd(dense_shifted_operator(a, p, 1.0, lambda), v);
    EXPECT_LE(rel_err(h, ref), 1e-9);
    // operator = (sqrt2 lambda + 1/m) I - (1/m^2) 11'
    const Matrix op = (std::sqrt(2.0) * lambda + 1.0 / m) * Matrix::Identity(m, m) -
                      Matrix::Constant(m, m, 1.0 / (m * m));
    EXPECT_LE((op * h - v).norm(), 1e-12 * v.norm());
  }
}

TEST(ShiftedSolve, ZeroRhs) {
  Rng rng(17);
  const Matrix a = rng.normal_matrix(10, 3);
  EXPECT_TRUE(solve_shifted_softmax_hessian(a, rng.simplex(10), 0.5, 1.0, Vector(Vector::Zero(3))).isZero(0.0));
}

TEST(ShiftedSolve, Random20x5) {
  Rng rng(18);
  const Matrix a = rng.normal_matrix(20, 5);
  const Vector p = rng.simplex(20);
  const Vector v = rng.normal_vector(5);
  const Vector h = solve_shifted_softmax_hessian(a, p, 0.5, 1.0, v);
  EXPECT_LE(rel_err(h, solve_spd(dense_shifted_operator(a, p, 0.5, 1.0), v)), 1e-9);
}

TEST(ShiftedSolve, MatchesDenseAssemblyOnRandomInstances) {
  Rng rng(19);
  for (int t = 0; t < 100; ++t) {
    const auto d = static_cast<Eigen::Index>(1 + rng.below(10));
    const auto m = static_cast<Eigen::Index>(d + rng.below(static_cast<std::uint64_t>(50 - d + 1)));
    const Matrix a = rng.normal_matrix(m, d);
    const Vector p = rng.simplex(m);
    const double mu = std::pow(10.0, rng.uniform(-2, 0.5));
    const double lambda = std::pow(10.0, rng.uniform(-3, 2));
    const Matrix v = rng.normal_matrix(d, 2);
    const Matrix h = solve_shifted_softmax_hessian(a, p, mu, lambda, v);
    const Matrix ref = solve_spd(dense_shifted_operator(a, p, mu, lambda), v);
    for (int j = 0; j < 2; ++j) EXPECT_LE(rel_err(h.col(j), ref.col(j)), 1e-9) << "instance " << t;
  }
}

TEST(ShiftedSolve, SingularWithoutShift) {
  // A = I, lambda = 0: diag(p) - pp' annihilates the all-ones vector
  const Matrix a = Matrix::Identity(4, 4);
  EXPECT_THROW(solve_shifted_softmax_hessian(a, Vector::Constant(4, 0.25), 1.0, 0.0, Vector(Vector::Ones(4))),
               NotSpdError);
}

TEST(ShiftedSolve, Errors) {
  Rng rng(20);
  const Matrix a = rng.normal_matrix(5, 2);
  const Vector p = rng.simplex(5);
  EXPECT_THROW(solve_shifted_softmax_hessian(a, p, 0.0, 1.0, Vector(Vector::Ones(2))), std::invalid_argument);
  EXPECT_THROW(solve_shifted_softmax_hessian(a, p, 1.0, -1.0, Vector(Vector::Ones(2))), std::invalid_argument);
  EXPECT_THROW(solve_shifted_softmax_hessian(a, p, 1.0, 1.0, Vector(Vector::Ones(3))), DimensionError);
  EXPECT_THROW(solve_shifted_softmax_hessian(a, rng.simplex(4), 1.0, 1.0, Vector(Vector::Ones(2))), DimensionError);
}

TEST(GLambda, ZeroVector) {
  Rng rng(21);
  EXPECT_EQ(eval_g_lambda(rng.normal_matrix(6, 2), rng.simplex(6), 0.3, 1.0, Vector::Zero(2)), 0.0);
}

TEST(GLambda, MatchesDenseFormula) {
  Rng rng(22);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = rng.normal_matrix(12, 4);
    const Vector p = rng.simplex(12);
    const Vector c = rng.normal_vector(4);
    const double lambda = std::pow(10.0, rng.uniform(-2, 2));
    const Matrix s = dense_shifted_operator(a, p, 0.4, lambda);
    const Vector sc = solve_spd(s, c);
    const double ref = sc.dot(a.transpose() * a * sc);
    EXPECT_NEAR(eval_g_lambda(a, p, 0.4, lambda, c), ref, 1e-9 * ref);
  }
}

// For large lambda, S ~ sqrt(2) lambda A'A, so g -> c'(A'A)^{-1}c / (2 lambda^2).
TEST(GLambda, LargeLambdaAsymptote) {
  Rng rng(23);
  const Matrix a = rng.normal_matrix(10, 3);
  const Vector p = rng.simplex(10);
  const Vector c = rng.normal_vector(3);
  const double lambda = 1e6;
  const double asym = c.dot(solve_spd(Matrix(a.transpose() * a), c)) / (2.0 * lambda * lambda);
  EXPECT_NEAR(eval_g_lambda(a, p, 0.5, lambda, c) / asym, 1.0, 0.05);
}

TEST(GLambda, NonIncreasingInLambda) {
  Rng rng(24);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = rng.normal_matrix(15, 4);
    const Vector p = rng.simplex(15);
    const Vector c = rng.normal_vector(4);
    double prev = std::numeric_limits<double>::infinity();
    for (double e = -3; e <= 3; e += 0.25) {
      const double g = eval_g_lambda(a, p, 0.2, std::pow(10.0, e), c);
      EXPECT_GE(g, 0.0);
      EXPECT_LE(g, prev * (1 + 1e-12));
      prev = g;
    }
  }
}

TEST(TopEigenvalue, MatchesEigenSolver) {
  Rng rng(25);
  for (int t = 0; t < 10; ++t) {
    const Matrix g = rng.normal_matrix(12, 6);
    const Matrix s = g.transpose() * g;
    const double ref = Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().maxCoeff();
    const double est = top_eigenvalue(s);
    EXPECT_NEAR(est, ref, 2e-6 * ref);
  }
  EXPECT_EQ(top_eigenvalue(Matrix::Zero(3, 3)), 0.0);
}

TEST(Rng, ReproducibleAndSeeded) {
  Rng a(5), b(5), c(6);
  bool differs = false;
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differs = differs || x != c.normal();
  }
  EXPECT_TRUE(differs);
  Rng d(7);
  const Vector p = d.simplex(10);
  EXPECT_NEAR(p.sum(), 1.0, 1e-14);
  EXPECT_GE(p.minCoeff(), 0.0);
  for (int i = 0; i < 1000; ++i) {
    const double u = d.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(d.below(7), 7u);
  }
}

TEST(Rng, RandomDirectionIsUnit) {
  Rng rng(8);
  EXPECT_NEAR(random_direction(rng, 5).norm(), 1.0, 1e-15);
}
