#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pacvote/qp.hpp"
#include "pacvote/types.hpp"

namespace pacvote {
namespace {

QpProblem problem(Eigen::MatrixXd M, Eigen::VectorXd a, Eigen::VectorXd m, double rhs, double upper) {
  QpProblem p;
  p.M = std::move(M);
  p.a = std::move(a);
  p.m = std::move(m);
  p.rhs = rhs;
  p.upper = upper;
  return p;
}

TEST(Qp, SingleVariablePinnedByEquality) {
  const QpProblem p = problem(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1),
                              Eigen::VectorXd::Ones(1), 0.75, 1.0);
  const QpSolution s = solve_box_eq_qp(p);
  EXPECT_NEAR(s.q(0), 0.75, 1e-12);
  EXPECT_LE(s.kkt_residual, 1e-6);
}

// Brute force over the feasible segment of a two-variable problem.
struct Oracle {
  double objective = std::numeric_limits<double>::infinity();
  Eigen::Vector2d q;
};

Oracle segment_oracle(const QpProblem& p) {
  Oracle best;
  const int steps = 200000;
  const bool solve_second = std::abs(p.m(1)) >= std::abs(p.m(0));
  for (int k = 0; k <= steps; ++k) {
    const double t = p.upper * k / steps;
    Eigen::Vector2d q;
    if (solve_second) {
      q << t, (p.rhs - p.m(0) * t) / p.m(1);
    } else {
      q << (p.rhs - p.m(1) * t) / p.m(0), t;
    }
    if (q.minCoeff() < 0.0 || q.maxCoeff() > p.upper) continue;
    const double f = qp_objective(p, q);
    if (f < best.objective) best = {f, q};
  }
  return best;
}

TEST(Qp, TwoVariableGridOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 50) {
    Eigen::Matrix2d B;
    B << u(rng), u(rng), u(rng), u(rng);
    Eigen::MatrixXd M = B.transpose() * B + 0.05 * Eigen::Matrix2d::Identity();
    Eigen::VectorXd a(2), m(2);
    a << u(rng), u(rng);
    m << u(rng), u(rng);
    if (std::abs(m(0)) < 0.1 || std::abs(m(1)) < 0.1) continue;
    const double upper = 0.5;
    const auto [lo, hi] = achievable_rhs_range(m, upper);
    const double rhs = lo + (hi - lo) * (0.1 + 0.8 * (u(rng) + 1.0) / 2.0);
    const QpProblem p = problem(M, a, m, rhs, upper);
    const QpSolution s = solve_box_eq_qp(p);
    const Oracle o = segment_oracle(p);
    EXPECT_LE(s.kkt_residual, 1e-6);
    EXPECT_LE(s.equality_residual, 1e-8);
    EXPECT_LE(s.objective, o.objective + 1e-9);
    EXPECT_NEAR(s.q(0), o.q(0), 2e-3);
    EXPECT_NEAR(s.q(1), o.q(1), 2e-3);
    ++checked;
  }
}

TEST(Qp, RandomProblemsReachKktTolerance) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const int n = 5 + t;
    Eigen::MatrixXd B(n + 3, n);
    for (int i = 0; i < B.rows(); ++i)
      for (int j = 0; j < n; ++j) B(i, j) = u(rng);
    const Eigen::MatrixXd M = B.transpose() * B / static_cast<double>(B.rows());
    Eigen::VectorXd a(n), m(n);
    for (int j = 0; j < n; ++j) {
      a(j) = u(rng);
      m(j) = u(rng);
    }
    const double upper = 1.0 / n;
    const auto [lo, hi] = achievable_rhs_range(m, upper);
    const QpProblem p = problem(M, a, m, 0.3 * lo + 0.7 * hi, upper);
    const QpSolution s = solve_box_eq_qp(p);
    EXPECT_LE(s.kkt_residual, 1e-6);
    EXPECT_LE(s.equality_residual, 1e-8);
    EXPECT_GE(s.q.minCoeff(), 0.0);
    EXPECT_LE(s.q.maxCoeff(), upper);
    EXPECT_NEAR(qp_kkt_residual(p, s.q), s.kkt_residual, 1e-12);
  }
}

TEST(Qp, ProjectionIsFeasibleAndIdempotent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + t % 9;
    Eigen::VectorXd z(n), m(n);
    for (int j = 0; j < n; ++j) {
      z(j) = u(rng);
      m(j) = u(rng);
    }
    const double upper = 0.4;
    const auto [lo, hi] = achievable_rhs_range(m, upper);
    const double rhs = lo + (hi - lo) * (u(rng) + 2.0) / 4.0;
    const Eigen::VectorXd x = project_box_hyperplane(z, m, rhs, upper);
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_LE(x.maxCoeff(), upper);
    EXPECT_NEAR(m.dot(x), rhs, 1e-9);
    const Eigen::VectorXd again = project_box_hyperplane(x, m, rhs, upper);
    EXPECT_LE((again - x).lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(Qp, InfeasibleRhsReportsRange) {
  Eigen::VectorXd m(2);
  m << 1.0, -0.5;
  const QpProblem p = problem(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), m, 2.0, 1.0);
  try {
    solve_box_eq_qp(p);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_DOUBLE_EQ(e.lo(), -0.5);
    EXPECT_DOUBLE_EQ(e.hi(), 1.0);
  }
}

TEST(Qp, RejectsMalformedMatrices) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  EXPECT_THROW(solve_box_eq_qp(problem(asym, ones, ones, 0.5, 1.0)), InputError);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(solve_box_eq_qp(problem(indefinite, ones, ones, 0.5, 1.0)), InputError);
  EXPECT_THROW(solve_box_eq_qp(problem(Eigen::MatrixXd::Identity(3, 3), ones, ones, 0.5, 1.0)),
               InputError);
}

TEST(Qp, IdenticalVotersSplitAnyFeasibleWay) {
  // Rank-one M: every feasible point with the same m'q has the same objective.
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(4);
  const Eigen::MatrixXd M = v * v.transpose();
  const QpProblem p = problem(M, v, v, 0.6, 0.25);
  const QpSolution s = solve_box_eq_qp(p);
  EXPECT_LE(s.kkt_residual, 1e-6);
  EXPECT_NEAR(s.q.sum(), 0.6, 1e-9);
  EXPECT_NEAR(s.objective, 0.36 - 0.6, 1e-9);
}

}  // namespace
}  // namespace pacvote
