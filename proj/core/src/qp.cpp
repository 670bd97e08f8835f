#include "pacvote/qp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "pacvote/types.hpp"

namespace pacvote {

namespace {

Eigen::VectorXd clip(const Eigen::VectorXd& x, double upper) {
  return x.cwiseMax(0.0).cwiseMin(upper);
}

double largest_eigenvalue(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.rows();
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd w = M * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (it > 5 && std::abs(next - lambda) <= 1e-10 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace

std::pair<double, double> achievable_rhs_range(const Eigen::VectorXd& m, double upper) {
  return {m.cwiseMin(0.0).sum() * upper, m.cwiseMax(0.0).sum() * upper};
}

Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& z, const Eigen::VectorXd& m,
                                       double rhs, double upper) {
  const Eigen::Index n = z.size();
  std::vector<double> breaks;
  breaks.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m(i) != 0.0) {
      breaks.push_back(z(i) / m(i));
      breaks.push_back((z(i) - upper) / m(i));
    }
  }
  if (breaks.empty()) return clip(z, upper);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // h(nu) = m' clip(z - nu m) is non-increasing and piecewise linear with
  // kinks at the breakpoints.
  auto h = [&](double nu) { return m.dot(clip(z - nu * m, upper)); };
  if (h(breaks.front()) <= rhs) return clip(z - breaks.front() * m, upper);
  if (h(breaks.back()) >= rhs) return clip(z - breaks.back() * m, upper);

  std::size_t lo = 0;
  std::size_t hi = breaks.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (h(breaks[mid]) >= rhs) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double h_lo = h(breaks[lo]);
  const double h_hi = h(breaks[hi]);
  double nu = breaks[lo];
  if (h_lo > h_hi) nu = breaks[lo] + (h_lo - rhs) * (breaks[hi] - breaks[lo]) / (h_lo - h_hi);
  return clip(z - nu * m, upper);
}

double qp_objective(const QpProblem& p, const Eigen::VectorXd& q) {
  return q.dot(p.M * q) - p.a.dot(q);
}

double qp_kkt_residual(const QpProblem& p, const Eigen::VectorXd& q) {
  const Eigen::VectorXd grad = 2.0 * (p.M * q) - p.a;
  return (q - project_box_hyperplane(q - grad, p.m, p.rhs, p.upper)).lpNorm<Eigen::Infinity>();
}

namespace {

void validate(const QpProblem& p) {
  const Eigen::Index n = p.M.rows();
  if (n == 0 || p.M.cols() != n || p.a.size() != n || p.m.size() != n) {
    throw InputError("QP dimensions do not agree");
  }
  if (!(p.upper > 0.0)) throw InputError("QP box upper limit must be positive");
  if ((p.M - p.M.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InputError("QP matrix is not symmetric");
  }
  // PSD up to an eigenvalue floor of -1e-8.
  const Eigen::MatrixXd shifted = p.M + 1e-8 * Eigen::MatrixXd::Identity(n, n);
  if (Eigen::LLT<Eigen::MatrixXd>(shifted).info() != Eigen::Success) {
    throw InputError("QP matrix is not positive semidefinite");
  }
  const auto [lo, hi] = achievable_rhs_range(p.m, p.upper);
  const double slack = 1e-12 * std::max(1.0, std::abs(p.rhs));
  if (p.rhs < lo - slack || p.rhs > hi + slack) {
    std::ostringstream msg;
    msg << "equality target " << p.rhs << " is outside the achievable range [" << lo << ", " << hi
        << "]";
    throw InfeasibleError(msg.str(), lo, hi);
  }
}

// Re-solves the equality-constrained problem on the current free set with a
// minimum-norm correction; fixed coordinates stay on their bounds.
Eigen::VectorXd polish(const QpProblem& p, const Eigen::VectorXd& q) {
  const Eigen::Index n = q.size();
  const double eps = 1e-10 * p.upper;
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (q(i) > eps && q(i) < p.upper - eps) free.push_back(i);
  }
  Eigen::VectorXd x = q;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (q(i) <= eps) x(i) = 0.0;
    if (q(i) >= p.upper - eps) x(i) = p.upper;
  }
  const auto k = static_cast<Eigen::Index>(free.size());
  if (k == 0) return x;

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs(k + 1);
  const Eigen::VectorXd grad = 2.0 * (p.M * x) - p.a;
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) kkt(r, c) = 2.0 * p.M(free[r], free[c]);
    kkt(r, k) = p.m(free[r]);
    kkt(k, r) = p.m(free[r]);
    rhs(r) = -grad(free[r]);
  }
  rhs(k) = p.rhs - p.m.dot(x);
  // The multiplier is part of the unknowns; only the primal correction is used.
  const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  for (Eigen::Index r = 0; r < k; ++r) x(free[r]) += sol(r);
  return x;
}

}  // namespace

QpSolution solve_box_eq_qp(const QpProblem& p, const QpOptions& options) {
  validate(p);
  const Eigen::Index n = p.M.rows();
  const double lipschitz = std::max(2.0 * largest_eigenvalue(p.M) * 1.05, 1e-12);
  const double step = 1.0 / lipschitz;

  QpSolution sol;
  Eigen::VectorXd q =
      project_box_hyperplane(Eigen::VectorXd::Constant(n, 0.5 * p.upper), p.m, p.rhs, p.upper);
  Eigen::VectorXd y = q;
  double t = 1.0;
  double residual = qp_kkt_residual(p, q);

  // A polished point replaces q when it is feasible, meets the equality and
  // lowers the residual. On well-conditioned problems it is the exact
  // solution; on flat faces (nearly singular M) it usually leaves the box.
  auto try_polish = [&] {
    Eigen::VectorXd candidate = polish(p, q);
    const bool in_box = (candidate.array() >= -1e-12).all() &&
                        (candidate.array() <= p.upper + 1e-12).all();
    if (!in_box) return false;
    candidate = clip(candidate, p.upper);
    if (std::abs(p.m.dot(candidate) - p.rhs) > 1e-10 * std::max(1.0, std::abs(p.rhs))) return false;
    const double cand_residual = qp_kkt_residual(p, candidate);
    if (!(cand_residual < residual)) return false;
    q = std::move(candidate);
    residual = cand_residual;
    sol.polished = true;
    return true;
  };

  int it = 0;
  for (; it < options.max_iterations && residual > options.kkt_tolerance; ++it) {
    const Eigen::VectorXd grad = 2.0 * (p.M * y) - p.a;
    Eigen::VectorXd next = project_box_hyperplane(y - step * grad, p.m, p.rhs, p.upper);
    // Gradient-based adaptive restart of the momentum.
    if ((y - next).dot(next - q) > 0.0) {
      t = 1.0;
      y = next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next + ((t - 1.0) / t_next) * (next - q);
      t = t_next;
    }
    q = std::move(next);
    if (it % 10 == 9) residual = qp_kkt_residual(p, q);
  }
  sol.iterations = it;
  residual = qp_kkt_residual(p, q);
  if (residual > options.kkt_tolerance) try_polish();

  sol.q = q;
  sol.objective = qp_objective(p, q);
  sol.kkt_residual = residual;
  sol.equality_residual = std::abs(p.m.dot(q) - p.rhs);
  if (residual > 1e-6) {
    std::ostringstream msg;
    msg << "QP solver did not converge: KKT residual " << residual << " after " << it
        << " iterations";
    throw NumericalError(msg.str());
  }
  return sol;
}

}  // namespace pacvote
