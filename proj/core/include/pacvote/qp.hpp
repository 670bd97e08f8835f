#pragma once

#include <Eigen/Dense>

namespace pacvote {

// minimize  q' M q - a' q
// subject to  m' q = rhs,  0 <= q_i <= upper.
struct QpProblem {
  Eigen::MatrixXd M;
  Eigen::VectorXd a;
  Eigen::VectorXd m;
  double rhs = 0.0;
  double upper = 1.0;
};

struct QpOptions {
  double kkt_tolerance = 1e-7;
  int max_iterations = 100000;
};

struct QpSolution {
  Eigen::VectorXd q;
  double objective = 0.0;
  // || q - P(q - grad f(q)) ||_inf with P the projection on the feasible set;
  // zero exactly at KKT points.
  double kkt_residual = 0.0;
  double equality_residual = 0.0;
  int iterations = 0;
  bool polished = false;
};

// Achievable range of m'q over the box.
std::pair<double, double> achievable_rhs_range(const Eigen::VectorXd& m, double upper);

// Euclidean projection of z onto { 0 <= x <= upper, m'x = rhs }.
Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& z, const Eigen::VectorXd& m,
                                       double rhs, double upper);

double qp_objective(const QpProblem& p, const Eigen::VectorXd& q);
double qp_kkt_residual(const QpProblem& p, const Eigen::VectorXd& q);

// Accelerated projected gradient (step 1/L, L from power iteration) followed
// by an active-set polish. Throws InfeasibleError when rhs is outside the
// achievable range, InputError when M is not symmetric PSD (eigenvalue floor
// -1e-8), NumericalError when the KKT residual stays above 1e-6.
QpSolution solve_box_eq_qp(const QpProblem& p, const QpOptions& options = {});

}  // namespace pacvote
