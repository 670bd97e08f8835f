#include "pacvote/margins.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pacvote {

namespace {

// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

std::vector<double> margins(const VoteMatrix& votes, const Posterior& q) {
  if (q.size() != votes.voters()) {
    throw InputError("posterior has " + std::to_string(q.size()) + " weights but the vote matrix has " +
                     std::to_string(votes.voters()) + " voters");
  }
  const std::size_t n = votes.half_size();
  Eigen::VectorXd diff(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) diff(static_cast<Eigen::Index>(j)) = q[j] - q[j + n];
  const Eigen::VectorXd agg = votes.half() * diff;
  std::vector<double> out(votes.examples());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = votes.labels()[i] * agg(static_cast<Eigen::Index>(i));
  }
  return out;
}

MarginSummary summarize(const std::vector<double>& m) {
  if (m.empty()) throw InputError("cannot summarize an empty margin vector");
  CompensatedSum s1;
  CompensatedSum s2;
  std::size_t errors = 0;
  for (double v : m) {
    s1.add(v);
    s2.add(v * v);
    if (v <= 0.0) ++errors;
  }
  const double count = static_cast<double>(m.size());
  MarginSummary out;
  out.examples = m.size();
  out.mu1 = s1.value() / count;
  out.mu2 = s2.value() / count;
  out.variance = std::max(0.0, out.mu2 - out.mu1 * out.mu1);
  out.gibbs_risk = 0.5 * (1.0 - out.mu1);
  out.disagreement = 0.5 * (1.0 - out.mu2);
  out.joint_error = 0.25 * (1.0 - 2.0 * out.mu1 + out.mu2);
  out.joint_success = 0.25 * (1.0 + 2.0 * out.mu1 + out.mu2);
  out.bayes_risk = static_cast<double>(errors) / count;
  if (out.mu1 > 0.0) out.c_bound = c_bound(out.mu1, out.mu2);
  return out;
}

double c_bound(double mu1, double mu2) {
  if (!(mu1 > 0.0)) {
    throw InputError("Gibbs risk >= 1/2 (mu1 = " + std::to_string(mu1) + "), C-bound undefined");
  }
  // mu2 >= mu1^2 up to rounding in the moment sums.
  if (mu2 < mu1 * mu1 * (1.0 - 1e-12)) {
    throw InputError("inconsistent moments: mu2 < mu1^2");
  }
  return std::clamp(1.0 - mu1 * mu1 / mu2, 0.0, 1.0);
}

double c_bound_variance_form(double mu1, double mu2) {
  if (!(mu1 > 0.0)) throw InputError("Gibbs risk >= 1/2, C-bound undefined");
  return std::max(0.0, mu2 - mu1 * mu1) / mu2;
}

double c_bound_risk_form(double gibbs_risk, double disagreement) {
  if (!(gibbs_risk < 0.5)) throw InputError("Gibbs risk >= 1/2, C-bound undefined");
  const double num = 1.0 - 2.0 * gibbs_risk;
  return std::clamp(1.0 - num * num / (1.0 - 2.0 * disagreement), 0.0, 1.0);
}

OptimalityFlags optimality_flags(double mu1, double mu2) {
  if (!(mu1 > 0.0)) throw InputError("Gibbs risk >= 1/2, C-bound undefined");
  const double r = 0.5 * (1.0 - mu1);
  const double d = 0.5 * (1.0 - mu2);
  return {mu2 <= mu1, r <= d, c_bound(mu1, mu2) <= 2.0 * r};
}

double variance_upper_bound(const Posterior& q, const VoteMatrix& votes) {
  if (q.size() != votes.voters()) throw InputError("posterior and vote matrix sizes differ");
  const auto m = static_cast<Eigen::Index>(votes.examples());
  if (m == 0) throw InputError("empty vote matrix");
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) y(i) = votes.labels()[static_cast<std::size_t>(i)];
  // Columns y * f_j, centered.
  Eigen::MatrixXd yf = votes.values().array().colwise() * y.array();
  yf.rowwise() -= yf.colwise().mean();
  const Eigen::MatrixXd cov = (yf.transpose() * yf) / static_cast<double>(m);
  const Eigen::Map<const Eigen::VectorXd> w(q.weights().data(), static_cast<Eigen::Index>(q.size()));
  const double full = w.dot(cov * w);
  const double diag = (w.array().square() * cov.diagonal().array()).sum();
  return w.squaredNorm() + (full - diag);
}

double independent_voters_bound_from_disagreement(std::size_t n, double disagreement) {
  if (n == 0) throw InputError("need at least one voter");
  if (!(disagreement < 0.5)) throw InputError("disagreement must be below 1/2");
  return 1.0 / (static_cast<double>(n) * (1.0 - 2.0 * disagreement));
}

double independent_voters_bound_from_gibbs(std::size_t n, double gibbs_risk) {
  if (n == 0) throw InputError("need at least one voter");
  if (!(gibbs_risk < 0.5)) throw InputError("Gibbs risk must be below 1/2");
  const double t = 1.0 - 2.0 * gibbs_risk;
  return 1.0 / (static_cast<double>(n) * t * t);
}

}  // namespace pacvote
