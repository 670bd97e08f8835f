#include "pacvote/mincq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pacvote/margins.hpp"

namespace pacvote {

QpProblem mincq_build(const VoteMatrix& votes, double mu) {
  const auto n = static_cast<Eigen::Index>(votes.half_size());
  const auto m = static_cast<double>(votes.examples());
  if (n == 0 || votes.examples() == 0) throw InputError("MinCq needs voters and examples");
  const auto f = votes.half();
  Eigen::VectorXd y(f.rows());
  for (Eigen::Index i = 0; i < f.rows(); ++i) y(i) = votes.labels()[static_cast<std::size_t>(i)];

  QpProblem p;
  p.M = (f.transpose() * f) / m;
  p.M = 0.5 * (p.M + p.M.transpose());
  p.m = (f.transpose() * y) / m;
  p.a = p.M.colwise().sum().transpose() / static_cast<double>(n);
  p.upper = 1.0 / static_cast<double>(n);
  p.rhs = 0.5 * mu + p.m.sum() / (2.0 * static_cast<double>(n));
  return p;
}

std::pair<double, double> realizable_margin_range(const VoteMatrix& votes) {
  const QpProblem p = mincq_build(votes, 0.0);
  const double reach = p.m.cwiseAbs().sum() / static_cast<double>(p.m.size());
  return {-reach, reach};
}

MinCqModel::MinCqModel(std::shared_ptr<const SelfComplementedVoterSet> voters,
                       std::vector<double> reduced, double mu, double objective)
    : voters_(std::move(voters)), reduced_(std::move(reduced)), mu_(mu), objective_(objective) {
  if (!voters_) throw InputError("MinCq model needs a voter set");
  const std::size_t n = voters_->half_size();
  if (reduced_.size() != n) throw InputError("MinCq weights do not match the voter set");
  const double upper = 1.0 / static_cast<double>(n);
  vote_weights_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (reduced_[i] < -1e-12 || reduced_[i] > upper + 1e-12) {
      throw InputError("MinCq weight outside [0, 1/n]");
    }
    reduced_[i] = std::clamp(reduced_[i], 0.0, upper);
    vote_weights_[i] = 2.0 * reduced_[i] - upper;
  }
}

Posterior MinCqModel::posterior() const {
  const std::size_t n = reduced_.size();
  const double upper = 1.0 / static_cast<double>(n);
  std::vector<double> w(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = reduced_[i];
    w[i + n] = upper - reduced_[i];
  }
  return Posterior(std::move(w));
}

double MinCqModel::score(std::span<const double> x) const {
  std::vector<double> out(reduced_.size());
  voters_->evaluate_half(x, out);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += vote_weights_[i] * out[i];
  return s;
}

int MinCqModel::predict(std::span<const double> x) const {
  const double s = score(x);
  return s > 0.0 ? 1 : (s < 0.0 ? -1 : 0);
}

MinCqResult mincq_train(std::shared_ptr<const SelfComplementedVoterSet> voters,
                        const VoteMatrix& votes, double mu, const QpOptions& options) {
  if (!(mu > 0.0)) throw InputError("MinCq margin mu must be positive");
  if (!voters || voters->half_size() != votes.half_size()) {
    throw InputError("vote matrix does not match the voter set");
  }
  const QpProblem p = mincq_build(votes, mu);
  QpSolution sol;
  try {
    sol = solve_box_eq_qp(p, options);
  } catch (const InfeasibleError&) {
    const auto [lo, hi] = realizable_margin_range(votes);
    std::ostringstream msg;
    msg << "mu = " << mu << " is not S-realizable; quasi-uniform posteriors reach margins in ["
        << lo << ", " << hi << "]";
    throw InfeasibleError(msg.str(), lo, hi);
  }
  std::vector<double> reduced(sol.q.data(), sol.q.data() + sol.q.size());
  MinCqModel model(std::move(voters), std::move(reduced), mu, sol.objective);

  MinCqDiagnostics diag;
  diag.qp = sol;
  const MarginSummary s = summarize(margins(votes, model.posterior()));
  diag.empirical_mu1 = s.mu1;
  diag.empirical_mu2 = s.mu2;
  if (std::abs(s.mu1 - mu) > 1e-8) {
    std::ostringstream msg;
    msg << "MinCq posterior has margin " << s.mu1 << " instead of " << mu;
    throw NumericalError(msg.str());
  }
  return {std::move(model), std::move(diag)};
}

MinCqResult mincq_train(std::shared_ptr<const SelfComplementedVoterSet> voters,
                        const Dataset& dataset, double mu, const QpOptions& options) {
  if (!voters) throw InputError("MinCq needs a voter set");
  const VoteMatrix votes = vote_matrix(*voters, dataset);
  return mincq_train(std::move(voters), votes, mu, options);
}

Posterior quasi_uniformize(const Posterior& q) {
  if (q.size() % 2 != 0) throw InputError("posterior is not over a self-complemented set");
  const std::size_t n = q.half_size();
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(q[i] - q[i + n]));
  if (!(gap > 0.0)) {
    throw InputError("posterior gives equal weight to every complementary pair; margin is 0");
  }
  const double nd = static_cast<double>(n);
  std::vector<double> w(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = (q[i] - q[i + n]) / (2.0 * nd * gap);
    w[i] = 1.0 / (2.0 * nd) + shift;
    w[i + n] = 1.0 / (2.0 * nd) - shift;
  }
  return Posterior(std::move(w));
}

Posterior rescale_margin(const Posterior& q, const VoteMatrix& votes, double mu_target) {
  if (!q.is_quasi_uniform(1e-10)) throw InputError("rescale_margin needs a quasi-uniform posterior");
  if (!(mu_target > 0.0)) throw InputError("target margin must be positive");
  const double mu1 = summarize(margins(votes, q)).mu1;
  if (mu1 < mu_target) {
    std::ostringstream msg;
    msg << "posterior margin " << mu1 << " is below the target " << mu_target;
    throw InputError(msg.str());
  }
  const double ratio = mu_target / mu1;
  const double uniform = 1.0 / static_cast<double>(q.size());
  const std::size_t n = q.half_size();
  std::vector<double> w(q.size());
  // Rebuild each pair from its difference so the pair mass stays exactly 1/n.
  for (std::size_t i = 0; i < n; ++i) {
    const double half_diff = 0.5 * ratio * (q[i] - q[i + n]);
    w[i] = uniform + half_diff;
    w[i + n] = uniform - half_diff;
  }
  return Posterior(std::move(w));
}

}  // namespace pacvote
