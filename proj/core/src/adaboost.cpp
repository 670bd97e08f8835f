#include "pacvote/adaboost.hpp"

#include <cmath>

namespace pacvote {

BoostingResult adaboost_train(const VoteMatrix& votes, std::size_t rounds) {
  if (rounds == 0) throw InputError("AdaBoost needs at least one round");
  const auto m = static_cast<Eigen::Index>(votes.examples());
  if (m == 0) throw InputError("AdaBoost needs a non-empty sample");
  const std::size_t n = votes.half_size();
  const auto f = votes.half();

  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) y(i) = votes.labels()[static_cast<std::size_t>(i)];
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  std::vector<double> cumulative(2 * n, 0.0);

  BoostingResult result;
  for (std::size_t t = 0; t < rounds; ++t) {
    // Edge of voter j: sum_i D_i y_i f_j(x_i); the complement has the opposite edge.
    const Eigen::VectorXd edges = f.transpose() * dist.cwiseProduct(y);
    Eigen::Index best = 0;
    edges.cwiseAbs().maxCoeff(&best);
    const double edge = edges(best);
    if (!(std::abs(edge) > 1e-12)) {
      result.stopped_early = true;
      result.stop_reason = "no voter beats 1/2 at round " + std::to_string(t + 1);
      break;
    }
    const std::size_t voter = edge > 0.0 ? static_cast<std::size_t>(best)
                                         : static_cast<std::size_t>(best) + n;
    const double gamma = std::min(std::abs(edge), 1.0 - 1e-10);
    const double alpha = 0.5 * std::log((1.0 + gamma) / (1.0 - gamma));
    cumulative[voter] += alpha;

    BoostingRound round;
    round.voter = voter;
    round.alpha = alpha;
    round.weighted_error = 0.5 * (1.0 - std::abs(edge));
    round.posterior = Posterior::normalized(cumulative);
    result.rounds.push_back(std::move(round));

    if (std::abs(edge) >= 1.0 - 1e-12) {
      result.stopped_early = true;
      result.stop_reason = "zero weighted error at round " + std::to_string(t + 1);
      break;
    }
    const double sign = edge > 0.0 ? 1.0 : -1.0;
    const Eigen::VectorXd h = sign * f.col(best);
    dist = dist.array() * (-alpha * y.array() * h.array()).exp();
    dist /= dist.sum();
  }
  return result;
}

}  // namespace pacvote
