#pragma once

#include <cstddef>
#include <vector>

#include "pacvote/types.hpp"

namespace pacvote {

struct BoostingRound {
  std::size_t voter = 0;  // index in [0, 2n)
  double alpha = 0.0;
  double weighted_error = 0.0;
  // Cumulative alphas normalized into a distribution over the 2n voters.
  Posterior posterior;
};

struct BoostingResult {
  std::vector<BoostingRound> rounds;
  bool stopped_early = false;
  std::string stop_reason;
};

// Discrete AdaBoost over the columns of a vote matrix. Each round picks the
// voter (or its complement) with the largest weighted edge. Stops early when
// no voter beats 1/2 or after a voter with zero weighted error.
BoostingResult adaboost_train(const VoteMatrix& votes, std::size_t rounds);

}  // namespace pacvote
