#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pacvote/qp.hpp"
#include "pacvote/types.hpp"
#include "pacvote/voters.hpp"

namespace pacvote {

// Program matrices for MinCq on the first n voters of a self-complemented
// set: M_ij = E[f_i f_j], m_i = E[y f_i], a_i = (1/n) sum_j M_ji,
// rhs = mu/2 + (1/2n) sum_i m_i, box [0, 1/n].
QpProblem mincq_build(const VoteMatrix& votes, double mu);

// Range of mu reachable by quasi-uniform posteriors on this sample:
// [-sum|m_i|/n, sum|m_i|/n].
std::pair<double, double> realizable_margin_range(const VoteMatrix& votes);

class MinCqModel {
 public:
  MinCqModel(std::shared_ptr<const SelfComplementedVoterSet> voters, std::vector<double> reduced,
             double mu, double objective);

  const SelfComplementedVoterSet& voters() const { return *voters_; }
  std::shared_ptr<const SelfComplementedVoterSet> voters_ptr() const { return voters_; }
  // q_1..q_n, each in [0, 1/n].
  const std::vector<double>& reduced_weights() const { return reduced_; }
  double mu() const { return mu_; }
  double objective() const { return objective_; }
  // (q_1..q_n, 1/n - q_1, .., 1/n - q_n).
  Posterior posterior() const;

  // sgn(sum_i (2 q_i - 1/n) f_i(x)); 0 only on an exact tie.
  int predict(std::span<const double> x) const;
  // sum_i (2 q_i - 1/n) f_i(x).
  double score(std::span<const double> x) const;

 private:
  std::shared_ptr<const SelfComplementedVoterSet> voters_;
  std::vector<double> reduced_;
  std::vector<double> vote_weights_;  // 2 q_i - 1/n
  double mu_;
  double objective_;
};

struct MinCqDiagnostics {
  QpSolution qp;
  double empirical_mu1 = 0.0;
  double empirical_mu2 = 0.0;
};

struct MinCqResult {
  MinCqModel model;
  MinCqDiagnostics diagnostics;
};

// Solves the program and checks that the posterior reaches mu1 = mu.
// InfeasibleError when mu is not S-realizable.
MinCqResult mincq_train(std::shared_ptr<const SelfComplementedVoterSet> voters,
                        const Dataset& dataset, double mu, const QpOptions& options = {});
MinCqResult mincq_train(std::shared_ptr<const SelfComplementedVoterSet> voters,
                        const VoteMatrix& votes, double mu, const QpOptions& options = {});

// Quasi-uniform posterior with the same majority vote:
// Q'(f_i) = 1/2n + (Q(f_i) - Q(f_{i+n})) / (2 n M), M = max_i |Q(f_i) - Q(f_{i+n})|.
Posterior quasi_uniformize(const Posterior& q);

// Q' = (mu / mu1) Q + (1 - mu / mu1) U for a quasi-uniform Q with empirical
// first margin moment mu1 >= mu on `votes`.
Posterior rescale_margin(const Posterior& q, const VoteMatrix& votes, double mu_target);

}  // namespace pacvote
