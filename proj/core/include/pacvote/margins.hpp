#pragma once

#include <cstddef>
#include <vector>

#include "pacvote/types.hpp"

namespace pacvote {

// M[i] = y_i * sum_j q_j F[i][j], computed pairwise as
// y_i * sum_{j<n} (q_j - q_{j+n}) F[i][j] so that balanced pairs cancel exactly.
std::vector<double> margins(const VoteMatrix& votes, const Posterior& q);

// Moments, Gibbs risk, disagreement, joint error/success, Bayes risk (a zero
// margin counts as an error) and the empirical C-bound when mu1 > 0.
MarginSummary summarize(const std::vector<double>& margins);

// 1 - mu1^2 / mu2. Throws InputError when mu1 <= 0 (Gibbs risk >= 1/2) or
// when mu2 < mu1^2.
double c_bound(double mu1, double mu2);

// Same value written as Var/mu2 and in terms of (r, d).
double c_bound_variance_form(double mu1, double mu2);
double c_bound_risk_form(double gibbs_risk, double disagreement);

// The three equivalent conditions under which the C-bound is tight.
struct OptimalityFlags {
  bool moment_condition = false;  // mu2 <= mu1
  bool gibbs_vs_disagreement = false;  // r <= d
  bool cbound_vs_twice_gibbs = false;  // C <= 2r
};

OptimalityFlags optimality_flags(double mu1, double mu2);

// sum_j q_j^2 + sum_{j != k} q_j q_k Cov(y f_j, y f_k) over the sample.
double variance_upper_bound(const Posterior& q, const VoteMatrix& votes);

// C-bound upper bounds for n independent voters under a uniform posterior:
// 1 / (n (1 - 2d)) and 1 / (n (1 - 2r)^2).
double independent_voters_bound_from_disagreement(std::size_t n, double disagreement);
double independent_voters_bound_from_gibbs(std::size_t n, double gibbs_risk);

}  // namespace pacvote
