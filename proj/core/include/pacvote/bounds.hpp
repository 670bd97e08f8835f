#pragma once

#include <cstddef>
#include <optional>

#include "pacvote/types.hpp"

namespace pacvote {

// Everything a bound needs besides the bound id. Empirical statistics are
// taken on the m labeled examples; m_u and unlabeled_disagreement describe the
// unlabeled sample used by the semi-supervised bound.
struct BoundInputs {
  std::size_t m = 0;
  double delta = 0.05;
  double kl_qp = 0.0;
  MarginSummary stats;
  std::optional<std::size_t> m_unlabeled;
  std::optional<double> unlabeled_disagreement;
  std::size_t compression_size = 0;
  bool aligned = false;  // posterior aligned on the prior (quasi-uniform for a uniform prior)
};

// Statistics from a Gibbs risk and a disagreement alone (mu1 = 1 - 2r,
// mu2 = 1 - 2d, e = r - d/2). The Bayes risk is unknown and left at 0.
MarginSummary summary_from_rates(double gibbs_risk, double disagreement);

// KL(Q || P) for P uniform over the voters of q; 0 ln 0 = 0.
double kl_qp_vs_uniform(const Posterior& q);

// Twice the KL upper bound on the Gibbs risk.
BoundReport bound0(const BoundInputs& in);
// C-bound from a KL upper bound on r and a KL lower bound on d.
BoundReport bound1(const BoundInputs& in);
// As bound1, with the disagreement bound taken on m_unlabeled examples.
BoundReport bound1_semi(const BoundInputs& in);
// Supremum of F_C over the trivalent-kl region around (d_S, e_S).
BoundReport bound2(const BoundInputs& in);
// As bound2 with delta/2 and an additional upper bound on e.
BoundReport bound2_prime(const BoundInputs& in);
// KL-free bound for aligned posteriors.
BoundReport bound3(const BoundInputs& in);
// KL-free bound for aligned posteriors on kernel voters (compression size 1).
BoundReport bound3_prime(const BoundInputs& in);

BoundReport compute_bound(BoundId id, const BoundInputs& in);

}  // namespace pacvote
