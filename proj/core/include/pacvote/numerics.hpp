#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace pacvote {

// xi(m) = sum_{k=0}^{m} C(m,k) (k/m)^k (1 - k/m)^(m-k), with 0^0 = 1.
// Satisfies sqrt(m) <= xi(m) <= 2 sqrt(m) for m >= 2.
double xi(std::size_t m);

// kl(q || p) between Bernoulli distributions; 0 ln 0 = 0 and +inf when p puts
// zero mass where q does not.
double kl_bernoulli(double q, double p);

// KL divergence between the three-outcome distributions (q1, q2, 1-q1-q2)
// and (p1, p2, 1-p1-p2).
double kl_trivalent(double q1, double q2, double p1, double p2);

enum class KlDirection { sup, inf };

struct KlLevelSetQuery {
  double q = 0.0;
  double tau = 0.0;
  KlDirection direction = KlDirection::sup;
  double cap = 1.0;  // upper limit for the sup direction
};

struct KlInversion {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |kl(q || value) - tau| when the level is reached, else 0
  bool level_reached = true;
};

// sup: largest r in [q, cap] with kl(q || r) <= tau (cap when the level is
// never reached). inf: smallest r in [0, q] with kl(q || r) <= tau.
// Bisection; the returned end is the conservative one.
KlInversion kl_invert(const KlLevelSetQuery& query);

struct ScalarMaximum {
  double argmax = 0.0;
  double value = 0.0;
  int iterations = 0;
};

// Golden-section search for the maximum of a unimodal function on [lo, hi].
ScalarMaximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol = 1e-10, int max_iterations = 200);

// F_C(d, e) = 1 - (1 - (2e + d))^2 / (1 - 2d).
double fc_value(double d, double e);

struct FcMaximum {
  double d = 0.0;
  double e = 0.0;
  double value = 1.0;
  bool empty_region = false;
  int iterations = 0;
};

// Supremum of F_C over
//   { (d, e) : kl(d_S, e_S || d, e) <= tau, d <= 2(sqrt(e) - e),
//     2e + d <= 1 - 1e-12, e <= e_cap }.
// The region is convex and F_C concave on it. An empty region yields 1.
FcMaximum maximize_fc_over_region(double d_s, double e_s, double tau,
                                  std::optional<double> e_cap = std::nullopt);

}  // namespace pacvote
