#include "pacvote/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "pacvote/types.hpp"

namespace pacvote {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOpenMargin = 1e-12;  // 2e + d <= 1 - kOpenMargin
constexpr double kSliceTolerance = 1e-13;

// x ln(x / y) with 0 ln 0 = 0.
double xlogx_over_y(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return kInf;
  return x * std::log(x / y);
}

// Largest x in [feasible, limit] with f(x) <= tau, given f(feasible) <= tau
// and f monotone away from `feasible`. Works in either direction.
double level_edge(const std::function<double(double)>& f, double feasible, double limit,
                  double tau, int* iterations = nullptr) {
  if (f(limit) <= tau) return limit;
  double in = feasible;
  double out = limit;
  int it = 0;
  while (std::abs(out - in) > kSliceTolerance && it < 200) {
    const double mid = 0.5 * (in + out);
    if (f(mid) <= tau) {
      in = mid;
    } else {
      out = mid;
    }
    ++it;
  }
  if (iterations != nullptr) *iterations += it;
  return in;
}

}  // namespace

namespace {

double xi_uncached(std::size_t m) {
  const double md = static_cast<double>(m);
  const double lg_m = std::lgamma(md + 1.0);
  std::vector<double> terms;
  terms.reserve(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    const double kd = static_cast<double>(k);
    double log_term = lg_m - std::lgamma(kd + 1.0) - std::lgamma(md - kd + 1.0);
    if (k > 0) log_term += kd * std::log(kd / md);
    if (k < m) log_term += (md - kd) * std::log1p(-kd / md);
    terms.push_back(std::exp(log_term));
  }
  std::sort(terms.begin(), terms.end(), std::greater<>());
  double sum = 0.0;
  double carry = 0.0;
  for (double t : terms) {
    const double s = sum + t;
    carry += std::abs(sum) >= std::abs(t) ? (sum - s) + t : (t - s) + sum;
    sum = s;
  }
  return sum + carry;
}

}  // namespace

double xi(std::size_t m) {
  if (m == 0) throw InputError("xi(m) requires m >= 1");
  // O(m) per call; bound sweeps ask for the same few m many times.
  static std::mutex mutex;
  static std::unordered_map<std::size_t, double> cache;
  {
    std::lock_guard lock(mutex);
    if (const auto it = cache.find(m); it != cache.end()) return it->second;
  }
  const double value = xi_uncached(m);
  std::lock_guard lock(mutex);
  if (cache.size() >= 4096) cache.clear();
  cache.emplace(m, value);
  return value;
}

double kl_bernoulli(double q, double p) {
  return xlogx_over_y(q, p) + xlogx_over_y(1.0 - q, 1.0 - p);
}

double kl_trivalent(double q1, double q2, double p1, double p2) {
  return xlogx_over_y(q1, p1) + xlogx_over_y(q2, p2) +
         xlogx_over_y(1.0 - q1 - q2, 1.0 - p1 - p2);
}

KlInversion kl_invert(const KlLevelSetQuery& query) {
  if (query.tau < 0.0 || std::isnan(query.tau)) throw InputError("kl level tau must be >= 0");
  if (!(query.q >= 0.0 && query.q <= 1.0)) throw InputError("kl_invert: q must lie in [0, 1]");
  const double q = query.q;
  const double tau = query.tau;
  KlInversion out;

  if (query.direction == KlDirection::sup) {
    const double cap = query.cap;
    if (q >= cap) {
      out.value = cap;
      out.level_reached = false;
      return out;
    }
    if (tau == 0.0) {
      out.value = q;
      return out;
    }
    if (kl_bernoulli(q, cap) <= tau) {
      out.value = cap;
      out.level_reached = false;
      return out;
    }
    double lo = q;
    double hi = cap;
    while (hi - lo > 1e-12 && out.iterations < 60) {
      const double mid = 0.5 * (lo + hi);
      if (kl_bernoulli(q, mid) <= tau) {
        lo = mid;
      } else {
        hi = mid;
      }
      ++out.iterations;
    }
    out.value = hi;
  } else {
    if (q <= 0.0) {
      out.value = 0.0;
      out.level_reached = false;
      return out;
    }
    if (tau == 0.0) {
      out.value = q;
      return out;
    }
    if (kl_bernoulli(q, 0.0) <= tau) {
      out.value = 0.0;
      out.level_reached = false;
      return out;
    }
    double lo = 0.0;
    double hi = q;
    while (hi - lo > 1e-12 && out.iterations < 60) {
      const double mid = 0.5 * (lo + hi);
      if (kl_bernoulli(q, mid) <= tau) {
        hi = mid;
      } else {
        lo = mid;
      }
      ++out.iterations;
    }
    out.value = lo;
  }
  out.residual = std::abs(kl_bernoulli(q, out.value) - tau);
  return out;
}

ScalarMaximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol, int max_iterations) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  ScalarMaximum out;
  if (!(hi > lo)) {
    out.argmax = lo;
    out.value = f(lo);
    return out;
  }
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol && out.iterations < max_iterations) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++out.iterations;
  }
  // The endpoints are candidates too: the maximum of a concave function on a
  // closed interval may sit on its boundary.
  out.argmax = fc >= fd ? c : d;
  out.value = std::max(fc, fd);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx > out.value) {
      out.value = fx;
      out.argmax = x;
    }
  }
  return out;
}

double fc_value(double d, double e) {
  const double num = 1.0 - (2.0 * e + d);
  return 1.0 - num * num / (1.0 - 2.0 * d);
}

namespace {

struct Slice {
  double lo = 0.0;
  double hi = -1.0;
  bool empty() const { return hi < lo; }
  double width() const { return hi - lo; }
};

class FcRegion {
 public:
  FcRegion(double d_s, double e_s, double tau, std::optional<double> e_cap)
      : d_s_(d_s), e_s_(e_s), tau_(tau), e_cap_(e_cap) {}

  // Range of d for which the kl constraint can hold for some e.
  std::pair<double, double> kl_d_range() const {
    auto f = [this](double d) { return kl_bernoulli(d_s_, d); };
    return {level_edge(f, d_s_, 0.0, tau_), level_edge(f, d_s_, 0.5, tau_)};
  }

  Slice slice(double d) const {
    Slice s;
    if (!(d >= 0.0 && d < 0.5)) return s;
    // kl constraint: convex in e, minimized at e* on the segment e in [0, 1 - d].
    const double e_star = d == d_s_ ? e_s_ : (d_s_ < 1.0 ? e_s_ * (1.0 - d) / (1.0 - d_s_) : 0.0);
    auto f = [this, d](double e) { return kl_trivalent(d_s_, e_s_, d, e); };
    if (f(e_star) > tau_) return s;
    double lo = level_edge(f, e_star, 0.0, tau_);
    double hi = level_edge(f, e_star, 1.0 - d, tau_);
    // d <= 2 (sqrt(e) - e)  <=>  sqrt(e) in [(1 - sqrt(1 - 2d)) / 2, (1 + sqrt(1 - 2d)) / 2].
    const double root = std::sqrt(1.0 - 2.0 * d);
    const double s_lo = 0.5 * (1.0 - root);
    const double s_hi = 0.5 * (1.0 + root);
    lo = std::max(lo, s_lo * s_lo);
    hi = std::min(hi, s_hi * s_hi);
    // 2e + d < 1.
    hi = std::min(hi, 0.5 * (1.0 - kOpenMargin - d));
    if (e_cap_) hi = std::min(hi, *e_cap_);
    s.lo = lo;
    s.hi = hi;
    return s;
  }

 private:
  double d_s_;
  double e_s_;
  double tau_;
  std::optional<double> e_cap_;
};

}  // namespace

FcMaximum maximize_fc_over_region(double d_s, double e_s, double tau, std::optional<double> e_cap) {
  if (tau < 0.0 || std::isnan(tau)) throw InputError("kl level tau must be >= 0");
  if (!(d_s >= 0.0 && e_s >= 0.0 && d_s + e_s <= 1.0 + 1e-12)) {
    throw InputError("empirical (d, e) must be probabilities with d + e <= 1");
  }
  FcRegion region(d_s, e_s, tau, e_cap);
  FcMaximum out;

  // The level set collapses to the empirical point.
  if (tau == 0.0) {
    const bool inside = d_s < 0.5 && 2.0 * e_s + d_s <= 1.0 - 1e-12 &&
                        d_s <= 2.0 * (std::sqrt(e_s) - e_s) + 1e-15 && (!e_cap || e_s <= *e_cap);
    if (!inside) {
      out.empty_region = true;
      return out;
    }
    out.d = d_s;
    out.e = e_s;
    out.value = std::clamp(fc_value(d_s, e_s), 0.0, 1.0);
    return out;
  }

  auto [d_lo, d_hi] = region.kl_d_range();
  d_hi = std::min(d_hi, 0.5 - 1e-15);
  if (d_hi < d_lo) {
    out.empty_region = true;
    return out;
  }

  // Slice width is concave in d (upper slice edges are concave, lower edges
  // convex), so its maximizer locates a feasible d if one exists.
  auto width = [&](double d) { return region.slice(d).width(); };
  const ScalarMaximum widest = golden_section_maximize(width, d_lo, d_hi, 1e-13);
  out.iterations += widest.iterations;
  if (widest.value < 0.0) {
    out.empty_region = true;
    return out;
  }

  auto feasible = [&](double d) { return !region.slice(d).empty(); };
  auto edge = [&](double inside, double outside) {
    if (feasible(outside)) return outside;
    for (int it = 0; it < 200 && std::abs(outside - inside) > 1e-14; ++it) {
      const double mid = 0.5 * (inside + outside);
      (feasible(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  const double d_a = edge(widest.argmax, d_lo);
  const double d_b = edge(widest.argmax, d_hi);

  // F_C is increasing in e on the region (2e + d < 1), so each slice is
  // maximized at its upper edge.
  auto best_on_slice = [&](double d) {
    const Slice s = region.slice(d);
    if (s.empty()) return -std::numeric_limits<double>::infinity();
    return fc_value(d, s.hi);
  };
  const ScalarMaximum best = golden_section_maximize(best_on_slice, d_a, d_b, 1e-12);
  out.iterations += best.iterations;
  out.d = best.argmax;
  out.e = region.slice(best.argmax).hi;
  out.value = std::clamp(best.value, 0.0, 1.0);
  return out;
}

}  // namespace pacvote
