// Acceptance checks; one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pacvote/bounds.hpp"
#include "pacvote/evaluation.hpp"
#include "pacvote/margins.hpp"
#include "pacvote/mincq.hpp"
#include "pacvote/numerics.hpp"
#include "pacvote/qp.hpp"
#include "test_util.hpp"

namespace pacvote {
namespace {

// Collects failed checks for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(10);
    s << what << " = " << got << ", want " << want << " +- " << tol;
    expect(std::abs(got - want) <= tol, s.str());
  }
  void note(const std::string& text) { notes_.push_back(text); }
  bool ok() const { return failed_ == 0; }
  std::string detail() const {
    std::string out;
    for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
    if (failed_ > failures_.size()) out += "; " + std::to_string(failed_ - failures_.size()) + " more";
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
  std::size_t failed_ = 0;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

BoundInputs stats_inputs(double gibbs_risk, double disagreement, std::size_t m, double kl,
                         double delta) {
  BoundInputs in;
  in.m = m;
  in.delta = delta;
  in.kl_qp = kl;
  in.stats = summary_from_rates(gibbs_risk, disagreement);
  return in;
}

double diag(const BoundReport& r, const std::string& key) {
  for (const auto& [k, v] : r.diagnostics.values) {
    if (k == key) return v;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void gibbs_interval(Check& c) {
  const BoundInputs in = stats_inputs(0.30, 0.0, 1000, 5.0, 0.05);
  const BoundReport b0 = bound0(in);
  const double tau = diag(b0, "tau");
  const double lo = kl_invert({0.30, tau, KlDirection::inf}).value;
  const double hi = kl_invert({0.30, tau, KlDirection::sup, 0.5}).value;
  c.near(tau, 0.0117, 5e-4, "tau");
  c.near(lo, 0.233, 1e-3, "lower edge");
  c.near(hi, 0.373, 1e-3, "upper edge");
  c.near(b0.value, 0.746, 0.004, "B0");
  c.note("tau=" + fmt(tau) + " [" + fmt(lo) + ", " + fmt(hi) + "] B0=" + fmt(b0.value));
}

void region_bounds(Check& c) {
  const BoundInputs in = stats_inputs(0.30, 0.40, 1000, 5.0, 0.05);
  const BoundReport b2 = bound2(in);
  const BoundReport b2p = bound2_prime(in);
  c.near(diag(b2, "tau"), 0.0199, 5e-4, "tau");
  c.near(b2.value, 0.679, 0.005, "B2");
  c.near(b2p.value, 0.660, 0.005, "B2p");
  c.note("tau=" + fmt(diag(b2, "tau")) + " B2=" + fmt(b2.value) + " B2p=" + fmt(b2p.value));
}

long double xi_exact(unsigned m) {
  auto power = [](unsigned __int128 b, unsigned e) {
    unsigned __int128 r = 1;
    for (unsigned i = 0; i < e; ++i) r *= b;
    return r;
  };
  unsigned __int128 num = 0;
  unsigned __int128 binom = 1;
  for (unsigned k = 0; k <= m; ++k) {
    num += binom * power(k, k) * power(m - k, m - k);
    binom = binom * (m - k) / (k + 1);
  }
  return static_cast<long double>(num) / static_cast<long double>(power(m, m));
}

void xi_suite(Check& c) {
  c.expect(xi(1) == 2.0 && xi_exact(1) == 2.0L, "xi(1) != 2");
  c.expect(xi(2) == 2.5 && xi_exact(2) == 2.5L, "xi(2) != 2.5");
  for (unsigned m = 1; m <= 20; ++m) {
    const double exact = static_cast<double>(xi_exact(m));
    c.expect(std::abs(xi(m) - exact) <= 1e-13 * exact, "xi(" + std::to_string(m) + ") vs exact");
  }
  std::size_t points = 0;
  for (double lm = std::log(2.0); lm <= std::log(1e5) + 1e-9; lm += 0.05) {
    const auto m = static_cast<std::size_t>(std::llround(std::exp(lm)));
    const double v = xi(m);
    const double root = std::sqrt(static_cast<double>(m));
    c.expect(v >= root && v <= 2.0 * root, "sqrt bracket at m=" + std::to_string(m));
    ++points;
  }
  c.note(std::to_string(points) + " grid points, xi(1e5)=" + fmt(xi(100000)));
}

void margin_suite(Check& c) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dm(5, 60);
  std::uniform_int_distribution<int> dn(1, 12);
  int with_cbound = 0;
  for (int t = 0; t < 1000; ++t) {
    const bool binary = t % 2 == 0;
    const int n = dn(rng);
    const VoteMatrix f = testing::informative_votes(rng, dm(rng), n, binary);
    const Posterior q = testing::random_posterior(rng, static_cast<std::size_t>(2 * n));
    const MarginSummary s = summarize(margins(f, q));
    const std::string at = " (draw " + std::to_string(t) + ")";
    c.expect(std::abs(s.joint_error + s.joint_success + s.disagreement - 1.0) <= 1e-10, "e+s+d" + at);
    c.expect(s.disagreement <= 2.0 * s.gibbs_risk * (1.0 - s.gibbs_risk) + 1e-12, "d <= 2r(1-r)" + at);
    c.expect(s.bayes_risk <= 2.0 * s.gibbs_risk + 1e-12, "bayes <= 2r" + at);
    c.expect(variance_upper_bound(q, f) >= s.variance - 1e-12, "variance bound" + at);
    if (s.mu1 > 0.0) {
      ++with_cbound;
      const double c1 = c_bound(s.mu1, s.mu2);
      c.expect(std::abs(c1 - c_bound_variance_form(s.mu1, s.mu2)) <= 1e-12, "variance form" + at);
      c.expect(std::abs(c1 - c_bound_risk_form(s.gibbs_risk, s.disagreement)) <= 1e-12,
               "risk form" + at);
      c.expect(s.bayes_risk <= c1 + 1e-12, "bayes <= C" + at);
      const OptimalityFlags fl = optimality_flags(s.mu1, s.mu2);
      c.expect(fl.moment_condition == fl.gibbs_vs_disagreement, "flags 1-2" + at);
      if (std::abs(s.mu2 - s.mu1) > 1e-12) {
        c.expect(fl.moment_condition == fl.cbound_vs_twice_gibbs, "flags 1-3" + at);
      }
    }
  }
  c.expect(with_cbound > 200, "too few draws with mu1 > 0");
  c.note("1000 draws, " + std::to_string(with_cbound) + " with mu1 > 0");
}

int sign(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

void quasi_uniform_suite(Check& c) {
  std::mt19937_64 rng(7);
  int rescaled = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 9;
    const VoteMatrix f = testing::informative_votes(rng, 50, n, t % 2 == 0);
    const Posterior q = testing::random_posterior(rng, static_cast<std::size_t>(2 * n));
    const Posterior qu = quasi_uniformize(q);
    const auto before = margins(f, q);
    const auto after = margins(f, qu);
    bool same = true;
    for (std::size_t i = 0; i < before.size(); ++i) same = same && sign(before[i]) == sign(after[i]);
    c.expect(same, "prediction changed (draw " + std::to_string(t) + ")");
    const MarginSummary s = summarize(after);
    if (!(s.mu1 > 0.0)) continue;
    const double target = s.mu1 * 0.3;
    const MarginSummary r = summarize(margins(f, rescale_margin(qu, f, target)));
    c.expect(std::abs(r.mu1 - target) <= 1e-10, "rescaled margin (draw " + std::to_string(t) + ")");
    c.expect(std::abs(*r.c_bound - *s.c_bound) <= 1e-10, "C-bound changed (draw " + std::to_string(t) + ")");
    ++rescaled;
  }
  c.note("200 posteriors, " + std::to_string(rescaled) + " rescaled");
}

void mincq_suite(Check& c) {
  {
    const Dataset toy({{{1.0}, 1}, {{-1.0}, -1}});
    auto voters = std::make_shared<const SelfComplementedVoterSet>(SelfComplementedVoterSet::from_explicit(1));
    const MinCqResult r = mincq_train(voters, toy, 0.5);
    c.near(r.model.reduced_weights()[0], 0.75, 1e-12, "n=1 q");
  }
  std::mt19937_64 rng(11);
  double worst_gap = 0.0, worst_kkt = 0.0, worst_eq = 0.0;
  int solved = 0;
  while (solved < 50) {
    const VoteMatrix f = testing::informative_votes(rng, 30, 2, solved % 2 == 0);
    const double reach = realizable_margin_range(f).second;
    if (!(reach > 1e-3)) continue;
    const double mu = reach * 0.5;
    auto voters = std::make_shared<const SelfComplementedVoterSet>(SelfComplementedVoterSet::from_explicit(2));
    const MinCqResult r = mincq_train(voters, f, mu);
    const QpProblem p = mincq_build(f, mu);
    // Oracle: q1 on a 1e-3 grid of [0, 1/2]; q2 from the equality when it lands in the box.
    double oracle = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 500; ++k) {
      Eigen::Vector2d q;
      q(0) = k * 1e-3;
      if (std::abs(p.m(1)) > 1e-12) {
        q(1) = (p.rhs - p.m(0) * q(0)) / p.m(1);
      } else {
        if (std::abs(p.m(0) * q(0) - p.rhs) > 1e-3 * std::abs(p.m(0))) continue;
        q(1) = 0.0;
      }
      if (q(1) < 0.0 || q(1) > p.upper) continue;
      oracle = std::min(oracle, qp_objective(p, q));
    }
    const double got = r.diagnostics.qp.objective;
    if (std::isfinite(oracle)) worst_gap = std::max(worst_gap, got - oracle);
    worst_kkt = std::max(worst_kkt, r.diagnostics.qp.kkt_residual);
    worst_eq = std::max(worst_eq, r.diagnostics.qp.equality_residual);
    c.expect(r.model.posterior().is_quasi_uniform(1e-12), "not quasi-uniform");
    ++solved;
  }
  c.expect(worst_gap <= 2e-3, "objective above grid oracle by " + fmt(worst_gap));
  c.expect(worst_kkt <= 1e-6, "KKT residual " + fmt(worst_kkt));
  c.expect(worst_eq <= 1e-8, "equality residual " + fmt(worst_eq));
  c.note("gap=" + fmt(worst_gap) + " kkt=" + fmt(worst_kkt) + " eq=" + fmt(worst_eq));
}

Dataset two_gaussians(std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<Example> ex;
  ex.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const int y = coin(rng) ? 1 : -1;
    ex.push_back({{2.5 * y + g(rng), g(rng)}, y});
  }
  return Dataset(std::move(ex), "two-gaussians");
}

void learning_sanity(Check& c) {
  std::mt19937_64 rng(42);
  const Dataset train = two_gaussians(500, rng);
  const Dataset test = two_gaussians(2000, rng);
  ExperimentConfig config;

  VoterSpec rbf;
  rbf.family = VoterFamily::rbf;
  rbf.tanh_normalize = true;
  const auto rbf_cv = cross_validate(mincq_learner(rbf),
                                     mincq_grid(log_grid(1e-4, 1e-2, 5), log_grid(0.1, 10.0, 3)),
                                     train, config);
  const double rbf_risk = risk(rbf_cv.model, test);

  VoterSpec stumps;
  stumps.tanh_normalize = true;
  const auto stump_cv = cross_validate(mincq_learner(stumps), mincq_grid(config.mu_grid), train, config);
  const double stump_risk = risk(stump_cv.model, test);

  // Uniform vote over the stumps, each oriented by its training correlation.
  const AttributeStats stats = attribute_stats(train);
  const Dataset ntrain = tanh_normalize(train, stats);
  const SelfComplementedVoterSet voters = build_stumps(ntrain, stumps.per_attribute);
  const QpProblem p = mincq_build(vote_matrix(voters, ntrain), 0.0);
  const std::size_t n = voters.half_size();
  std::vector<double> out(n);
  const Predictor baseline = [&](std::span<const double> x) {
    voters.evaluate_half(tanh_normalize(x, stats), out);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sign(p.m(static_cast<Eigen::Index>(i))) * out[i];
    return sign(s);
  };
  const double baseline_risk = risk(baseline, test);

  c.expect(rbf_risk <= 0.05, "RBF MinCq test risk " + fmt(rbf_risk) + " > 0.05");
  c.expect(stump_risk < baseline_risk,
           "stump MinCq " + fmt(stump_risk) + " does not beat uniform vote " + fmt(baseline_risk));
  c.note("rbf=" + fmt(rbf_risk) + " (gamma=" + fmt(rbf_cv.best.at("gamma")) +
         ", mu=" + fmt(rbf_cv.best.at("mu")) + ") stumps=" + fmt(stump_risk) +
         " uniform=" + fmt(baseline_risk));
}

void sign_tests(Check& c) {
  // (C-bound, R_S, validation, CV, 1000 rounds) test risks for 17 datasets.
  const double table[17][5] = {
      {.166, .169, .165, .166, .172}, {.050, .047, .041, .047, .058}, {.187, .199, .156, .174, .199},
      {.252, .196, .346, .290, .196}, {.320, .320, .279, .320, .340}, {.215, .289, .181, .195, .289},
      {.085, .120, .142, .114, .085}, {.005, .014, .061, .005, .010}, {.041, .041, .143, .044, .043},
      {.050, .050, .063, .044, .049}, {.289, .289, .335, .289, .295}, {.010, .024, .079, .024, .010},
      {.192, .250, .317, .163, .202}, {.389, .364, .358, .403, .389}, {.032, .041, .032, .028, .046},
      {.101, .102, .106, .103, .115}, {.049, .060, .091, .046, .060}};
  std::vector<std::pair<double, double>> vs_final, vs_rs;
  for (const auto& row : table) {
    vs_final.emplace_back(row[0], row[4]);
    vs_rs.emplace_back(row[0], row[1]);
  }
  const SignTestResult a = sign_test(vs_final);
  const SignTestResult b = sign_test(vs_rs);
  c.near(a.p_value, 0.02, 0.01, "p (vs 1000 rounds)");
  c.near(b.p_value, 0.05, 0.02, "p (vs R_S)");
  c.note("vs 1000 rounds " + std::to_string(a.wins) + "/" + std::to_string(a.losses) + "/" +
         std::to_string(a.ties) + " p=" + fmt(a.p_value) + "; vs R_S " + std::to_string(b.wins) + "/" +
         std::to_string(b.losses) + "/" + std::to_string(b.ties) + " p=" + fmt(b.p_value));
}

void bound_ordering(Check& c) {
  const BoundId all[] = {BoundId::B0, BoundId::B1, BoundId::B1s, BoundId::B2,
                         BoundId::B2p, BoundId::B3, BoundId::B3p};
  const std::vector<double> deltas = {0.01, 0.05, 0.1, 0.25, 0.5, 1.0};
  const std::vector<std::size_t> sizes = {10, 30, 100, 300, 1000, 3000, 10000};
  int evaluated = 0;
  for (double r : {0.05, 0.15, 0.3, 0.45}) {
    for (double d : {0.0, 0.1, 0.3, 0.45}) {
      if (r - d / 2.0 < 0.0 || d > 2.0 * r * (1.0 - r)) continue;
      for (BoundId id : all) {
        auto value = [&](std::size_t m, double delta) {
          BoundInputs in = stats_inputs(r, d, m, id == BoundId::B3 || id == BoundId::B3p ? 0.0 : 2.0, delta);
          in.aligned = true;
          in.compression_size = 1;
          in.m_unlabeled = 10 * m;
          ++evaluated;
          const double v = compute_bound(id, in).value;
          c.expect(v >= 0.0 && v <= 1.0, to_string(id) + " outside [0, 1]");
          return v;
        };
        std::vector<std::vector<double>> grid(sizes.size(), std::vector<double>(deltas.size()));
        for (std::size_t i = 0; i < sizes.size(); ++i) {
          for (std::size_t j = 0; j < deltas.size(); ++j) grid[i][j] = value(sizes[i], deltas[j]);
        }
        for (std::size_t i = 0; i < sizes.size(); ++i) {
          for (std::size_t j = 0; j < deltas.size(); ++j) {
            if (j > 0) c.expect(grid[i][j] <= grid[i][j - 1] + 1e-9, to_string(id) + " increases with delta");
            if (i > 0) c.expect(grid[i][j] <= grid[i - 1][j] + 1e-9, to_string(id) + " increases with m");
          }
        }
      }
      for (std::size_t m : sizes) {
        BoundInputs in = stats_inputs(r, d, m, 2.0, 0.05);
        in.m_unlabeled = 100 * m;
        c.expect(bound1_semi(in).value <= bound1(in).value + 1e-12, "B1s above B1");
        in.aligned = true;
        in.compression_size = 1;
        in.kl_qp = 0.0;
        c.expect(bound3_prime(in).value >= bound3(in).value - 1e-12, "B3p below B3");
      }
    }
  }
  c.note(std::to_string(evaluated) + " bound evaluations");
}

struct Criterion {
  int id;
  std::string name;
  double budget_ms;
  std::function<void(Check&)> run;
};

}  // namespace
}  // namespace pacvote

int main() {
  using namespace pacvote;
  const std::vector<Criterion> criteria = {
      {1, "Gibbs kl interval and bound 0", 10, gibbs_interval},
      {2, "trivalent region bounds 2 and 2'", 100, region_bounds},
      {3, "xi(m) properties", 1000, xi_suite},
      {4, "margin identities", 5000, margin_suite},
      {5, "quasi-uniform transformations", 5000, quasi_uniform_suite},
      {6, "MinCq correctness", 10000, mincq_suite},
      {7, "end-to-end learning sanity", 120000, learning_sanity},
      {8, "sign test on the stopping-criterion table", 1, sign_tests},
      {9, "bound ordering and monotonicity", 1000, bound_ordering},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    check.expect(ms < cr.budget_ms, "runtime " + fmt(ms) + " ms over budget " + fmt(cr.budget_ms) + " ms");
    const bool ok = check.ok();
    failed += ok ? 0 : 1;
    std::printf("%s %d %s [%.3f ms] %s\n", ok ? "PASS" : "FAIL", cr.id, cr.name.c_str(), ms,
                check.detail().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
