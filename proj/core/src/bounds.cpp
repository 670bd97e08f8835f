#include "pacvote/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pacvote/margins.hpp"
#include "pacvote/numerics.hpp"

namespace pacvote {

namespace {

void validate(const BoundInputs& in) {
  if (in.m == 0) throw InputError("bound needs m >= 1");
  if (!(in.delta > 0.0 && in.delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  if (!(in.kl_qp >= 0.0)) throw InputError("KL(Q||P) must be non-negative");
}

BoundReport make_report(BoundId id, const BoundInputs& in) {
  BoundReport r;
  r.id = id;
  r.inputs = {{"m", static_cast<double>(in.m)},
              {"delta", in.delta},
              {"kl", in.kl_qp},
              {"gibbs_risk", in.stats.gibbs_risk},
              {"disagreement", in.stats.disagreement},
              {"joint_error", in.stats.joint_error},
              {"mu1", in.stats.mu1},
              {"mu2", in.stats.mu2}};
  if (in.m_unlabeled) r.inputs.emplace_back("m_unlabeled", static_cast<double>(*in.m_unlabeled));
  if (in.unlabeled_disagreement) {
    r.inputs.emplace_back("unlabeled_disagreement", *in.unlabeled_disagreement);
  }
  return r;
}

double log_xi_over(std::size_t m, double delta) { return std::log(xi(m) / delta); }

KlInversion invert(double q, double tau, KlDirection dir, double cap, BoundReport& report) {
  const KlInversion inv = kl_invert({q, tau, dir, cap});
  report.diagnostics.iterations += inv.iterations;
  report.diagnostics.residual = std::max(report.diagnostics.residual, inv.residual);
  return inv;
}

// Shared by bound1 and bound1_semi.
BoundReport c_bound_from_rates(BoundId id, const BoundInputs& in, std::size_t m_d, double d_emp) {
  validate(in);
  BoundReport report = make_report(id, in);
  const double half = in.delta / 2.0;
  const double tau_r = (in.kl_qp + log_xi_over(in.m, half)) / static_cast<double>(in.m);
  const double tau_d = (2.0 * in.kl_qp + log_xi_over(m_d, half)) / static_cast<double>(m_d);
  const double r_up = invert(std::clamp(in.stats.gibbs_risk, 0.0, 1.0), tau_r, KlDirection::sup, 0.5,
                             report).value;
  const double d_lo = invert(std::clamp(d_emp, 0.0, 1.0), tau_d, KlDirection::inf, 1.0, report).value;
  report.diagnostics.values = {{"tau_r", tau_r}, {"tau_d", tau_d}, {"r_upper", r_up}, {"d_lower", d_lo}};
  if (r_up >= 0.5 || 1.0 - 2.0 * d_lo <= 0.0) {
    report.value = 1.0;
    return report;
  }
  const double num = 1.0 - 2.0 * r_up;
  report.value = std::clamp(1.0 - num * num / (1.0 - 2.0 * d_lo), 0.0, 1.0);
  return report;
}

// Shared by bound3 and bound3_prime: mu-form value plus an (r, d)-form
// cross-check recorded in the diagnostics.
void aligned_value(BoundReport& report, const MarginSummary& s, double eps_r, double eps_d) {
  const double mu1_lo = std::max(0.0, s.mu1 - 2.0 * eps_r);
  const double mu2_up = std::min(1.0, s.mu2 + 2.0 * eps_d);
  const double r_up = std::min(0.5, s.gibbs_risk + eps_r);
  const double d_lo = std::max(0.0, s.disagreement - eps_d);
  const double mu_form = mu1_lo <= 0.0 ? 1.0 : 1.0 - mu1_lo * mu1_lo / mu2_up;
  const double num = 1.0 - 2.0 * r_up;
  const double rd_form = r_up >= 0.5 ? 1.0 : 1.0 - num * num / (1.0 - 2.0 * d_lo);
  report.value = std::clamp(mu_form, 0.0, 1.0);
  report.diagnostics.residual = std::abs(mu_form - rd_form);
  report.diagnostics.values = {{"eps_r", eps_r},   {"eps_d", eps_d},   {"mu1_lower", mu1_lo},
                               {"mu2_upper", mu2_up}, {"r_upper", r_up}, {"d_lower", d_lo},
                               {"rd_form", rd_form}};
}

}  // namespace

MarginSummary summary_from_rates(double gibbs_risk, double disagreement) {
  if (!(gibbs_risk >= 0.0 && gibbs_risk <= 1.0)) throw InputError("Gibbs risk must lie in [0, 1]");
  if (!(disagreement >= 0.0 && disagreement <= 0.5)) {
    throw InputError("disagreement must lie in [0, 1/2]");
  }
  MarginSummary s;
  s.gibbs_risk = gibbs_risk;
  s.disagreement = disagreement;
  s.mu1 = 1.0 - 2.0 * gibbs_risk;
  s.mu2 = 1.0 - 2.0 * disagreement;
  s.variance = std::max(0.0, s.mu2 - s.mu1 * s.mu1);
  s.joint_error = gibbs_risk - 0.5 * disagreement;
  s.joint_success = 1.0 - s.joint_error - disagreement;
  if (s.joint_error < -1e-12) throw InputError("inconsistent rates: joint error r - d/2 is negative");
  s.joint_error = std::max(0.0, s.joint_error);
  if (s.mu1 > 0.0 && s.mu2 >= s.mu1 * s.mu1) s.c_bound = c_bound(s.mu1, s.mu2);
  return s;
}

double kl_qp_vs_uniform(const Posterior& q) {
  const double voters = static_cast<double>(q.size());
  double kl = 0.0;
  for (double w : q.weights()) {
    if (w > 0.0) kl += w * std::log(w * voters);
  }
  return std::max(0.0, kl);
}

BoundReport bound0(const BoundInputs& in) {
  validate(in);
  BoundReport report = make_report(BoundId::B0, in);
  const double tau = (in.kl_qp + log_xi_over(in.m, in.delta)) / static_cast<double>(in.m);
  const double r_up =
      invert(std::clamp(in.stats.gibbs_risk, 0.0, 1.0), tau, KlDirection::sup, 0.5, report).value;
  report.diagnostics.values = {{"tau", tau}, {"r_upper", r_up}};
  report.value = std::clamp(2.0 * r_up, 0.0, 1.0);
  return report;
}

BoundReport bound1(const BoundInputs& in) {
  return c_bound_from_rates(BoundId::B1, in, in.m, in.stats.disagreement);
}

BoundReport bound1_semi(const BoundInputs& in) {
  if (!in.m_unlabeled || *in.m_unlabeled == 0) {
    throw InputError("semi-supervised bound needs the unlabeled sample size m_u >= 1");
  }
  return c_bound_from_rates(BoundId::B1s, in, *in.m_unlabeled,
                            in.unlabeled_disagreement.value_or(in.stats.disagreement));
}

BoundReport bound2(const BoundInputs& in) {
  validate(in);
  BoundReport report = make_report(BoundId::B2, in);
  const double md = static_cast<double>(in.m);
  const double tau = (2.0 * in.kl_qp + std::log((xi(in.m) + md) / in.delta)) / md;
  const FcMaximum best = maximize_fc_over_region(in.stats.disagreement, in.stats.joint_error, tau);
  report.value = best.value;
  report.diagnostics.iterations = best.iterations;
  report.diagnostics.argmax = {best.d, best.e};
  report.diagnostics.values = {{"tau", tau}, {"empty_region", best.empty_region ? 1.0 : 0.0}};
  return report;
}

BoundReport bound2_prime(const BoundInputs& in) {
  validate(in);
  BoundReport report = make_report(BoundId::B2p, in);
  const double md = static_cast<double>(in.m);
  const double half = in.delta / 2.0;
  const double tau = (2.0 * in.kl_qp + std::log((xi(in.m) + md) / half)) / md;
  const double tau_e = (2.0 * in.kl_qp + log_xi_over(in.m, half)) / md;
  const double e_cap =
      invert(std::clamp(in.stats.joint_error, 0.0, 1.0), tau_e, KlDirection::sup, 1.0, report).value;
  const FcMaximum best =
      maximize_fc_over_region(in.stats.disagreement, in.stats.joint_error, tau, e_cap);
  report.value = best.value;
  report.diagnostics.iterations += best.iterations;
  report.diagnostics.argmax = {best.d, best.e};
  report.diagnostics.values = {{"tau", tau},
                               {"tau_e", tau_e},
                               {"e_cap", e_cap},
                               {"empty_region", best.empty_region ? 1.0 : 0.0}};
  return report;
}

BoundReport bound3(const BoundInputs& in) {
  validate(in);
  if (!in.aligned) {
    throw InputError("bound B3 requires a posterior aligned on the prior (quasi-uniform)");
  }
  BoundReport report = make_report(BoundId::B3, in);
  const double eps =
      std::sqrt(log_xi_over(in.m, in.delta / 2.0) / (2.0 * static_cast<double>(in.m)));
  aligned_value(report, in.stats, eps, eps);
  return report;
}

BoundReport bound3_prime(const BoundInputs& in) {
  validate(in);
  if (!in.aligned) {
    throw InputError("bound B3p requires a posterior aligned on the prior (quasi-uniform)");
  }
  if (in.compression_size != 1) {
    throw InputError("bound B3p requires sample-compressed voters of size 1 (kernel voters)");
  }
  if (in.m <= 2) throw InputError("bound B3p requires m >= 3");
  BoundReport report = make_report(BoundId::B3p, in);
  report.inputs.emplace_back("lambda", 1.0);
  const double half = in.delta / 2.0;
  const double m1 = static_cast<double>(in.m - 1);
  const double m2 = static_cast<double>(in.m - 2);
  const double eps_r = std::sqrt((4.0 + log_xi_over(in.m - 1, half)) / (2.0 * m1));
  const double eps_d = std::sqrt((8.0 + log_xi_over(in.m - 2, half)) / (2.0 * m2));
  aligned_value(report, in.stats, eps_r, eps_d);
  return report;
}

BoundReport compute_bound(BoundId id, const BoundInputs& in) {
  switch (id) {
    case BoundId::B0: return bound0(in);
    case BoundId::B1: return bound1(in);
    case BoundId::B1s: return bound1_semi(in);
    case BoundId::B2: return bound2(in);
    case BoundId::B2p: return bound2_prime(in);
    case BoundId::B3: return bound3(in);
    case BoundId::B3p: return bound3_prime(in);
  }
  throw InputError("unknown bound id");
}

}  // namespace pacvote
