#include "pacvote/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "pacvote/margins.hpp"
#include "pacvote/mincq.hpp"

namespace pacvote {

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo) || count == 0) throw InputError("invalid log grid");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

void ExperimentConfig::validate() const {
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("train fraction must lie in (0, 1)");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InputError("validation fraction must lie in (0, 1)");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
}

std::vector<std::size_t> shuffled_indices(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = count; i > 1; --i) {
    // Unbiased draw in [0, i) by rejection; std distributions are not
    // portable across standard libraries.
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(draw % bound)]);
  }
  return idx;
}

Split train_test_split(const Dataset& data, const ExperimentConfig& config) {
  config.validate();
  if (data.size() < 2) throw InputError("need at least two examples to split");
  const auto idx = shuffled_indices(data.size(), config.seed);
  auto n_train = static_cast<std::size_t>(config.train_fraction * static_cast<double>(data.size()));
  if (config.train_cap) n_train = std::min(n_train, *config.train_cap);
  n_train = std::clamp<std::size_t>(n_train, 1, data.size() - 1);
  const std::span<const std::size_t> all(idx);
  return {data.subset(all.first(n_train)), data.subset(all.subspan(n_train))};
}

double risk(const Predictor& predictor, const Dataset& data) {
  if (data.empty()) throw InputError("cannot compute a risk on an empty dataset");
  std::size_t errors = 0;
  for (const auto& ex : data) {
    if (predictor(ex.features) != ex.label) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(data.size());
}

namespace {

// Runs task(i) for i in [0, count) on the available hardware threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<std::vector<std::size_t>> fold_indices(std::size_t count, std::size_t folds,
                                                   std::uint64_t seed) {
  if (count < folds) throw InputError("fewer examples than folds");
  const auto idx = shuffled_indices(count, seed);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < count; ++i) out[i % folds].push_back(idx[i]);
  return out;
}

std::pair<Dataset, Dataset> fold_split(const Dataset& data,
                                       const std::vector<std::vector<std::size_t>>& folds,
                                       std::size_t k) {
  std::vector<std::size_t> train;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f != k) train.insert(train.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(train.begin(), train.end());
  std::vector<std::size_t> held = folds[k];
  std::sort(held.begin(), held.end());
  return {data.subset(train), data.subset(held)};
}

}  // namespace

CrossValidationResult cross_validate(const Learner& learner, const std::vector<HyperParameters>& grid,
                                     const Dataset& data, const ExperimentConfig& config) {
  config.validate();
  if (grid.empty()) throw InputError("hyperparameter grid is empty");
  const auto folds = fold_indices(data.size(), config.folds, config.seed);

  const std::size_t tasks = grid.size() * config.folds;
  std::vector<std::optional<double>> fold_risk(tasks);
  std::vector<std::string> fold_error(tasks);
  parallel_for(tasks, [&](std::size_t t) {
    const std::size_t cell = t / config.folds;
    const std::size_t k = t % config.folds;
    try {
      const auto [train, held] = fold_split(data, folds, k);
      fold_risk[t] = risk(learner(train, grid[cell]), held);
    } catch (const std::exception& e) {
      fold_error[t] = e.what();
    }
  });

  CrossValidationResult result;
  result.mean_risks.resize(grid.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    double sum = 0.0;
    std::string failure;
    for (std::size_t k = 0; k < config.folds; ++k) {
      const std::size_t t = cell * config.folds + k;
      if (!fold_risk[t]) {
        failure = fold_error[t];
        break;
      }
      sum += *fold_risk[t];
    }
    if (!failure.empty()) {
      result.failures.push_back("cell " + std::to_string(cell) + ": " + failure);
      continue;
    }
    const double mean = sum / static_cast<double>(config.folds);
    result.mean_risks[cell] = mean;
    if (mean < best) {
      best = mean;
      result.best_index = cell;
    }
  }
  if (!std::isfinite(best)) {
    std::string msg = "every grid cell failed:";
    for (const auto& f : result.failures) msg += "\n  " + f;
    throw InputError(msg);
  }
  result.best = grid[result.best_index];
  result.model = learner(data, result.best);
  return result;
}

std::string to_string(VoterFamily family) {
  switch (family) {
    case VoterFamily::stumps: return "stumps";
    case VoterFamily::rbf: return "rbf";
    case VoterFamily::linear: return "linear";
    case VoterFamily::explicit_outputs: return "explicit";
  }
  return "?";
}

VoterFamily parse_voter_family(const std::string& text) {
  if (text == "stumps") return VoterFamily::stumps;
  if (text == "rbf") return VoterFamily::rbf;
  if (text == "linear") return VoterFamily::linear;
  if (text == "explicit") return VoterFamily::explicit_outputs;
  throw InputError("unknown voter family '" + text + "' (expected stumps, rbf, linear or explicit)");
}

SelfComplementedVoterSet build_voters(const VoterSpec& spec, const Dataset& train) {
  switch (spec.family) {
    case VoterFamily::stumps: return build_stumps(train, spec.per_attribute);
    case VoterFamily::rbf: return build_kernel_voters(train, {KernelSpec::Type::rbf, spec.gamma});
    case VoterFamily::linear: return build_kernel_voters(train, {KernelSpec::Type::linear, 0.0});
    case VoterFamily::explicit_outputs:
      return SelfComplementedVoterSet::from_explicit(train.dimension());
  }
  throw InputError("unknown voter family");
}

Learner mincq_learner(VoterSpec spec) {
  return [spec](const Dataset& train, const HyperParameters& params) -> Predictor {
    const auto mu_it = params.find("mu");
    if (mu_it == params.end()) throw InputError("MinCq learner needs a 'mu' hyperparameter");
    const auto gamma_it = params.find("gamma");
    const double gamma = gamma_it != params.end() ? gamma_it->second : spec.gamma;

    std::optional<AttributeStats> stats;
    Dataset fitted = train;
    if (spec.tanh_normalize) {
      stats = attribute_stats(train);
      fitted = tanh_normalize(train, *stats);
    }
    VoterSpec cell = spec;
    cell.gamma = gamma;
    auto voters = std::make_shared<const SelfComplementedVoterSet>(build_voters(cell, fitted));
    auto model = std::make_shared<const MinCqModel>(
        mincq_train(voters, fitted, mu_it->second).model);
    return [model, stats](std::span<const double> x) {
      if (!stats) return model->predict(x);
      return model->predict(tanh_normalize(x, *stats));
    };
  };
}

std::vector<HyperParameters> mincq_grid(const std::vector<double>& mu_grid,
                                        const std::vector<double>& gamma_grid) {
  std::vector<HyperParameters> grid;
  if (gamma_grid.empty()) {
    for (double mu : mu_grid) grid.push_back({{"mu", mu}});
    return grid;
  }
  for (double gamma : gamma_grid) {
    for (double mu : mu_grid) grid.push_back({{"gamma", gamma}, {"mu", mu}});
  }
  return grid;
}

std::string to_string(StoppingCriterion c) {
  switch (c) {
    case StoppingCriterion::cbound_train: return "cbound_train";
    case StoppingCriterion::bayes_train: return "bayes_train";
    case StoppingCriterion::validation: return "validation";
    case StoppingCriterion::cv: return "cv";
  }
  return "?";
}

RoundSelection stopping_criterion_select(std::span<const std::optional<double>> history) {
  RoundSelection sel;
  bool found = false;
  for (std::size_t t = 0; t < history.size(); ++t) {
    if (!history[t]) {
      ++sel.excluded;
      continue;
    }
    if (!found || *history[t] < sel.value) {
      sel.value = *history[t];
      sel.round = t + 1;
      found = true;
    }
  }
  if (!found) throw InputError("no round has a defined criterion value");
  return sel;
}

namespace {

// Pr[Bin(n, 1/2) >= k].
double binomial_upper_tail(std::size_t n, std::size_t k) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  const double nd = static_cast<double>(n);
  const double log_half_n = nd * std::log(0.5);
  double sum = 0.0;
  for (std::size_t j = k; j <= n; ++j) {
    const double jd = static_cast<double>(j);
    sum += std::exp(std::lgamma(nd + 1.0) - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) +
                    log_half_n);
  }
  return std::min(1.0, sum);
}

}  // namespace

SignTestResult sign_test(std::span<const std::pair<double, double>> pairs,
                         SignTestAlternative alternative) {
  if (pairs.empty()) throw InputError("sign test needs at least one pair");
  SignTestResult r;
  for (const auto& [a, b] : pairs) {
    if (std::abs(a - b) <= 1e-12) {
      ++r.ties;
    } else if (a < b) {
      ++r.wins;
    } else {
      ++r.losses;
    }
  }
  const std::size_t n = r.wins + r.losses;
  if (n == 0) {
    r.p_value = 1.0;
    r.warning = "every pair is tied; p-value set to 1";
    return r;
  }
  const double upper = binomial_upper_tail(n, r.wins);
  if (alternative == SignTestAlternative::one_sided) {
    r.p_value = upper;
  } else {
    const double lower = 1.0 - binomial_upper_tail(n, r.wins + 1);  // Pr[X <= w]
    r.p_value = std::min(1.0, 2.0 * std::min(upper, lower));
  }
  return r;
}

std::vector<CurveRecord> bound_curve(const VoteMatrix& train, const VoteMatrix& test,
                                     std::size_t rounds, double delta) {
  if (train.half_size() != test.half_size()) {
    throw InputError("train and test vote matrices use different voter sets");
  }
  const BoostingResult boost = adaboost_train(train, rounds);
  std::vector<CurveRecord> out;
  out.reserve(boost.rounds.size());
  for (std::size_t t = 0; t < boost.rounds.size(); ++t) {
    const Posterior& q = boost.rounds[t].posterior;
    CurveRecord rec;
    rec.round = t + 1;
    rec.kl = kl_qp_vs_uniform(q);
    rec.train = summarize(margins(train, q));
    const MarginSummary test_summary = summarize(margins(test, q));
    rec.test_bayes_risk = test_summary.bayes_risk;
    rec.test_disagreement = test_summary.disagreement;

    std::vector<BoundId> ids = {BoundId::B0, BoundId::B1, BoundId::B1s, BoundId::B2, BoundId::B2p};
    const bool aligned = q.is_quasi_uniform();
    if (aligned) ids.push_back(BoundId::B3);
    for (BoundId id : ids) rec.bounds[id] = std::nullopt;
    if (rec.train.mu1 > 0.0) {
      BoundInputs in;
      in.m = train.examples();
      in.delta = delta;
      in.kl_qp = rec.kl;
      in.stats = rec.train;
      in.m_unlabeled = test.examples();
      in.unlabeled_disagreement = test_summary.disagreement;
      in.aligned = aligned;
      for (BoundId id : ids) rec.bounds[id] = compute_bound(id, in).value;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

void write_curve_csv(std::ostream& out, const std::vector<CurveRecord>& records) {
  const std::vector<BoundId> ids = {BoundId::B0, BoundId::B1, BoundId::B1s,
                                    BoundId::B2, BoundId::B2p, BoundId::B3};
  out << "round,kl,gibbs_risk_S,disagreement_S,joint_error_S,mu1_S,mu2_S,cbound_S,bayes_risk_S,"
         "bayes_risk_T,disagreement_T";
  for (BoundId id : ids) out << ',' << to_string(id);
  out << '\n';
  for (const auto& r : records) {
    out << r.round << ',' << num(r.kl) << ',' << num(r.train.gibbs_risk) << ','
        << num(r.train.disagreement) << ',' << num(r.train.joint_error) << ',' << num(r.train.mu1)
        << ',' << num(r.train.mu2) << ',' << opt_num(r.train.c_bound) << ','
        << num(r.train.bayes_risk) << ',' << num(r.test_bayes_risk) << ','
        << num(r.test_disagreement);
    for (BoundId id : ids) {
      const auto it = r.bounds.find(id);
      out << ',' << (it == r.bounds.end() ? std::string() : opt_num(it->second));
    }
    out << '\n';
  }
}

namespace {

// Test-set Bayes risk of every round's posterior.
std::vector<double> round_risks(const BoostingResult& boost, const VoteMatrix& votes) {
  std::vector<double> out;
  out.reserve(boost.rounds.size());
  for (const auto& r : boost.rounds) out.push_back(summarize(margins(votes, r.posterior)).bayes_risk);
  return out;
}

// Risk at a 1-based round; runs that stopped early keep their last vote.
double at_round(const std::vector<double>& risks, std::size_t round) {
  return risks[std::min(round, risks.size()) - 1];
}

}  // namespace

StoppingReport stopping_criterion_experiment(const Split& split, std::size_t rounds,
                                             std::size_t per_attribute,
                                             const ExperimentConfig& config) {
  config.validate();
  const Dataset& s = split.train;
  const auto voters = build_stumps(s, per_attribute);
  const VoteMatrix f_train = vote_matrix(voters, s);
  const VoteMatrix f_test = vote_matrix(voters, split.test);

  const BoostingResult full = adaboost_train(f_train, rounds);
  const std::vector<double> test_risks = round_risks(full, f_test);
  std::vector<std::optional<double>> cbound_hist;
  std::vector<std::optional<double>> bayes_hist;
  for (const auto& r : full.rounds) {
    const MarginSummary sum = summarize(margins(f_train, r.posterior));
    cbound_hist.push_back(sum.c_bound);
    bayes_hist.push_back(sum.bayes_risk);
  }

  StoppingReport report;
  report.rounds_run = full.rounds.size();
  report.final_round_test_risk = test_risks.back();
  for (auto [crit, hist] : {std::pair{StoppingCriterion::cbound_train, &cbound_hist},
                            std::pair{StoppingCriterion::bayes_train, &bayes_hist}}) {
    const RoundSelection sel = stopping_criterion_select(*hist);
    report.outcomes.push_back({crit, sel.round, at_round(test_risks, sel.round)});
  }

  // Validation: hold out a fraction of S, boost on the rest, keep that vote.
  {
    const auto idx = shuffled_indices(s.size(), config.seed ^ 0x9e3779b97f4a7c15ULL);
    auto n_val = static_cast<std::size_t>(std::ceil(config.validation_fraction *
                                                    static_cast<double>(s.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, s.size() - 1);
    const std::span<const std::size_t> all(idx);
    const Dataset val = s.subset(all.first(n_val));
    const Dataset fit = s.subset(all.subspan(n_val));
    const BoostingResult part = adaboost_train(vote_matrix(voters, fit), rounds);
    const std::vector<double> val_risks = round_risks(part, vote_matrix(voters, val));
    std::vector<std::optional<double>> hist(val_risks.begin(), val_risks.end());
    const RoundSelection sel = stopping_criterion_select(hist);
    report.outcomes.push_back(
        {StoppingCriterion::validation, sel.round, at_round(round_risks(part, f_test), sel.round)});
  }

  // Cross-validation over the number of rounds, then the full-S vote.
  {
    const auto folds = fold_indices(s.size(), config.folds, config.seed);
    std::vector<double> sum(rounds, 0.0);
    for (std::size_t k = 0; k < config.folds; ++k) {
      const auto [fit, held] = fold_split(s, folds, k);
      const BoostingResult part = adaboost_train(vote_matrix(voters, fit), rounds);
      const std::vector<double> risks = round_risks(part, vote_matrix(voters, held));
      for (std::size_t t = 0; t < rounds; ++t) sum[t] += at_round(risks, t + 1);
    }
    std::vector<std::optional<double>> hist;
    for (double v : sum) hist.emplace_back(v / static_cast<double>(config.folds));
    const RoundSelection sel = stopping_criterion_select(hist);
    report.outcomes.push_back({StoppingCriterion::cv, sel.round, at_round(test_risks, sel.round)});
  }
  return report;
}

}  // namespace pacvote
