#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pacvote/adaboost.hpp"
#include "pacvote/bounds.hpp"
#include "pacvote/types.hpp"
#include "pacvote/voters.hpp"

namespace pacvote {

// Log-spaced grid of `count` values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

struct ExperimentConfig {
  std::uint64_t seed = 42;
  double train_fraction = 0.5;
  std::optional<std::size_t> train_cap;  // at most this many training examples
  std::size_t folds = 5;
  double delta = 0.05;
  double validation_fraction = 0.1;
  std::vector<double> mu_grid = log_grid(1e-4, 1.0, 15);
  std::vector<double> gamma_grid = log_grid(1e-4, 10.0, 15);

  void validate() const;
};

// Deterministic permutation of 0..count-1 (Fisher-Yates on mt19937_64).
std::vector<std::size_t> shuffled_indices(std::size_t count, std::uint64_t seed);

struct Split {
  Dataset train;
  Dataset test;
};

// First floor(train_fraction * m) shuffled examples (capped at train_cap)
// train, the rest test.
Split train_test_split(const Dataset& data, const ExperimentConfig& config);

using Predictor = std::function<int(std::span<const double>)>;
using HyperParameters = std::map<std::string, double>;
using Learner = std::function<Predictor(const Dataset& train, const HyperParameters& params)>;

// Fraction of examples whose prediction differs from the label (0 counts as
// an error).
double risk(const Predictor& predictor, const Dataset& data);

struct CrossValidationResult {
  std::size_t best_index = 0;
  HyperParameters best;
  std::vector<std::optional<double>> mean_risks;  // nullopt for failed cells
  std::vector<std::string> failures;
  Predictor model;  // winner retrained on the full dataset
};

// k-fold cross-validation over a grid; the smallest mean risk wins, ties go
// to the smallest grid index. Cells whose training throws are skipped; when
// every cell fails the failures are reported in an InputError.
CrossValidationResult cross_validate(const Learner& learner, const std::vector<HyperParameters>& grid,
                                     const Dataset& data, const ExperimentConfig& config);

enum class VoterFamily { stumps, rbf, linear, explicit_outputs };

std::string to_string(VoterFamily family);
VoterFamily parse_voter_family(const std::string& text);

struct VoterSpec {
  VoterFamily family = VoterFamily::stumps;
  std::size_t per_attribute = 10;
  double gamma = 1.0;  // overridden by a "gamma" hyperparameter
  bool tanh_normalize = false;
};

// Voter set of the given family on (already normalized) training data.
SelfComplementedVoterSet build_voters(const VoterSpec& spec, const Dataset& train);

// MinCq trained on the voters described by `spec`; reads "mu" (and "gamma")
// from the hyperparameters.
Learner mincq_learner(VoterSpec spec);

// Grid of (gamma, mu) or (mu) cells, gamma outermost.
std::vector<HyperParameters> mincq_grid(const std::vector<double>& mu_grid,
                                        const std::vector<double>& gamma_grid = {});

enum class StoppingCriterion { cbound_train, bayes_train, validation, cv };

std::string to_string(StoppingCriterion c);

struct RoundSelection {
  std::size_t round = 0;  // 1-based
  double value = 0.0;
  std::size_t excluded = 0;  // rounds with an undefined criterion
};

// Earliest round attaining the minimum over the defined values.
RoundSelection stopping_criterion_select(std::span<const std::optional<double>> history);

enum class SignTestAlternative {
  // Pr[Bin(w + l, 1/2) >= w]
  one_sided,
  // 2 min(Pr[X >= w], Pr[X <= w]), capped at 1
  two_sided,
};

struct SignTestResult {
  double p_value = 1.0;
  std::size_t wins = 0;  // risk_a < risk_b
  std::size_t losses = 0;
  std::size_t ties = 0;
  std::string warning;
};

// Sign test on paired risks (a, b); ties are excluded.
SignTestResult sign_test(std::span<const std::pair<double, double>> pairs,
                         SignTestAlternative alternative = SignTestAlternative::one_sided);

struct CurveRecord {
  std::size_t round = 0;
  double kl = 0.0;
  MarginSummary train;
  double test_bayes_risk = 0.0;
  double test_disagreement = 0.0;
  std::map<BoundId, std::optional<double>> bounds;
};

// Boosting on the training split; per round the empirical statistics on S, the
// Bayes risk on T and bounds B0, B1, B1s, B2, B2p (and B3 when the posterior is
// quasi-uniform). B1s uses the test split as the unlabeled sample. Rounds with
// mu1 <= 0 on S leave every bound undefined.
std::vector<CurveRecord> bound_curve(const VoteMatrix& train, const VoteMatrix& test,
                                     std::size_t rounds, double delta);

void write_curve_csv(std::ostream& out, const std::vector<CurveRecord>& records);

struct StoppingOutcome {
  StoppingCriterion criterion;
  std::size_t round = 0;
  double test_risk = 0.0;
};

struct StoppingReport {
  std::size_t rounds_run = 0;
  double final_round_test_risk = 0.0;
  std::vector<StoppingOutcome> outcomes;
};

// AdaBoost on stumps for `rounds` rounds; compares the round chosen by each
// stopping criterion through its test-set Bayes risk.
StoppingReport stopping_criterion_experiment(const Split& split, std::size_t rounds,
                                             std::size_t per_attribute,
                                             const ExperimentConfig& config);

}  // namespace pacvote
