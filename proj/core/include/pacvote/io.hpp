#pragma once

#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pacvote/mincq.hpp"
#include "pacvote/types.hpp"
#include "pacvote/voters.hpp"

namespace pacvote {

using Json = nlohmann::ordered_json;

enum class DataFormat { csv, sparse };

DataFormat parse_data_format(const std::string& text);

// csv: comma-separated features, label in the last column.
// sparse: "label idx:val ..." with 1-based indices; absent entries are 0.
// Labels are -1/+1 or 0/1 (0 maps to -1). Errors name the offending line.
Dataset parse_dataset(std::istream& in, DataFormat format, std::string name = {});
Dataset load_dataset(const std::string& path, DataFormat format);

// A trained majority vote as stored on disk. Prediction goes through
// vote_weights only, so a reloaded model predicts bit-identically.
struct VoteModel {
  std::string learner;  // "mincq" or "adaboost"
  std::shared_ptr<const SelfComplementedVoterSet> voters;
  std::optional<AttributeStats> normalization;
  std::vector<double> q;  // mincq: q_1..q_n; adaboost: the full posterior
  std::vector<double> vote_weights;  // effective weight of voter i < n
  std::optional<double> mu;
  std::optional<double> objective;
  std::size_t rounds = 0;

  // Full posterior over the 2n voters.
  Posterior posterior() const;
  // Votes of the model's voters on `data`, normalized as in training.
  VoteMatrix votes(const Dataset& data) const;
  double score(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

VoteModel make_vote_model(const MinCqModel& model, std::optional<AttributeStats> normalization = {});
VoteModel make_vote_model(std::shared_ptr<const SelfComplementedVoterSet> voters,
                          const Posterior& posterior, std::size_t rounds,
                          std::optional<AttributeStats> normalization = {});

Json to_json(const SelfComplementedVoterSet& voters);
std::shared_ptr<const SelfComplementedVoterSet> voters_from_json(const Json& j);
Json to_json(const VoteModel& model);
VoteModel vote_model_from_json(const Json& j);
// Accepts a bare model or a document with the model under "model".
VoteModel load_vote_model(const std::string& path);

// Flat "key = value" lines; '#' starts a comment. Keys may carry a leading
// "--". Errors name the offending line.
std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in);
std::vector<std::pair<std::string, std::string>> load_config(const std::string& path);

Json to_json(const MarginSummary& s);
Json to_json(const BoundReport& r);

}  // namespace pacvote
