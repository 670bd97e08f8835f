#include "pacvote/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

namespace pacvote {

DataFormat parse_data_format(const std::string& text) {
  if (text == "csv") return DataFormat::csv;
  if (text == "sparse" || text == "libsvm") return DataFormat::sparse;
  throw InputError("unknown data format '" + text + "' (expected csv or sparse)");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw InputError("line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    fail(line, "'" + std::string(field) + "' is not a number");
  }
  return v;
}

// Tracks which label convention the file uses so 0 and -1 never mix.
class LabelReader {
 public:
  int operator()(std::string_view field, std::size_t line) {
    const std::string text(trim(field));
    double v = 0.0;
    try {
      v = parse_number(field, line);
    } catch (const InputError&) {
      fail(line, "label '" + text + "' is not a number");
    }
    if (v == 1.0) return 1;
    if (v == -1.0 || v == 0.0) {
      const bool zero = v == 0.0;
      if ((zero && seen_minus_one_) || (!zero && seen_zero_)) {
        fail(line, "labels mix the {0, 1} and {-1, +1} conventions");
      }
      (zero ? seen_zero_ : seen_minus_one_) = true;
      return -1;
    }
    fail(line, "label '" + text + "' is not in {-1, +1} or {0, 1}");
  }

 private:
  bool seen_zero_ = false;
  bool seen_minus_one_ = false;
};

std::vector<Example> parse_csv(std::istream& in) {
  std::vector<Example> out;
  LabelReader label;
  std::string raw;
  std::size_t line = 0;
  std::size_t width = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view row = trim(raw);
    if (row.empty() || row.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = row.find(',', start);
      fields.push_back(row.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 2) fail(line, "expected at least one feature and a label");
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      fail(line, "expected " + std::to_string(width) + " fields, got " +
                     std::to_string(fields.size()));
    }
    Example ex;
    ex.features.reserve(fields.size() - 1);
    for (std::size_t k = 0; k + 1 < fields.size(); ++k) ex.features.push_back(parse_number(fields[k], line));
    ex.label = label(fields.back(), line);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> parse_sparse(std::istream& in) {
  std::vector<std::pair<int, std::map<std::size_t, double>>> rows;
  LabelReader label;
  std::string raw;
  std::size_t line = 0;
  std::size_t dim = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view row = trim(raw);
    if (const auto hash = row.find('#'); hash != std::string_view::npos) row = trim(row.substr(0, hash));
    if (row.empty()) continue;
    std::istringstream tokens{std::string(row)};
    std::string tok;
    tokens >> tok;
    const int y = label(tok, line);
    std::map<std::size_t, double> entries;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) fail(line, "entry '" + tok + "' is not idx:val");
      const std::string_view idx_text = std::string_view(tok).substr(0, colon);
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
      if (ec != std::errc() || ptr != idx_text.data() + idx_text.size() || idx == 0) {
        fail(line, "index '" + std::string(idx_text) + "' is not a positive integer");
      }
      const double v = parse_number(std::string_view(tok).substr(colon + 1), line);
      if (!entries.emplace(idx, v).second) fail(line, "index " + std::to_string(idx) + " repeated");
      dim = std::max(dim, idx);
    }
    rows.emplace_back(y, std::move(entries));
  }
  std::vector<Example> out;
  out.reserve(rows.size());
  for (auto& [y, entries] : rows) {
    Example ex{std::vector<double>(dim, 0.0), y};
    for (const auto& [idx, v] : entries) ex.features[idx - 1] = v;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

Dataset parse_dataset(std::istream& in, DataFormat format, std::string name) {
  auto examples = format == DataFormat::csv ? parse_csv(in) : parse_sparse(in);
  if (examples.empty()) throw InputError("dataset '" + name + "' has no examples");
  return Dataset(std::move(examples), std::move(name));
}

Dataset load_dataset(const std::string& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return parse_dataset(in, format, path);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Posterior VoteModel::posterior() const {
  if (learner == "adaboost") return Posterior(q);
  const std::size_t n = q.size();
  const double upper = 1.0 / static_cast<double>(n);
  std::vector<double> w(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = q[i];
    w[i + n] = upper - q[i];
  }
  return Posterior(std::move(w));
}

VoteMatrix VoteModel::votes(const Dataset& data) const {
  return vote_matrix(*voters, normalization ? tanh_normalize(data, *normalization) : data);
}

double VoteModel::score(std::span<const double> x) const {
  std::vector<double> z;
  if (normalization) {
    z = tanh_normalize(x, *normalization);
    x = z;
  }
  if (x.size() != voters->dimension()) {
    throw InputError("input has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(voters->dimension()));
  }
  std::vector<double> out(vote_weights.size());
  voters->evaluate_half(x, out);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += vote_weights[i] * out[i];
  return s;
}

int VoteModel::predict(std::span<const double> x) const {
  const double s = score(x);
  return s > 0.0 ? 1 : (s < 0.0 ? -1 : 0);
}

VoteModel make_vote_model(const MinCqModel& model, std::optional<AttributeStats> normalization) {
  VoteModel v;
  v.learner = "mincq";
  v.voters = model.voters_ptr();
  v.normalization = std::move(normalization);
  v.q = model.reduced_weights();
  const double upper = 1.0 / static_cast<double>(v.q.size());
  for (double qi : v.q) v.vote_weights.push_back(2.0 * qi - upper);
  v.mu = model.mu();
  v.objective = model.objective();
  return v;
}

VoteModel make_vote_model(std::shared_ptr<const SelfComplementedVoterSet> voters,
                          const Posterior& posterior, std::size_t rounds,
                          std::optional<AttributeStats> normalization) {
  if (!voters || posterior.size() != voters->size()) {
    throw InputError("posterior does not match the voter set");
  }
  VoteModel v;
  v.learner = "adaboost";
  v.voters = std::move(voters);
  v.normalization = std::move(normalization);
  v.q = posterior.weights();
  const std::size_t n = posterior.half_size();
  for (std::size_t i = 0; i < n; ++i) v.vote_weights.push_back(posterior[i] - posterior[i + n]);
  v.rounds = rounds;
  return v;
}

Json to_json(const SelfComplementedVoterSet& voters) {
  Json j;
  j["kind"] = to_string(voters.kind());
  j["dimension"] = voters.dimension();
  j["half_size"] = voters.half_size();
  switch (voters.kind()) {
    case VoterKind::stumps: {
      Json list = Json::array();
      for (const auto& s : voters.stumps()) {
        list.push_back({{"attribute", s.attribute}, {"threshold", s.threshold}, {"polarity", s.polarity}});
      }
      j["stumps"] = std::move(list);
      break;
    }
    case VoterKind::kernel:
      j["kernel"] = {{"type", to_string(voters.kernel().type)}, {"gamma", voters.kernel().gamma}};
      j["anchors"] = voters.anchors();
      break;
    case VoterKind::explicit_outputs:
      break;
  }
  return j;
}

std::shared_ptr<const SelfComplementedVoterSet> voters_from_json(const Json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const auto dim = j.at("dimension").get<std::size_t>();
    if (kind == "stumps") {
      std::vector<StumpDescriptor> stumps;
      for (const auto& s : j.at("stumps")) {
        stumps.push_back({s.at("attribute").get<std::size_t>(), s.at("threshold").get<double>(),
                          s.at("polarity").get<int>()});
      }
      return std::make_shared<const SelfComplementedVoterSet>(
          SelfComplementedVoterSet::from_stumps(std::move(stumps), dim));
    }
    if (kind == "kernel") {
      KernelSpec spec{parse_kernel_type(j.at("kernel").at("type").get<std::string>()),
                      j.at("kernel").at("gamma").get<double>()};
      return std::make_shared<const SelfComplementedVoterSet>(SelfComplementedVoterSet::from_kernel(
          j.at("anchors").get<std::vector<std::vector<double>>>(), spec));
    }
    if (kind == "explicit") {
      return std::make_shared<const SelfComplementedVoterSet>(
          SelfComplementedVoterSet::from_explicit(j.at("half_size").get<std::size_t>()));
    }
    throw InputError("unknown voter kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed voter set: ") + e.what());
  }
}

Json to_json(const VoteModel& model) {
  Json j;
  j["learner"] = model.learner;
  j["voters"] = to_json(*model.voters);
  if (model.normalization) {
    j["normalization"] = {{"type", "tanh"},
                          {"mean", model.normalization->mean},
                          {"stddev", model.normalization->stddev}};
  }
  j["q"] = model.q;
  j["vote_weights"] = model.vote_weights;
  if (model.mu) j["mu"] = *model.mu;
  if (model.objective) j["objective"] = *model.objective;
  if (model.learner == "adaboost") j["rounds"] = model.rounds;
  return j;
}

VoteModel vote_model_from_json(const Json& j) {
  try {
    VoteModel v;
    v.learner = j.at("learner").get<std::string>();
    if (v.learner != "mincq" && v.learner != "adaboost") {
      throw InputError("unknown learner '" + v.learner + "'");
    }
    v.voters = voters_from_json(j.at("voters"));
    if (j.contains("normalization")) {
      const auto& n = j.at("normalization");
      v.normalization = AttributeStats{n.at("mean").get<std::vector<double>>(),
                                       n.at("stddev").get<std::vector<double>>()};
    }
    v.q = j.at("q").get<std::vector<double>>();
    v.vote_weights = j.at("vote_weights").get<std::vector<double>>();
    if (v.vote_weights.size() != v.voters->half_size()) {
      throw InputError("model has " + std::to_string(v.vote_weights.size()) + " weights for " +
                       std::to_string(v.voters->half_size()) + " voters");
    }
    if (j.contains("mu")) v.mu = j.at("mu").get<double>();
    if (j.contains("objective")) v.objective = j.at("objective").get<double>();
    if (j.contains("rounds")) v.rounds = j.at("rounds").get<std::size_t>();
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model: ") + e.what());
  }
}

VoteModel load_vote_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    const Json j = Json::parse(in);
    return vote_model_from_json(j.contains("model") ? j.at("model") : j);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view row = raw;
    if (const auto hash = row.find('#'); hash != std::string_view::npos) row = row.substr(0, hash);
    row = trim(row);
    if (row.empty()) continue;
    const auto eq = row.find('=');
    if (eq == std::string_view::npos) fail(line, "expected key = value");
    std::string_view key = trim(row.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.remove_prefix(1);
    if (key.empty()) fail(line, "empty key");
    out.emplace_back(std::string(key), std::string(trim(row.substr(eq + 1))));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  try {
    return parse_config(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Json to_json(const MarginSummary& s) {
  Json j;
  j["examples"] = s.examples;
  j["mu1"] = s.mu1;
  j["mu2"] = s.mu2;
  j["variance"] = s.variance;
  j["gibbs_risk"] = s.gibbs_risk;
  j["disagreement"] = s.disagreement;
  j["joint_error"] = s.joint_error;
  j["joint_success"] = s.joint_success;
  j["bayes_risk"] = s.bayes_risk;
  j["c_bound"] = s.c_bound ? Json(*s.c_bound) : Json(nullptr);
  return j;
}

Json to_json(const BoundReport& r) {
  Json j;
  j["bound"] = to_string(r.id);
  Json inputs = Json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = v;
  j["inputs"] = std::move(inputs);
  j["value"] = r.value;
  Json diag;
  diag["iterations"] = r.diagnostics.iterations;
  diag["residual"] = r.diagnostics.residual;
  if (!r.diagnostics.argmax.empty()) diag["argmax"] = r.diagnostics.argmax;
  Json values = Json::object();
  for (const auto& [k, v] : r.diagnostics.values) values[k] = v;
  diag["values"] = std::move(values);
  j["diagnostics"] = std::move(diag);
  return j;
}

}  // namespace pacvote
