#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pacvote/adaboost.hpp"
#include "pacvote/bounds.hpp"
#include "pacvote/evaluation.hpp"
#include "pacvote/io.hpp"
#include "pacvote/margins.hpp"
#include "pacvote/mincq.hpp"

namespace {

using namespace pacvote;

struct Common {
  std::uint64_t seed = 42;
  std::string out;
  std::string config;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Seed of the single random generator");
  app->add_option("--out", c.out, "Output path (stdout when empty)");
  app->add_option("--config", c.config, "Flat key = value file; the command line wins");
}

// Output files are replaced whole; nothing else writes to them during a run.
void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

void emit(const Json& doc, const std::string& path) { write_text(doc.dump(2) + "\n", path); }

// Every option of `app` with its effective value, for the config echo.
Json config_echo(const CLI::App& app) {
  Json echo = Json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt == app.get_help_ptr()) continue;
    const std::string name = opt->get_name();
    if (name.empty() || name == "--config") continue;
    const std::string key = name.substr(name.find_first_not_of('-'));
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) {
        echo[key] = res.front();
      } else {
        echo[key] = res;
      }
    } else {
      echo[key] = opt->get_default_str();
    }
  }
  return echo;
}

// Values from --config fill the options the command line left unset.
void apply_config(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  for (const auto& [key, value] : load_config(path)) {
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw InputError(path + ": unknown key '" + key + "' for command '" + app->get_name() + "'");
    }
    if (opt->count() > 0) continue;
    if (opt->get_items_expected_max() > 1) {
      std::stringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) opt->add_result(item);
    } else {
      opt->add_result(value);
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw InputError(path + ": " + key + ": " + e.what());
    }
  }
}

Json document(const std::string& command, const Common& c, const CLI::App& app) {
  Json doc;
  doc["command"] = command;
  doc["seed"] = c.seed;
  doc["generator"] = "mt19937_64";
  doc["config"] = config_echo(app);
  return doc;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

std::string dataset_label(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// ---------------------------------------------------------------- bound

struct BoundOptions {
  Common common;
  std::string id;
  std::optional<double> rs;
  std::optional<double> ds;
  std::optional<double> es;
  double kl = 0.0;
  std::optional<std::size_t> m;
  double delta = 0.05;
  std::optional<std::size_t> m_unlabeled;
  std::optional<double> du;
  bool aligned = false;
  std::size_t compression = 0;
  std::string model;
  std::string data;
  std::string unlabeled;
  std::string format = "csv";
};

void setup_bound(CLI::App& root, BoundOptions& o) {
  auto* c = root.add_subcommand("bound", "Compute one risk bound from statistics or a model");
  c->add_option("--id", o.id, "B0, B1, B1s, B2, B2p, B3 or B3p");
  c->add_option("--rs", o.rs, "Empirical Gibbs risk");
  c->add_option("--ds", o.ds, "Empirical disagreement");
  c->add_option("--es", o.es, "Empirical joint error");
  c->add_option("--kl", o.kl, "KL(Q||P)");
  c->add_option("--m", o.m, "Number of labeled examples");
  c->add_option("--delta", o.delta, "Confidence parameter in (0, 1]");
  c->add_option("--m-unlabeled", o.m_unlabeled, "Unlabeled sample size (B1s)");
  c->add_option("--du", o.du, "Disagreement on the unlabeled sample (B1s)");
  c->add_flag("--aligned", o.aligned, "Posterior is aligned on the prior (B3, B3p)");
  c->add_option("--compression-size", o.compression, "Sample-compression size of the voters");
  c->add_option("--model", o.model, "Model JSON; statistics are then taken on --data");
  c->add_option("--data", o.data, "Labeled data for --model");
  c->add_option("--unlabeled", o.unlabeled, "Unlabeled data for B1s with --model");
  c->add_option("--format", o.format, "csv or sparse");
  add_common(c, o.common);
}

int run_bound(const BoundOptions& o, const CLI::App& app) {
  require(!o.id.empty(), "bound: --id is required");
  const BoundId id = parse_bound_id(o.id);
  BoundInputs in;
  in.delta = o.delta;
  if (!o.model.empty()) {
    require(!o.data.empty(), "bound: --model needs --data");
    const VoteModel model = load_vote_model(o.model);
    const DataFormat fmt = parse_data_format(o.format);
    const Dataset data = load_dataset(o.data, fmt);
    const Posterior q = model.posterior();
    in.m = data.size();
    in.kl_qp = kl_qp_vs_uniform(q);
    in.stats = summarize(margins(model.votes(data), q));
    in.aligned = q.is_quasi_uniform(1e-10);
    in.compression_size = model.voters->compression_size();
    if (!o.unlabeled.empty()) {
      const Dataset unl = load_dataset(o.unlabeled, fmt);
      in.m_unlabeled = unl.size();
      in.unlabeled_disagreement = summarize(margins(model.votes(unl), q)).disagreement;
    }
  } else {
    require(o.m.has_value(), "bound: --m is required without --model");
    in.m = *o.m;
    in.kl_qp = o.kl;
    double r = 0.0;
    double d = 0.0;
    if (o.rs && o.ds) {
      r = *o.rs;
      d = *o.ds;
      require(!o.es || std::abs(*o.es + d / 2.0 - r) <= 1e-12,
              "bound: --rs, --ds and --es violate r = e + d/2");
    } else if (o.es && o.ds) {
      d = *o.ds;
      r = *o.es + d / 2.0;
    } else if (o.rs && o.es) {
      r = *o.rs;
      d = 2.0 * (r - *o.es);
    } else {
      require(o.rs.has_value(), "bound: give --rs, or two of --rs, --ds, --es");
      r = *o.rs;
    }
    in.stats = summary_from_rates(r, d);
    in.aligned = o.aligned;
    in.compression_size = o.compression;
    in.m_unlabeled = o.m_unlabeled;
    in.unlabeled_disagreement = o.du;
  }
  Json doc = document("bound", o.common, app);
  doc["report"] = to_json(compute_bound(id, in));
  emit(doc, o.common.out);
  return 0;
}

// ---------------------------------------------------------------- train-mincq

struct MinCqOptions {
  Common common;
  std::string data;
  std::string format = "csv";
  std::string voters = "stumps";
  std::size_t per_attribute = 10;
  double gamma = 1.0;
  bool normalize = false;
  std::optional<double> mu;
  double mu_lo = 1e-4;
  std::optional<double> mu_hi;
  std::size_t mu_count = 15;
  double gamma_lo = 1e-4;
  double gamma_hi = 10.0;
  std::size_t gamma_count = 15;
  std::size_t folds = 5;
};

void setup_mincq(CLI::App& root, MinCqOptions& o) {
  auto* c = root.add_subcommand("train-mincq", "Train MinCq; cross-validates when --mu is absent");
  c->add_option("--data", o.data, "Training data");
  c->add_option("--format", o.format, "csv or sparse");
  c->add_option("--voters", o.voters, "stumps, rbf, linear or explicit");
  c->add_option("--per-attribute", o.per_attribute, "Stumps per attribute");
  c->add_option("--gamma", o.gamma, "RBF width when --mu is given");
  c->add_flag("--normalize", o.normalize, "tanh((x - mean) / std) with training statistics");
  c->add_option("--mu", o.mu, "Margin; skips cross-validation");
  c->add_option("--mu-lo", o.mu_lo, "Smallest grid margin");
  c->add_option("--mu-hi", o.mu_hi, "Largest grid margin (1 for stumps, 1e-2 for kernels)");
  c->add_option("--mu-count", o.mu_count, "Log-spaced margins in the grid");
  c->add_option("--gamma-lo", o.gamma_lo, "Smallest grid RBF width");
  c->add_option("--gamma-hi", o.gamma_hi, "Largest grid RBF width");
  c->add_option("--gamma-count", o.gamma_count, "Log-spaced RBF widths in the grid");
  c->add_option("--folds", o.folds, "Cross-validation folds");
  add_common(c, o.common);
}

int run_mincq(const MinCqOptions& o, const CLI::App& app) {
  require(!o.data.empty(), "train-mincq: --data is required");
  const Dataset data = load_dataset(o.data, parse_data_format(o.format));
  VoterSpec spec;
  spec.family = parse_voter_family(o.voters);
  spec.per_attribute = o.per_attribute;
  spec.gamma = o.gamma;
  spec.tanh_normalize = o.normalize;

  Json doc = document("train-mincq", o.common, app);
  Json training;
  double mu = 0.0;
  if (o.mu) {
    mu = *o.mu;
  } else {
    const bool kernel = spec.family == VoterFamily::rbf || spec.family == VoterFamily::linear;
    ExperimentConfig cfg;
    cfg.seed = o.common.seed;
    cfg.folds = o.folds;
    cfg.mu_grid = log_grid(o.mu_lo, o.mu_hi.value_or(kernel ? 1e-2 : 1.0), o.mu_count);
    cfg.gamma_grid = spec.family == VoterFamily::rbf
                         ? log_grid(o.gamma_lo, o.gamma_hi, o.gamma_count)
                         : std::vector<double>{};
    const auto grid = mincq_grid(cfg.mu_grid, cfg.gamma_grid);
    const CrossValidationResult cv = cross_validate(mincq_learner(spec), grid, data, cfg);
    Json cells = Json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Json cell;
      for (const auto& [k, v] : grid[i]) cell[k] = v;
      cell["cv_risk"] = cv.mean_risks[i] ? Json(*cv.mean_risks[i]) : Json(nullptr);
      cells.push_back(std::move(cell));
    }
    Json best;
    for (const auto& [k, v] : cv.best) best[k] = v;
    training["cross_validation"] = {{"folds", cfg.folds},
                                    {"best_index", cv.best_index},
                                    {"best", best},
                                    {"cells", cells},
                                    {"failures", cv.failures}};
    mu = cv.best.at("mu");
    if (const auto it = cv.best.find("gamma"); it != cv.best.end()) spec.gamma = it->second;
  }

  std::optional<AttributeStats> stats;
  Dataset fitted = data;
  if (spec.tanh_normalize) {
    stats = attribute_stats(data);
    fitted = tanh_normalize(data, *stats);
  }
  auto voters = std::make_shared<const SelfComplementedVoterSet>(build_voters(spec, fitted));
  const MinCqResult result = mincq_train(voters, fitted, mu);
  const VoteModel model = make_vote_model(result.model, stats);
  const Posterior q = model.posterior();

  training["mu"] = mu;
  training["gamma"] = spec.family == VoterFamily::rbf ? Json(spec.gamma) : Json(nullptr);
  training["kkt_residual"] = result.diagnostics.qp.kkt_residual;
  training["equality_residual"] = result.diagnostics.qp.equality_residual;
  training["iterations"] = result.diagnostics.qp.iterations;
  training["summary"] = to_json(summarize(margins(model.votes(data), q)));
  training["kl"] = kl_qp_vs_uniform(q);
  training["warnings"] = voters->warnings();
  doc["training"] = std::move(training);
  doc["model"] = to_json(model);
  emit(doc, o.common.out);
  return 0;
}

// ---------------------------------------------------------------- train-adaboost

struct AdaBoostOptions {
  Common common;
  std::string data;
  std::string format = "csv";
  std::size_t rounds = 100;
  std::size_t per_attribute = 10;
};

void setup_adaboost(CLI::App& root, AdaBoostOptions& o) {
  auto* c = root.add_subcommand("train-adaboost", "Train discrete AdaBoost on decision stumps");
  c->add_option("--data", o.data, "Training data");
  c->add_option("--format", o.format, "csv or sparse");
  c->add_option("--rounds", o.rounds, "Boosting rounds");
  c->add_option("--per-attribute", o.per_attribute, "Stumps per attribute");
  add_common(c, o.common);
}

int run_adaboost(const AdaBoostOptions& o, const CLI::App& app) {
  require(!o.data.empty(), "train-adaboost: --data is required");
  const Dataset data = load_dataset(o.data, parse_data_format(o.format));
  auto voters = std::make_shared<const SelfComplementedVoterSet>(build_stumps(data, o.per_attribute));
  const VoteMatrix votes = vote_matrix(*voters, data);
  const BoostingResult boost = adaboost_train(votes, o.rounds);
  const Posterior& q = boost.rounds.back().posterior;
  const VoteModel model = make_vote_model(voters, q, boost.rounds.size());

  Json doc = document("train-adaboost", o.common, app);
  doc["training"] = {{"rounds_run", boost.rounds.size()},
                     {"stopped_early", boost.stopped_early},
                     {"stop_reason", boost.stop_reason},
                     {"kl", kl_qp_vs_uniform(q)},
                     {"summary", to_json(summarize(margins(votes, q)))},
                     {"warnings", voters->warnings()}};
  doc["model"] = to_json(model);
  emit(doc, o.common.out);
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  Common common;
  std::string model;
  std::string data;
  std::string format = "csv";
};

void setup_evaluate(CLI::App& root, EvaluateOptions& o) {
  auto* c = root.add_subcommand("evaluate", "Risk and margin statistics of a stored model");
  c->add_option("--model", o.model, "Model JSON (a train-* output or a bare model)");
  c->add_option("--data", o.data, "Labeled data");
  c->add_option("--format", o.format, "csv or sparse");
  add_common(c, o.common);
}

int run_evaluate(const EvaluateOptions& o, const CLI::App& app) {
  require(!o.model.empty() && !o.data.empty(), "evaluate: --model and --data are required");
  const VoteModel model = load_vote_model(o.model);
  const Dataset data = load_dataset(o.data, parse_data_format(o.format));
  const Predictor predict = [&model](std::span<const double> x) { return model.predict(x); };

  Json doc = document("evaluate", o.common, app);
  doc["examples"] = data.size();
  doc["risk"] = risk(predict, data);
  doc["summary"] = to_json(summarize(margins(model.votes(data), model.posterior())));
  emit(doc, o.common.out);
  return 0;
}

// ---------------------------------------------------------------- experiments

struct SplitOptions {
  std::string format = "csv";
  double train_fraction = 0.5;
  std::optional<std::size_t> train_cap;
  std::size_t per_attribute = 10;
};

void add_split(CLI::App* c, SplitOptions& s) {
  c->add_option("--format", s.format, "csv or sparse");
  c->add_option("--train-fraction", s.train_fraction, "Fraction of each dataset used for training");
  c->add_option("--train-cap", s.train_cap, "At most this many training examples");
  c->add_option("--per-attribute", s.per_attribute, "Stumps per attribute");
}

struct StoppingOptions {
  Common common;
  SplitOptions split;
  std::vector<std::string> data;
  std::size_t rounds = 1000;
  std::size_t folds = 5;
  std::string sign_test = "one_sided";
  std::string summary;
};

void setup_stopping(CLI::App* exp, StoppingOptions& o) {
  auto* c = exp->add_subcommand("stopping-criterion",
                                "Compare stopping rounds chosen by the C-bound and by baselines");
  c->add_option("--data", o.data, "Datasets (repeat or comma-separate)")->delimiter(',');
  c->add_option("--rounds", o.rounds, "Boosting rounds");
  c->add_option("--folds", o.folds, "Cross-validation folds");
  c->add_option("--sign-test", o.sign_test, "one_sided or two_sided");
  c->add_option("--summary", o.summary, "JSON summary path (stdout when empty)");
  add_split(c, o.split);
  add_common(c, o.common);
}

int run_stopping(const StoppingOptions& o, const CLI::App& app) {
  require(!o.data.empty(), "experiment stopping-criterion: --data is required");
  require(o.sign_test == "one_sided" || o.sign_test == "two_sided",
          "--sign-test must be one_sided or two_sided");
  ExperimentConfig cfg;
  cfg.seed = o.common.seed;
  cfg.train_fraction = o.split.train_fraction;
  cfg.train_cap = o.split.train_cap;
  cfg.folds = o.folds;
  cfg.validate();

  std::ostringstream csv;
  csv << "dataset,method,round,test_risk\n";
  Json per_dataset = Json::array();
  const std::vector<std::string> methods = {"bayes_train", "validation", "cv", "final_round"};
  std::map<std::string, std::vector<std::pair<double, double>>> pairs;
  for (const auto& path : o.data) {
    const Dataset data = load_dataset(path, parse_data_format(o.split.format));
    const Split split = train_test_split(data, cfg);
    const StoppingReport rep = stopping_criterion_experiment(split, o.rounds, o.split.per_attribute, cfg);
    const std::string name = dataset_label(path);
    std::map<std::string, double> risks;
    Json entry;
    entry["dataset"] = name;
    entry["train"] = split.train.size();
    entry["test"] = split.test.size();
    entry["rounds_run"] = rep.rounds_run;
    for (const auto& out : rep.outcomes) {
      csv << name << ',' << to_string(out.criterion) << ',' << out.round << ',' << out.test_risk << '\n';
      risks[to_string(out.criterion)] = out.test_risk;
      entry[to_string(out.criterion)] = {{"round", out.round}, {"test_risk", out.test_risk}};
    }
    csv << name << ",final_round," << rep.rounds_run << ',' << rep.final_round_test_risk << '\n';
    risks["final_round"] = rep.final_round_test_risk;
    entry["final_round"] = {{"round", rep.rounds_run}, {"test_risk", rep.final_round_test_risk}};
    for (const auto& m : methods) pairs[m].emplace_back(risks.at("cbound_train"), risks.at(m));
    per_dataset.push_back(std::move(entry));
  }
  write_text(csv.str(), o.common.out);

  const auto alt = o.sign_test == "one_sided" ? SignTestAlternative::one_sided
                                              : SignTestAlternative::two_sided;
  Json tests = Json::object();
  for (const auto& m : methods) {
    const SignTestResult r = sign_test(pairs.at(m), alt);
    tests["cbound_train_vs_" + m] = {{"wins", r.wins},
                                     {"losses", r.losses},
                                     {"ties", r.ties},
                                     {"p_value", r.p_value},
                                     {"warning", r.warning}};
  }
  Json doc = document("experiment stopping-criterion", o.common, app);
  doc["datasets"] = std::move(per_dataset);
  doc["sign_tests"] = std::move(tests);
  emit(doc, o.summary);
  return 0;
}

struct CurveOptions {
  Common common;
  SplitOptions split;
  std::string data;
  std::size_t rounds = 60;
  double delta = 0.05;
  std::string summary;
};

void setup_curve(CLI::App* exp, CurveOptions& o) {
  auto* c = exp->add_subcommand("bound-curve", "Bounds on the Bayes risk for every boosting round");
  c->add_option("--data", o.data, "Dataset");
  c->add_option("--rounds", o.rounds, "Boosting rounds");
  c->add_option("--delta", o.delta, "Confidence parameter in (0, 1]");
  c->add_option("--summary", o.summary, "JSON summary path (stdout when empty)");
  add_split(c, o.split);
  add_common(c, o.common);
}

int run_curve(const CurveOptions& o, const CLI::App& app) {
  require(!o.data.empty(), "experiment bound-curve: --data is required");
  require(o.delta > 0.0 && o.delta <= 1.0, "--delta must lie in (0, 1]");
  ExperimentConfig cfg;
  cfg.seed = o.common.seed;
  cfg.train_fraction = o.split.train_fraction;
  cfg.train_cap = o.split.train_cap;
  cfg.delta = o.delta;
  const Dataset data = load_dataset(o.data, parse_data_format(o.split.format));
  const Split split = train_test_split(data, cfg);
  const auto voters = build_stumps(split.train, o.split.per_attribute);
  const auto records = bound_curve(vote_matrix(voters, split.train), vote_matrix(voters, split.test),
                                   o.rounds, o.delta);
  std::ostringstream csv;
  write_curve_csv(csv, records);
  write_text(csv.str(), o.common.out);

  Json doc = document("experiment bound-curve", o.common, app);
  doc["dataset"] = dataset_label(o.data);
  doc["train"] = split.train.size();
  doc["test"] = split.test.size();
  doc["rows"] = records.size();
  doc["final_test_risk"] = records.back().test_bayes_risk;
  emit(doc, o.summary);
  return 0;
}

const CLI::App* active_leaf(const CLI::App* app) {
  for (const CLI::App* sub : app->get_subcommands()) return active_leaf(sub);
  return app;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PAC-Bayes majority votes: risk bounds, MinCq and AdaBoost experiments"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  BoundOptions bound;
  MinCqOptions mincq;
  AdaBoostOptions boost;
  EvaluateOptions evaluate;
  StoppingOptions stopping;
  CurveOptions curve;
  setup_bound(app, bound);
  setup_mincq(app, mincq);
  setup_adaboost(app, boost);
  setup_evaluate(app, evaluate);
  auto* exp = app.add_subcommand("experiment", "Experiment harnesses");
  exp->require_subcommand(1);
  setup_stopping(exp, stopping);
  setup_curve(exp, curve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    auto* leaf = const_cast<CLI::App*>(active_leaf(&app));
    const std::string name = leaf->get_name();
    if (name == "bound") {
      apply_config(leaf, bound.common.config);
      return run_bound(bound, *leaf);
    }
    if (name == "train-mincq") {
      apply_config(leaf, mincq.common.config);
      return run_mincq(mincq, *leaf);
    }
    if (name == "train-adaboost") {
      apply_config(leaf, boost.common.config);
      return run_adaboost(boost, *leaf);
    }
    if (name == "evaluate") {
      apply_config(leaf, evaluate.common.config);
      return run_evaluate(evaluate, *leaf);
    }
    if (name == "stopping-criterion") {
      apply_config(leaf, stopping.common.config);
      return run_stopping(stopping, *leaf);
    }
    if (name == "bound-curve") {
      apply_config(leaf, curve.common.config);
      return run_curve(curve, *leaf);
    }
    throw InputError("unknown command '" + name + "'");
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}
