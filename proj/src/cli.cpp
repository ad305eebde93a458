#include "ltrlab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "ltrlab/error.hpp"
#include "ltrlab/event_log.hpp"
#include "ltrlab/experiments.hpp"
#include "ltrlab/feature_builder.hpp"
#include "ltrlab/gbdt.hpp"
#include "ltrlab/manifest.hpp"
#include "ltrlab/scenario_config.hpp"
#include "ltrlab/simulator.hpp"
#include "ltrlab/svmlight.hpp"
#include "ltrlab/tree_analysis.hpp"

namespace ltrlab::cli {

namespace {

// Missing or unreadable input files: a usage problem, exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kInterleaveTestStream = 0x434c49;  // "CLI"
constexpr std::uint64_t kAbTestStream = 0x434c4941;        // "CLIA"

struct Globals {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
};

std::string read_text(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + what + " '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct LoadedConfig {
  sim::ScenarioConfig scenario = sim::ScenarioConfig::standard();
  exp::ExperimentConfig experiment;
};

// Scenario and experiment keys share one file. The --seed flag always wins
// over a `seed` key.
LoadedConfig load_config(const std::string& path, std::uint64_t seed) {
  LoadedConfig c;
  if (!path.empty()) {
    if (!std::filesystem::is_regular_file(path)) {
      throw UsageError("cannot open config '" + path + "'");
    }
    const auto kv = KeyValueConfig::load(path);
    c.scenario = sim::scenario_from_config(kv);
    c.experiment = exp::experiment_from_config(kv);
    kv.require_all_used();
  }
  c.scenario.seed = seed;
  c.scenario.validate();
  return c;
}

std::string effective_config(const LoadedConfig& c) {
  std::ostringstream out;
  sim::write_scenario_config(out, c.scenario);
  out << '\n';
  exp::write_experiment_config(out, c.experiment);
  return out.str();
}

ltr::GbdtModel load_model(const std::string& path) {
  try {
    return ltr::deserialize_model(read_text(path, "model"));
  } catch (const ParseError& e) {
    throw ParseError("model '" + path + "': " + e.what());
  }
}

ltr::RankingDataset load_dataset(const std::string& data_path, std::string sidecar_path) {
  if (sidecar_path.empty()) sidecar_path = data_path + ".features.csv";
  std::istringstream sidecar(read_text(sidecar_path, "feature sidecar"));
  auto names = ltr::read_feature_sidecar(sidecar);
  std::istringstream data(read_text(data_path, "dataset"));
  try {
    return ltr::read_svmlight(data, std::move(names));
  } catch (const ParseError& e) {
    throw ParseError("dataset '" + data_path + "': " + e.what());
  }
}

void commit(const Globals& g, OutputSet& outputs, RunManifest& manifest, std::ostream& out) {
  manifest.seed = g.seed;
  outputs.commit(g.out_dir, manifest);
  out << "wrote " << manifest.outputs.size() << " files and manifest.json to " << g.out_dir
      << '\n';
}

template <typename T>
std::string text_of(const T& writer_target) {
  std::ostringstream s;
  writer_target(s);
  return s.str();
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  int last_day = -1;
  int snapshot_day = -1;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out) {
  const auto cfg = load_config(a.config, g.seed);
  const int horizon = cfg.scenario.horizon_days;
  const int last_day = a.last_day < 0 ? horizon - 1 : a.last_day;
  const int snapshot_day = a.snapshot_day < 0 ? last_day : a.snapshot_day;
  if (last_day >= horizon || snapshot_day >= horizon) {
    throw ConfigError("--last-day and --snapshot-day must be below horizon_days (" +
                      std::to_string(horizon) + ")");
  }
  const auto world = sim::generate_world(cfg.scenario);
  const auto events = exp::simulate_log(world, last_day, g.seed, g.threads);

  OutputSet outputs;
  outputs.add("events.jsonl", text_of([&](std::ostream& s) { events::write_event_log(s, events); }));
  outputs.add("labels.csv",
              text_of([&](std::ostream& s) { events::write_vertical_labels(s, world.labels()); }));
  outputs.add("world_snapshot.csv",
              text_of([&](std::ostream& s) { world.write_snapshot_csv(s, snapshot_day); }));
  outputs.add("config.toml", effective_config(cfg));

  RunManifest manifest;
  manifest.command = "simulate";
  if (!a.config.empty()) manifest.inputs["config"] = a.config;
  manifest.parameters["last_day"] = std::to_string(last_day);
  manifest.parameters["snapshot_day"] = std::to_string(snapshot_day);
  out << "simulated " << world.queries().size() << " queries over days 0.." << last_day << ", "
      << events.size() << " events\n";
  commit(g, outputs, manifest, out);
}

// ---- features ---------------------------------------------------------------

struct FeaturesArgs {
  std::string log;
  std::string labels;
  std::string variant;
  std::string ref_date;
  int label_days = 7;
  std::string out_name = "dataset.svmlight";
  std::string config;
  bool strict = false;
};

void cmd_features(const Globals& g, const FeaturesArgs& a, std::ostream& out, std::ostream& err) {
  const auto variant_name = exp::parse_variant(a.variant);
  if (!variant_name) {
    throw ConfigError("unknown variant '" + a.variant +
                      "' (expected Baseline, ModelA, ModelB or ModelC)");
  }
  const Day ref = [&] {
    try {
      return parse_day(a.ref_date);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("--ref-date: ") + e.what());
    }
  }();
  const auto cfg = load_config(a.config, g.seed);

  std::istringstream log_in(read_text(a.log, "event log"));
  const auto parsed = events::parse_event_log(log_in, a.strict);
  for (const auto& issue : parsed.report.issues) {
    err << "warning: " << a.log << ":" << issue.line << ": " << issue.reason << '\n';
  }
  std::istringstream labels_in(read_text(a.labels, "vertical labels"));
  const auto labels = events::read_vertical_labels(labels_in);

  // Every pair with history on or before the reference date.
  std::set<features::QueryProduct> pairs;
  for (const auto& e : parsed.events) {
    if (e.day <= ref) pairs.emplace(e.query_id, e.product_id);
  }
  const std::vector<features::QueryProduct> universe(pairs.begin(), pairs.end());
  const auto dataset = exp::assemble_variant_dataset(
      parsed.events, labels, exp::ModelVariant::of(*variant_name), ref, universe,
      exp::LabelWindow::after(ref, a.label_days), cfg.experiment.priors);

  OutputSet outputs;
  outputs.add(a.out_name, text_of([&](std::ostream& s) { ltr::write_svmlight(s, dataset); }));
  outputs.add(a.out_name + ".features.csv", text_of([&](std::ostream& s) {
                ltr::write_feature_sidecar(s, dataset.feature_names);
              }));
  RunManifest manifest;
  manifest.command = "features";
  manifest.inputs["log"] = a.log;
  manifest.inputs["labels"] = a.labels;
  if (!a.config.empty()) manifest.inputs["config"] = a.config;
  manifest.parameters["variant"] = a.variant;
  manifest.parameters["ref_date"] = format_day(ref);
  manifest.parameters["label_days"] = std::to_string(a.label_days);
  out << a.variant << ": " << dataset.groups.size() << " query groups, " << dataset.num_docs()
      << " documents, " << dataset.feature_names.size() << " features\n";
  commit(g, outputs, manifest, out);
}

// ---- train / eval -----------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string features;
  std::string config;
  int trees = 0;
  int max_depth = 0;
  int min_leaf = 0;
  double learning_rate = 0.0;
  double sigma = 0.0;
  int k = 0;
  CLI::Option* trees_opt = nullptr;
  CLI::Option* depth_opt = nullptr;
  CLI::Option* leaf_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* k_opt = nullptr;
};

void cmd_train(const Globals& g, const TrainArgs& a, std::ostream& out) {
  auto params = load_config(a.config, g.seed).experiment.train;
  if (a.trees_opt->count()) params.num_trees = a.trees;
  if (a.depth_opt->count()) params.max_depth = a.max_depth;
  if (a.leaf_opt->count()) params.min_samples_leaf = a.min_leaf;
  if (a.lr_opt->count()) params.learning_rate = a.learning_rate;
  if (a.sigma_opt->count()) params.sigma = a.sigma;
  if (a.k_opt->count()) params.ndcg_k = a.k;
  params.seed = g.seed;
  try {
    params.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  const auto dataset = load_dataset(a.data, a.features);
  ltr::TrainingLog log;
  const auto model = ltr::train(dataset, params, &log);

  OutputSet outputs;
  outputs.add("model.json", ltr::serialize_model(model));
  outputs.add("training_log.csv", text_of([&](std::ostream& s) { log.write_csv(s); }));
  RunManifest manifest;
  manifest.command = "train";
  manifest.inputs["data"] = a.data;
  if (!a.config.empty()) manifest.inputs["config"] = a.config;
  manifest.parameters["num_trees"] = std::to_string(params.num_trees);
  manifest.parameters["max_depth"] = std::to_string(params.max_depth);
  manifest.parameters["min_samples_leaf"] = std::to_string(params.min_samples_leaf);
  manifest.parameters["learning_rate"] = ltr::format_double(params.learning_rate);
  manifest.parameters["sigma"] = ltr::format_double(params.sigma);
  manifest.parameters["ndcg_k"] = std::to_string(params.ndcg_k);
  out << "trained " << model.trees.size() << " trees on " << dataset.num_docs()
      << " documents; train NDCG@" << params.ndcg_k << " = "
      << (log.train_ndcg.empty() ? 0.0 : log.train_ndcg.back()) << '\n';
  commit(g, outputs, manifest, out);
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string features;
  int k = 10;
};

void cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out) {
  if (a.k < 1) throw ConfigError("--k must be >= 1");
  const auto model = load_model(a.model);
  const auto dataset = load_dataset(a.data, a.features);
  if (dataset.feature_names != model.feature_names) {
    throw ContractError("dataset columns do not match the model's feature_names; rebuild the "
                        "dataset with the model's variant");
  }
  const double ndcg = ltr::evaluate_ndcg(model, dataset, a.k);

  OutputSet outputs;
  const std::string metric = "ndcg_at_" + std::to_string(a.k);
  outputs.add("eval.csv", "metric,value\n" + metric + "," + ltr::format_double(ndcg) + "\n");
  RunManifest manifest;
  manifest.command = "eval";
  manifest.inputs["model"] = a.model;
  manifest.inputs["data"] = a.data;
  manifest.parameters["k"] = std::to_string(a.k);
  out << metric << " = " << ndcg << '\n';
  commit(g, outputs, manifest, out);
}

// ---- interleave / abtest ----------------------------------------------------

struct OnlineArgs {
  std::string config;
  std::string control;
  std::string variant;
  std::string credit;
  bool bootstrap = false;
};

struct OnlineSetup {
  LoadedConfig cfg;
  sim::World world;
  exp::QueryRankings control;
  exp::QueryRankings variant;
};

// The test world is regenerated from (config, seed), the same world
// `simulate` writes for that pair.
OnlineSetup prepare_online(const Globals& g, const OnlineArgs& a) {
  OnlineSetup s;
  s.cfg = load_config(a.config, g.seed);
  if (!a.credit.empty()) {
    if (a.credit == "team") {
      s.cfg.experiment.test.credit = exp::CreditRule::kTeam;
    } else if (a.credit == "per-arm") {
      s.cfg.experiment.test.credit = exp::CreditRule::kPerArm;
    } else {
      throw ConfigError("--credit must be 'team' or 'per-arm'");
    }
  }
  if (a.bootstrap) s.cfg.experiment.test.bootstrap = true;
  s.cfg.experiment.validate(s.cfg.scenario);
  const auto control_model = load_model(a.control);
  const auto variant_model = load_model(a.variant);
  s.world = sim::generate_world(s.cfg.scenario);
  const auto events =
      exp::simulate_log(s.world, s.cfg.experiment.last_log_day(), g.seed, g.threads);
  const int serve = s.cfg.experiment.serve_day();
  s.control = exp::rank_with_model(control_model, s.world, events, serve, s.cfg.experiment.priors);
  s.variant = exp::rank_with_model(variant_model, s.world, events, serve, s.cfg.experiment.priors);
  return s;
}

RunManifest online_manifest(const std::string& command, const OnlineArgs& a,
                            const LoadedConfig& cfg) {
  RunManifest manifest;
  manifest.command = command;
  if (!a.config.empty()) manifest.inputs["config"] = a.config;
  manifest.inputs["control"] = a.control;
  manifest.inputs["variant"] = a.variant;
  const auto period = cfg.experiment.test_period();
  manifest.parameters["test_first_day"] = std::to_string(period.first_day);
  manifest.parameters["test_days"] = std::to_string(period.num_days);
  manifest.parameters["sessions_per_day"] = std::to_string(period.sessions_per_day);
  manifest.parameters["alpha"] = ltr::format_double(cfg.experiment.test.alpha);
  return manifest;
}

void cmd_interleave(const Globals& g, const OnlineArgs& a, std::ostream& out) {
  const auto s = prepare_online(g, a);
  const auto report =
      exp::run_interleaving_test(s.world, s.control, s.variant, s.cfg.experiment.test_period(),
                                 derive_seed(g.seed, kInterleaveTestStream), s.cfg.experiment.test);
  const auto text =
      text_of([&](std::ostream& o) { report.write_text(o, "Interleaving: control vs variant"); });
  OutputSet outputs;
  outputs.add("interleaving.csv", text_of([&](std::ostream& o) { report.write_csv(o); }));
  outputs.add("interleaving.txt", text);
  auto manifest = online_manifest("interleave", a, s.cfg);
  manifest.parameters["credit"] = std::string(exp::to_string(s.cfg.experiment.test.credit));
  manifest.parameters["bootstrap"] = s.cfg.experiment.test.bootstrap ? "true" : "false";
  out << text;
  commit(g, outputs, manifest, out);
}

void cmd_abtest(const Globals& g, const OnlineArgs& a, std::ostream& out) {
  const auto s = prepare_online(g, a);
  const auto report =
      exp::run_ab_test(s.world, s.control, s.variant, s.cfg.experiment.test_period(),
                       derive_seed(g.seed, kAbTestStream), s.cfg.experiment.test.alpha);
  const auto text = text_of([&](std::ostream& o) { report.write_text(o); });
  OutputSet outputs;
  outputs.add("ab.csv", text_of([&](std::ostream& o) { report.write_csv(o); }));
  outputs.add("ab.txt", text);
  auto manifest = online_manifest("abtest", a, s.cfg);
  out << text;
  commit(g, outputs, manifest, out);
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string model;
  std::vector<std::string> parents;
  bool all_children = false;
};

void cmd_analyze(const Globals& g, const AnalyzeArgs& a, std::ostream& out) {
  const auto model = load_model(a.model);
  std::set<std::string> parents(a.parents.begin(), a.parents.end());
  if (parents.empty()) {
    for (const auto& name : model.feature_names) {
      if (features::parse_vertical_feature(name)) parents.insert(name);
    }
    if (parents.empty()) {
      throw ConfigError("model has no vertical_* columns; name parent features with --parents");
    }
  }
  for (const auto& p : parents) {
    if (std::find(model.feature_names.begin(), model.feature_names.end(), p) ==
        model.feature_names.end()) {
      throw ConfigError("--parents: '" + p + "' is not a feature of the model");
    }
  }
  std::optional<std::set<std::string>> children;
  if (!a.all_children) {
    children.emplace();
    for (const auto& name : model.feature_names) {
      if (features::parse_feature_key(name)) children->insert(name);
    }
  }
  const auto report = trees::child_feature_distribution(model, parents, children);
  const auto freq = trees::feature_split_frequency(model);

  OutputSet outputs;
  outputs.add("tree_adjacency.csv", text_of([&](std::ostream& o) { report.write_csv(o); }));
  std::ostringstream f;
  f << "feature,count\n";
  for (const auto& [name, count] : freq) f << name << ',' << count << '\n';
  outputs.add("split_frequency.csv", f.str());
  RunManifest manifest;
  manifest.command = "analyze";
  manifest.inputs["model"] = a.model;
  manifest.parameters["children"] = a.all_children ? "all" : "behavioral";
  std::string joined;
  for (const auto& p : parents) joined += (joined.empty() ? "" : ",") + p;
  manifest.parameters["parents"] = joined;
  for (const auto& [parent, entry] : report.parents) {
    out << parent << ": " << entry.parent_nodes << " split nodes, " << entry.children.size()
        << " distinct child features\n";
  }
  commit(g, outputs, manifest, out);
}

// ---- repro ------------------------------------------------------------------

struct ReproArgs {
  std::string config;
};

void cmd_repro(const Globals& g, const ReproArgs& a, std::ostream& out) {
  const auto cfg = load_config(a.config, g.seed);
  cfg.experiment.validate(cfg.scenario);
  const auto summary = exp::repro_paper_scenario(cfg.scenario, cfg.experiment, g.seed, g.threads);

  OutputSet outputs;
  const auto text = text_of([&](std::ostream& o) { summary.write_text(o); });
  outputs.add("summary.txt", text);
  outputs.add("directional.csv",
              text_of([&](std::ostream& o) { summary.write_directional_csv(o); }));
  outputs.add("interleaving_ModelA.csv",
              text_of([&](std::ostream& o) { summary.a_vs_baseline.write_csv(o); }));
  outputs.add("interleaving_ModelB.csv",
              text_of([&](std::ostream& o) { summary.b_vs_baseline.write_csv(o); }));
  outputs.add("interleaving_ModelC.csv",
              text_of([&](std::ostream& o) { summary.c_vs_baseline.write_csv(o); }));
  outputs.add("ab_ModelC.csv", text_of([&](std::ostream& o) { summary.c_ab.write_csv(o); }));
  outputs.add("tree_adjacency_ModelC.csv",
              text_of([&](std::ostream& o) { summary.c_tree.write_csv(o); }));
  for (const auto& m : summary.models) {
    const std::string name(exp::to_string(m.variant.name));
    outputs.add("models/" + name + ".json", ltr::serialize_model(m.model));
    outputs.add("models/" + name + "_training_log.csv",
                text_of([&](std::ostream& o) { m.log.write_csv(o); }));
  }
  outputs.add("config.toml", effective_config(cfg));

  RunManifest manifest;
  manifest.command = "repro";
  if (!a.config.empty()) manifest.inputs["config"] = a.config;
  out << text;
  commit(g, outputs, manifest, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ltrlab: multi-window behavioral features for learning to rank"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a world and its event log");
  simulate->add_option("--config", sim_args.config, "Scenario config file")->required();
  simulate->add_option("--last-day", sim_args.last_day, "Last logged day index (default: horizon end)");
  simulate->add_option("--snapshot-day", sim_args.snapshot_day,
                       "Day of the true-affinity snapshot (default: last day)");

  FeaturesArgs feat;
  auto* features_cmd = app.add_subcommand("features", "Build an SVMLight dataset for a variant");
  features_cmd->add_option("--log", feat.log, "Event log (JSONL)")->required();
  features_cmd->add_option("--labels", feat.labels, "Vertical labels CSV")->required();
  features_cmd->add_option("--variant", feat.variant, "Baseline, ModelA, ModelB or ModelC")
      ->required();
  features_cmd->add_option("--ref-date", feat.ref_date, "Feature reference date YYYY-MM-DD")
      ->required();
  features_cmd->add_option("--label-days", feat.label_days, "Label window length after the reference date")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  features_cmd->add_option("--out", feat.out_name, "Dataset file name inside --out-dir")
      ->capture_default_str();
  features_cmd->add_option("--config", feat.config, "Config file with [priors]");
  features_cmd->add_flag("--strict", feat.strict, "Fail on any invalid log line");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a LambdaMART model");
  train_cmd->add_option("--data", tr.data, "SVMLight dataset")->required();
  train_cmd->add_option("--features", tr.features, "Feature sidecar (default: <data>.features.csv)");
  train_cmd->add_option("--config", tr.config, "Config file with [train]");
  tr.trees_opt = train_cmd->add_option("--trees", tr.trees, "Boosting rounds");
  tr.depth_opt = train_cmd->add_option("--max-depth", tr.max_depth, "Maximum tree depth");
  tr.leaf_opt = train_cmd->add_option("--min-leaf", tr.min_leaf, "Minimum rows per leaf");
  tr.lr_opt = train_cmd->add_option("--learning-rate", tr.learning_rate, "Shrinkage");
  tr.sigma_opt = train_cmd->add_option("--sigma", tr.sigma, "Pairwise logistic scale");
  tr.k_opt = train_cmd->add_option("--k", tr.k, "NDCG truncation");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "NDCG@k of a model on a dataset");
  eval_cmd->add_option("--model", ev.model, "Model JSON")->required();
  eval_cmd->add_option("--data", ev.data, "SVMLight dataset")->required();
  eval_cmd->add_option("--features", ev.features, "Feature sidecar (default: <data>.features.csv)");
  eval_cmd->add_option("--k", ev.k, "NDCG truncation")->capture_default_str();

  OnlineArgs il;
  auto* interleave_cmd = app.add_subcommand("interleave", "Team-draft interleaving test");
  OnlineArgs ab;
  auto* abtest_cmd = app.add_subcommand("abtest", "A/B test");
  for (auto [cmd, args] : {std::pair{interleave_cmd, &il}, std::pair{abtest_cmd, &ab}}) {
    cmd->add_option("--config", args->config, "Scenario and experiment config");
    cmd->add_option("--control", args->control, "Control model JSON")->required();
    cmd->add_option("--variant", args->variant, "Variant model JSON")->required();
  }
  interleave_cmd->add_option("--credit", il.credit, "team or per-arm");
  interleave_cmd->add_flag("--bootstrap", il.bootstrap, "Bootstrap significance instead of z-test");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Child features beneath split nodes");
  analyze_cmd->add_option("--model", an.model, "Model JSON")->required();
  analyze_cmd->add_option("--parents", an.parents, "Parent features (default: vertical_*)")
      ->delimiter(',');
  analyze_cmd->add_flag("--all-children", an.all_children,
                        "Count every child feature, not only behavioral ones");

  ReproArgs rp;
  auto* repro_cmd = app.add_subcommand("repro", "Full pipeline on the standard scenario");
  repro_cmd->add_option("--config", rp.config, "Scenario and experiment config (default: built-in)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) cmd_simulate(g, sim_args, out);
    if (features_cmd->parsed()) cmd_features(g, feat, out, err);
    if (train_cmd->parsed()) cmd_train(g, tr, out);
    if (eval_cmd->parsed()) cmd_eval(g, ev, out);
    if (interleave_cmd->parsed()) cmd_interleave(g, il, out);
    if (abtest_cmd->parsed()) cmd_abtest(g, ab, out);
    if (analyze_cmd->parsed()) cmd_analyze(g, an, out);
    if (repro_cmd->parsed()) cmd_repro(g, rp, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace ltrlab::cli
