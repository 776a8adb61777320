// Command-line front end for the paired brain-network embedding library.
//
// Subcommands: generate, cluster, train, embed, evaluate, gridsearch, ablate.
// Every subcommand prints its fully resolved configuration before doing any
// work, writes machine-readable results under --out, and keeps stdout for a
// short human-readable summary. Exit codes: 0 success, 1 runtime failure,
// 2 usage error (bad flags, bad config file, missing inputs).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scpgcn/community.hpp"
#include "scpgcn/dataio.hpp"
#include "scpgcn/eval.hpp"
#include "scpgcn/graph.hpp"
#include "scpgcn/model.hpp"
#include "scpgcn/synthdata.hpp"
#include "scpgcn/training.hpp"

namespace {

using namespace scpgcn;
namespace fs = std::filesystem;
using nlohmann::json;

// Thrown for problems the caller can fix on the command line; mapped to
// exit code 2 rather than 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string format_metric(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", value);
  return buffer;
}

std::string format_short(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", value);
  return buffer;
}

void require_input_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw UsageError(std::string(what) + " not found: " + path);
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

void print_resolved(const json& doc) {
  std::cout << "resolved config:\n" << doc.dump(2) << "\n";
}

// Tracks which CLI options were bound to which config-file keys so a JSON
// --config can fill in anything the command line left at its default.
// Precedence: built-in defaults < config file < explicit flags.
class FlagBinding {
 public:
  template <typename T>
  void track(CLI::Option* option, const std::string& key, T& target) {
    entries_.push_back(Entry{
        option, key,
        [&target, key](const json& value) {
          try {
            target = value.get<T>();
          } catch (const json::exception& error) {
            throw UsageError("config: bad value for '" + key +
                             "': " + error.what());
          }
        }});
  }

  void apply(const json& doc) {
    if (!doc.is_object()) {
      throw UsageError("config file must hold a JSON object");
    }
    for (const auto& item : doc.items()) {
      if (!has_key(item.key())) {
        throw UsageError("config: unknown key '" + item.key() + "'");
      }
    }
    for (Entry& entry : entries_) {
      if (entry.option->count() == 0 && doc.contains(entry.key)) {
        entry.assign(doc.at(entry.key));
        from_config_.insert(entry.key);
      }
    }
  }

  // True when the value came from an explicit flag or the config file
  // rather than the built-in default.
  bool provided(const std::string& key) const {
    for (const Entry& entry : entries_) {
      if (entry.key == key && entry.option->count() > 0) {
        return true;
      }
    }
    return from_config_.count(key) > 0;
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::string key;
    std::function<void(const json&)> assign;
  };

  bool has_key(const std::string& key) const {
    for (const Entry& entry : entries_) {
      if (entry.key == key) {
        return true;
      }
    }
    return false;
  }

  std::vector<Entry> entries_;
  std::set<std::string> from_config_;
};

json load_config_file(const std::string& path) {
  require_input_file(path, "config file");
  std::ifstream in(path, std::ios::binary);
  try {
    return json::parse(in);
  } catch (const json::exception& error) {
    throw UsageError("config file " + path + ": " + error.what());
  }
}

graph::ViewKind view_from_name(const std::string& name) {
  if (name == "structural") {
    return graph::ViewKind::structural;
  }
  if (name == "functional") {
    return graph::ViewKind::functional;
  }
  throw UsageError("view must be 'structural' or 'functional', got '" + name +
                   "'");
}

std::string view_name(graph::ViewKind kind) {
  return kind == graph::ViewKind::structural ? "structural" : "functional";
}

// ---------------------------------------------------------------------------
// Shared flag bundles
// ---------------------------------------------------------------------------

// Model/training hyperparameters shared by train, evaluate, gridsearch and
// ablate. Defaults mirror training::TrainConfig.
struct ModelFlags {
  double alpha = 0.1;
  double beta = 0.1;
  double margin = 0.5;
  double learning_rate = 0.01;
  int epochs = 200;
  int communities = 4;
  std::uint64_t hidden1 = 256;
  std::uint64_t hidden2 = 128;
  std::uint64_t embed_dim = 64;
  std::string activation = "relu";
  bool normalize_structural = false;
  std::uint64_t seed = 0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& flags, FlagBinding& binding) {
  binding.track(cmd->add_option("--alpha", flags.alpha,
                                "intra-community compactness weight"),
                "alpha", flags.alpha);
  binding.track(cmd->add_option("--beta", flags.beta,
                                "inter-community separation weight"),
                "beta", flags.beta);
  binding.track(cmd->add_option("--margin", flags.margin,
                                "contrastive margin for dissimilar pairs"),
                "margin", flags.margin);
  binding.track(cmd->add_option("--lr", flags.learning_rate,
                                "Adam learning rate"),
                "lr", flags.learning_rate);
  binding.track(cmd->add_option("--epochs", flags.epochs,
                                "training epochs"),
                "epochs", flags.epochs);
  binding.track(cmd->add_option("--communities", flags.communities,
                                "community count used by the community loss"),
                "communities", flags.communities);
  binding.track(cmd->add_option("--hidden1", flags.hidden1,
                                "width of the first graph convolution"),
                "hidden1", flags.hidden1);
  binding.track(cmd->add_option("--hidden2", flags.hidden2,
                                "width of the second graph convolution"),
                "hidden2", flags.hidden2);
  binding.track(cmd->add_option("--embed-dim", flags.embed_dim,
                                "per-node embedding dimension"),
                "embed_dim", flags.embed_dim);
  binding.track(cmd->add_option("--activation", flags.activation,
                                "hidden activation: relu or tanh"),
                "activation", flags.activation);
  binding.track(cmd->add_flag("--normalize-structural",
                              flags.normalize_structural,
                              "scale structural weights by the global max"),
                "normalize_structural", flags.normalize_structural);
  binding.track(cmd->add_option("--seed", flags.seed, "master RNG seed"),
                "seed", flags.seed);
}

struct ViewFlags {
  std::string structure_view = "structural";
  std::string feature_view = "functional";
};

void add_view_flags(CLI::App* cmd, ViewFlags& flags, FlagBinding& binding,
                    bool with_features) {
  binding.track(cmd->add_option("--structure-view", flags.structure_view,
                                "matrix used as graph structure: structural "
                                "or functional"),
                "structure_view", flags.structure_view);
  if (with_features) {
    binding.track(cmd->add_option("--feature-view", flags.feature_view,
                                  "matrix used as node features: structural "
                                  "or functional"),
                  "feature_view", flags.feature_view);
  }
}

// Builds a validated TrainConfig from the shared flags. When a variant name
// is given it decides the siamese/community switches and the default views;
// explicitly provided view flags still win.
training::TrainConfig build_train_config(const ModelFlags& model_flags,
                                         const ViewFlags* view_flags,
                                         const std::string* variant,
                                         const FlagBinding& binding) {
  training::TrainConfig config;
  config.alpha = model_flags.alpha;
  config.beta = model_flags.beta;
  config.margin = model_flags.margin;
  config.learning_rate = model_flags.learning_rate;
  config.epochs = model_flags.epochs;
  config.communities = model_flags.communities;
  config.hidden1 = static_cast<std::size_t>(model_flags.hidden1);
  config.hidden2 = static_cast<std::size_t>(model_flags.hidden2);
  config.embed_dim = static_cast<std::size_t>(model_flags.embed_dim);
  config.normalize_structural = model_flags.normalize_structural;
  config.seed = model_flags.seed;
  try {
    config.activation = model::activation_from_name(model_flags.activation);
  } catch (const std::invalid_argument& error) {
    throw UsageError(error.what());
  }
  if (variant != nullptr) {
    try {
      config = eval::apply_variant(config, eval::parse_variant(*variant));
    } catch (const std::invalid_argument& error) {
      throw UsageError(error.what());
    }
  }
  if (view_flags != nullptr) {
    if (variant == nullptr || binding.provided("structure_view")) {
      config.view_structure = view_from_name(view_flags->structure_view);
    }
    if (variant == nullptr || binding.provided("feature_view")) {
      config.view_features = view_from_name(view_flags->feature_view);
    }
  }
  try {
    training::validate(config);
  } catch (const std::invalid_argument& error) {
    throw UsageError(error.what());
  }
  return config;
}

json train_config_json(const training::TrainConfig& config) {
  json doc;
  doc["alpha"] = config.alpha;
  doc["beta"] = config.beta;
  doc["margin"] = config.margin;
  doc["learning_rate"] = config.learning_rate;
  doc["epochs"] = config.epochs;
  doc["communities"] = config.communities;
  doc["hidden1"] = config.hidden1;
  doc["hidden2"] = config.hidden2;
  doc["embed_dim"] = config.embed_dim;
  doc["activation"] = model::activation_name(config.activation);
  doc["use_siamese"] = config.use_siamese;
  doc["use_cp"] = config.use_cp;
  doc["view_structure"] = view_name(config.view_structure);
  doc["view_features"] = view_name(config.view_features);
  doc["normalize_structural"] = config.normalize_structural;
  doc["seed"] = config.seed;
  doc["adam_beta1"] = config.adam_beta1;
  doc["adam_beta2"] = config.adam_beta2;
  doc["adam_epsilon"] = config.adam_epsilon;
  return doc;
}

std::string summary_line(const std::string& name,
                         const eval::ExperimentReport& report) {
  return name + ": accuracy " + format_metric(report.accuracy.mean) + " +/- " +
         format_metric(report.accuracy.stddev) + ", f1 " +
         format_metric(report.f1.mean) + " +/- " +
         format_metric(report.f1.stddev);
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::uint64_t n = 90;
  int classes = 2;
  std::uint64_t per_class = 20;
  int communities = 4;
  double p_in = 0.7;
  double p_out = 0.1;
  double w_scale = 1.0;
  double signal = 0.4;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::string out;
  std::string config_path;
  FlagBinding binding;
};

void setup_generate(CLI::App& app, GenerateArgs& args) {
  CLI::App* cmd = app.add_subcommand(
      "generate", "Generate a synthetic paired-network dataset");
  FlagBinding& b = args.binding;
  b.track(cmd->add_option("--n", args.n, "nodes per network"), "n", args.n);
  b.track(cmd->add_option("--classes", args.classes,
                          "number of class labels (must be 2)"),
          "classes", args.classes);
  b.track(cmd->add_option("--per-class", args.per_class,
                          "instances per class"),
          "per_class", args.per_class);
  b.track(cmd->add_option("--communities", args.communities,
                          "planted community count"),
          "communities", args.communities);
  b.track(cmd->add_option("--p-in", args.p_in,
                          "structural edge probability inside a community"),
          "p_in", args.p_in);
  b.track(cmd->add_option("--p-out", args.p_out,
                          "structural edge probability across communities"),
          "p_out", args.p_out);
  b.track(cmd->add_option("--w-scale", args.w_scale,
                          "upper bound of structural edge weights"),
          "w_scale", args.w_scale);
  b.track(cmd->add_option("--signal", args.signal,
                          "class-dependent functional correlation shift"),
          "signal", args.signal);
  b.track(cmd->add_option("--noise", args.noise,
                          "std of functional noise"),
          "noise", args.noise);
  b.track(cmd->add_option("--seed", args.seed, "generator seed"), "seed",
          args.seed);
  cmd->add_option("--config", args.config_path,
                  "JSON file with defaults for these flags");
  cmd->add_option("--out", args.out, "output directory")->required();
}

void run_generate(GenerateArgs& args) {
  if (!args.config_path.empty()) {
    args.binding.apply(load_config_file(args.config_path));
  }
  if (args.classes != 2) {
    throw UsageError("generate: --classes must be 2 (labels are binary)");
  }
  synthdata::GeneratorConfig config;
  config.nodes = static_cast<std::size_t>(args.n);
  config.communities_true = args.communities;
  config.p_in = args.p_in;
  config.p_out = args.p_out;
  config.w_scale = args.w_scale;
  config.signal = args.signal;
  config.noise = args.noise;
  config.per_class = static_cast<std::size_t>(args.per_class);
  config.seed = args.seed;
  try {
    synthdata::validate(config);
  } catch (const std::invalid_argument& error) {
    throw UsageError(error.what());
  }

  json resolved;
  resolved["command"] = "generate";
  resolved["n"] = config.nodes;
  resolved["classes"] = args.classes;
  resolved["per_class"] = config.per_class;
  resolved["communities"] = config.communities_true;
  resolved["p_in"] = config.p_in;
  resolved["p_out"] = config.p_out;
  resolved["w_scale"] = config.w_scale;
  resolved["signal"] = config.signal;
  resolved["noise"] = config.noise;
  resolved["seed"] = config.seed;
  resolved["out"] = args.out;
  print_resolved(resolved);

  synthdata::SyntheticDataset dataset = synthdata::generate_dataset(config);
  std::string membership_text;
  for (std::size_t i = 0; i < dataset.planted_membership.size(); ++i) {
    if (i > 0) {
      membership_text += ",";
    }
    membership_text += std::to_string(dataset.planted_membership[i]);
  }
  std::map<std::string, std::string> metadata{
      {"communities", std::to_string(config.communities_true)},
      {"generator", "paired-block-model"},
      {"noise", format_double(config.noise)},
      {"p_in", format_double(config.p_in)},
      {"p_out", format_double(config.p_out)},
      {"per_class", std::to_string(config.per_class)},
      {"planted_membership", membership_text},
      {"seed", std::to_string(config.seed)},
      {"signal", format_double(config.signal)},
      {"w_scale", format_double(config.w_scale)},
  };
  const std::string manifest =
      dataio::save_dataset(dataset.instances, args.out, metadata);
  std::cout << "generated " << dataset.instances.size() << " instances with "
            << config.nodes << " nodes each\n";
  std::cout << "wrote " << manifest << "\n";
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

struct ClusterArgs {
  std::string manifest;
  int communities = 4;
  std::uint64_t seed = 0;
  ViewFlags views;
  std::string out;
  std::string config_path;
  FlagBinding binding;
};

void setup_cluster(CLI::App& app, ClusterArgs& args) {
  CLI::App* cmd = app.add_subcommand(
      "cluster", "Detect communities on each instance's structure matrix");
  cmd->add_option("--manifest", args.manifest, "dataset manifest JSON")
      ->required();
  FlagBinding& b = args.binding;
  b.track(cmd->add_option("--communities", args.communities,
                          "number of communities"),
          "communities", args.communities);
  b.track(cmd->add_option("--seed", args.seed, "k-means seed"), "seed",
          args.seed);
  add_view_flags(cmd, args.views, b, /*with_features=*/false);
  cmd->add_option("--config", args.config_path,
                  "JSON file with defaults for these flags");
  cmd->add_option("--out", args.out, "output directory")->required();
}

void run_cluster(ClusterArgs& args) {
  if (!args.config_path.empty()) {
    args.binding.apply(load_config_file(args.config_path));
  }
  require_input_file(args.manifest, "manifest");
  if (args.communities < 1) {
    throw UsageError("cluster: --communities must be at least 1");
  }
  const graph::ViewKind view = view_from_name(args.views.structure_view);

  json resolved;
  resolved["command"] = "cluster";
  resolved["manifest"] = args.manifest;
  resolved["communities"] = args.communities;
  resolved["seed"] = args.seed;
  resolved["structure_view"] = args.views.structure_view;
  resolved["out"] = args.out;
  print_resolved(resolved);

  const std::vector<graph::NetworkInstance> instances =
      dataio::load_dataset(args.manifest);
  json items = json::array();
  for (const graph::NetworkInstance& instance : instances) {
    const linalg::Matrix& raw = view == graph::ViewKind::structural
                                    ? instance.structural
                                    : instance.functional;
    const linalg::Matrix structure = graph::as_structure(raw, view);
    const community::CommunityAssignment assignment =
        community::spectral_communities(structure, args.communities,
                                        args.seed);
    json item;
    item["id"] = instance.id;
    item["membership"] = assignment.membership;
    items.push_back(item);
  }
  json doc;
  doc["communities"] = args.communities;
  doc["seed"] = args.seed;
  doc["structure_view"] = args.views.structure_view;
  doc["instances"] = items;

  fs::create_directories(args.out);
  const fs::path path = fs::path(args.out) / "memberships.json";
  write_text_file(path, doc.dump(2) + "\n");
  std::cout << "clustered " << instances.size() << " instances into "
            << args.communities << " communities\n";
  std::cout << "wrote " << path.string() << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string manifest;
  std::string variant = "SCP-GCN";
  ModelFlags model;
  ViewFlags views;
  std::string out;
  std::string config_path;
  FlagBinding binding;
};

void setup_train(CLI::App& app, TrainArgs& args) {
  CLI::App* cmd = app.add_subcommand(
      "train", "Train an embedding model on a full dataset");
  cmd->add_option("--manifest", args.manifest, "dataset manifest JSON")
      ->required();
  FlagBinding& b = args.binding;
  b.track(cmd->add_option("--variant", args.variant,
                          "model variant, e.g. SCP-GCN or GCN-fMRI"),
          "variant", args.variant);
  add_model_flags(cmd, args.model, b);
  add_view_flags(cmd, args.views, b, /*with_features=*/true);
  cmd->add_option("--config", args.config_path,
                  "JSON file with defaults for these flags");
  cmd->add_option("--out", args.out, "output directory")->required();
}

void run_train(TrainArgs& args) {
  if (!args.config_path.empty()) {
    args.binding.apply(load_config_file(args.config_path));
  }
  require_input_file(args.manifest, "manifest");
  std::string canonical_variant;
  try {
    canonical_variant = eval::parse_variant(args.variant).name;
  } catch (const std::invalid_argument& error) {
    throw UsageError(error.what());
  }
  const training::TrainConfig config =
      build_train_config(args.model, &args.views, &args.variant, args.binding);

  json resolved;
  resolved["command"] = "train";
  resolved["manifest"] = args.manifest;
  resolved["variant"] = canonical_variant;
  resolved["train_config"] = train_config_json(config);
  resolved["out"] = args.out;
  print_resolved(resolved);

  const std::vector<graph::NetworkInstance> instances =
      dataio::load_dataset(args.manifest);
  const training::TrainResult result = training::train(instances, config);

  fs::create_directories(args.out);
  const fs::path model_path = fs::path(args.out) / "model.json";
  const fs::path history_path = fs::path(args.out) / "history.csv";
  model::save_model(result.trained, model_path.string());
  training::write_history_csv(result.history, history_path.string());

  const double final_loss =
      result.history.empty() ? 0.0 : result.history.back().mean_loss;
  std::cout << "trained " << result.history.size()
            << " epochs, final mean loss " << format_short(final_loss) << "\n";
  std::cout << "wrote " << model_path.string() << "\n";
  std::cout << "wrote " << history_path.string() << "\n";
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

struct EmbedArgs {
  std::string manifest;
  std::string model_path;
  ViewFlags views;
  bool normalize_structural = false;
  std::string out;
  std::string config_path;
  FlagBinding binding;
};

void setup_embed(CLI::App& app, EmbedArgs& args) {
  CLI::App* cmd = app.add_subcommand(
      "embed", "Write whole-graph embeddings for every instance");
  cmd->add_option("--manifest", args.manifest, "dataset manifest JSON")
      ->required();
  cmd->add_option("--model", args.model_path, "trained model JSON")
      ->required();
  FlagBinding& b = args.binding;
  add_view_flags(cmd, args.views, b, /*with_features=*/true);
  b.track(cmd->add_flag("--normalize-structural", args.normalize_structural,
                        "scale structural weights by the global max"),
          "normalize_structural", args.normalize_structural);
  cmd->add_option("--config", args.config_path,
                  "JSON file with defaults for these flags");
  cmd->add_option("--out", args.out, "output directory")->required();
}

void run_embed(EmbedArgs& args) {
  if (!args.config_path.empty()) {
    args.binding.apply(load_config_file(args.config_path));
  }
  require_input_file(args.manifest, "manifest");
  require_input_file(args.model_path, "model file");

  training::TrainConfig config;
  config.view_structure = view_from_name(args.views.structure_view);
  config.view_features = view_from_name(args.views.feature_view);
  config.normalize_structural = args.normalize_structural;

  json resolved;
  resolved["command"] = "embed";
  resolved["manifest"] = args.manifest;
  resolved["model"] = args.model_path;
  resolved["structure_view"] = args.views.structure_view;
  resolved["feature_view"] = args.views.feature_view;
  resolved["normalize_structural"] = args.normalize_structural;
  resolved["out"] = args.out;
  print_resolved(resolved);

  const std::vector<graph::NetworkInstance> instances =
      dataio::load_dataset(args.manifest);
  const model::ScpGcnModel trained = model::load_model(args.model_path);

  std::string text;
  bool header_written = false;
  for (const graph::NetworkInstance& instance : instances) {
    const std::vector<double> embedding =
        eval::graph_embedding(instance, trained, config);
    if (!header_written) {
      text = "id";
      for (std::size_t k = 0; k < embedding.size(); ++k) {
        text += ",g" + std::to_string(k);
      }
      text += "\n";
      header_written = true;
    }
    text += instance.id;
    for (double value : embedding) {
      text += ",";
      text += format_double(value);
    }
    text += "\n";
  }

  fs::create_directories(args.out);
  const fs::path path = fs::path(args.out) / "embeddings.csv";
  write_text_file(path, text);
  std::cout << "embedded " << instances.size() << " instances\n";
  std::cout << "wrote " << path.string() << "\n";
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string manifest;
  std::string variant = "SCP-GCN";
  ModelFlags model;
  int repeats = 10;
  double train_fraction = 0.8;
  int jobs = 1;
  std::string out;
  std::string config_path;
  FlagBinding binding;
};

void setup_evaluate(CLI::App& app, EvaluateArgs& args) {
  CLI::App* cmd = app.add_subcommand(
      "evaluate",
      "Train/test a variant over repeated splits and report accuracy/F1");
  cmd->add_option("--manifest", args.manifest, "dataset manifest JSON")
      ->required();
  FlagBinding& b = args.binding;
  b.track(cmd->add_option("--variant", args.variant,
                          "model variant, e.g. SCP-GCN or GCN-fMRI"),
          "variant", args.variant);
  add_model_flags(cmd, args.model, b);
  b.track(cmd->add_option("--repeats", args.repeats,
                          "number of random train/test splits"),
          "repeats", args.repeats);
  b.track(cmd->add_option("--train-fraction", args.train_fraction,
                          "fraction of each class used for training"),
          "train_fraction", args.train_fraction);
  b.track(cmd->add_option("--jobs", args.jobs, "worker threads"), "jobs",
          args.jobs);
  cmd->add_option("--config", args.config_path,
                  "JSON file with defaults for these flags");
  cmd->add_option("--out", args.out, "output directory")->required();
}

void run_evaluate(EvaluateArgs& args) {
  if (!args.config_path.empty()) {
    args.binding.apply(load_config_file(args.config_path));
  }
  require_input_file(args.manifest, "manifest");
  if (args.jobs < 1) {
    throw UsageError("evaluate: --jobs must be at least 1");
  }
  std::string canonical_variant;
  try {
    canonical_variant = eval::parse_variant(args.variant).name;
  } catch (const std::invalid_argument& error) {
    throw UsageError(error.what());
  }
  // run_experiment applies the variant itself; build the base config only.
  const training::TrainConfig base =
      build_train_config(args.model, nullptr, nullptr, args.binding);
  if (args.repeats < 1) {
    throw UsageError("evaluate: --repeats must be at least 1");
  }
  if (!(args.train_fraction > 0.0 && args.train_fraction < 1.0)) {
    throw UsageError("evaluate: --train-fraction must lie in (0, 1)");
  }

  json resolved;
  resolved["command"] = "evaluate";
  resolved["manifest"] = args.manifest;
  resolved["variant"] = canonical_variant;
  resolved["repeats"] = args.repeats;
  resolved["train_fraction"] = args.train_fraction;
  resolved["jobs"] = args.jobs;
  resolved["train_config"] = train_config_json(base);
  resolved["out"] = args.out;
  print_resolved(resolved);

  const std::vector<graph::NetworkInstance> instances =
      dataio::load_dataset(args.manifest);
  const eval::ExperimentReport report =
      eval::run_experiment(instances, canonical_variant, base, args.repeats,
                           args.train_fraction, args.jobs);

  fs::create_directories(args.out);
  const fs::path json_path = fs::path(args.out) / "report.json";
  const fs::path csv_path = fs::path(args.out) / "report.csv";
  eval::write_report_json(report, json_path.string());
  eval::write_report_csv(report, csv_path.string());
  std::cout << summary_line(report.variant, report) << "\n";
  std::cout << "wrote " << json_path.string() << "\n";
  std::cout << "wrote " << csv_path.string() << "\n";
}

// ---------------------------------------------------------------------------
// gridsearch
// ---------------------------------------------------------------------------

struct GridArgs {
  std::string manifest;
  std::string variant = "SCP-GCN";
  ModelFlags model;
  std::vector<double> alpha_grid{0.1};
  std::vector<double> beta_grid{0.1};
  std::vector<int> c_grid{2, 3, 4, 5, 6, 7, 8, 9, 10};
  int folds = 3;
  int jobs = 1;
  std::string out;
  std::string config_path;
  FlagBinding binding;
};

void setup_gridsearch(CLI::App& app, GridArgs& args) {
  CLI::App* cmd = app.add_subcommand(
      "gridsearch",
      "Cross-validated search over alpha, beta and community count");
  cmd->add_option("--manifest", args.manifest, "dataset manifest JSON")
      ->required();
  FlagBinding& b = args.binding;
  b.track(cmd->add_option("--variant", args.variant,
                          "model variant the search evaluates"),
          "variant", args.variant);
  add_model_flags(cmd, args.model, b);
  b.track(cmd->add_option("--alpha-grid", args.alpha_grid,
                          "comma-separated alpha values")
              ->delimiter(','),
          "alpha_grid", args.alpha_grid);
  b.track(cmd->add_option("--beta-grid", args.beta_grid,
                          "comma-separated beta values")
              ->delimiter(','),
          "beta_grid", args.beta_grid);
  b.track(cmd->add_option("--c-grid", args.c_grid,
                          "comma-separated community counts")
              ->delimiter(','),
          "c_grid", args.c_grid);
  b.track(cmd->add_option("--folds", args.folds,
                          "cross-validation folds"),
          "folds", args.folds);
  b.track(cmd->add_option("--jobs", args.jobs, "worker threads"), "jobs",
          args.jobs);
  cmd->add_option("--config", args.config_path,
                  "JSON file with defaults for these flags");
  cmd->add_option("--out", args.out, "output directory")->required();
}

void run_gridsearch(GridArgs& args) {
  if (!args.config_path.empty()) {
    args.binding.apply(load_config_file(args.config_path));
  }
  require_input_file(args.manifest, "manifest");
  if (args.jobs < 1) {
    throw UsageError("gridsearch: --jobs must be at least 1");
  }
  if (args.folds < 2) {
    throw UsageError("gridsearch: --folds must be at least 2");
  }
  if (args.alpha_grid.empty() || args.beta_grid.empty() ||
      args.c_grid.empty()) {
    throw UsageError("gridsearch: grids must not be empty");
  }
  training::TrainConfig base =
      build_train_config(args.model, nullptr, nullptr, args.binding);
  try {
    base = eval::apply_variant(base, eval::parse_variant(args.variant));
  } catch (const std::invalid_argument& error) {
    throw UsageError(error.what());
  }

  json resolved;
  resolved["command"] = "gridsearch";
  resolved["manifest"] = args.manifest;
  resolved["variant"] = eval::parse_variant(args.variant).name;
  resolved["alpha_grid"] = args.alpha_grid;
  resolved["beta_grid"] = args.beta_grid;
  resolved["c_grid"] = args.c_grid;
  resolved["folds"] = args.folds;
  resolved["jobs"] = args.jobs;
  resolved["train_config"] = train_config_json(base);
  resolved["out"] = args.out;
  print_resolved(resolved);

  const std::vector<graph::NetworkInstance> instances =
      dataio::load_dataset(args.manifest);
  const eval::GridSearchResult result =
      eval::grid_search(instances, args.alpha_grid, args.beta_grid,
                        args.c_grid, args.folds, base, args.jobs);

  fs::create_directories(args.out);
  const fs::path json_path = fs::path(args.out) / "grid.json";
  const fs::path csv_path = fs::path(args.out) / "grid.csv";
  eval::write_grid_json(result, json_path.string());
  eval::write_grid_csv(result, csv_path.string());
  std::cout << "best: alpha=" << format_short(result.best_alpha)
            << " beta=" << format_short(result.best_beta)
            << " communities=" << result.best_communities
            << " accuracy=" << format_metric(result.best_accuracy) << "\n";
  std::cout << "wrote " << json_path.string() << "\n";
  std::cout << "wrote " << csv_path.string() << "\n";
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

struct AblateArgs {
  std::string manifest;
  ModelFlags model;
  int repeats = 10;
  double train_fraction = 0.8;
  int jobs = 1;
  std::string out;
  std::string config_path;
  FlagBinding binding;
};

void setup_ablate(CLI::App& app, AblateArgs& args) {
  CLI::App* cmd = app.add_subcommand(
      "ablate",
      "Evaluate all eight model/view variants on shared splits");
  cmd->add_option("--manifest", args.manifest, "dataset manifest JSON")
      ->required();
  FlagBinding& b = args.binding;
  add_model_flags(cmd, args.model, b);
  b.track(cmd->add_option("--repeats", args.repeats,
                          "number of random train/test splits"),
          "repeats", args.repeats);
  b.track(cmd->add_option("--train-fraction", args.train_fraction,
                          "fraction of each class used for training"),
          "train_fraction", args.train_fraction);
  b.track(cmd->add_option("--jobs", args.jobs, "worker threads"), "jobs",
          args.jobs);
  cmd->add_option("--config", args.config_path,
                  "JSON file with defaults for these flags");
  cmd->add_option("--out", args.out, "output directory")->required();
}

void run_ablate(AblateArgs& args) {
  if (!args.config_path.empty()) {
    args.binding.apply(load_config_file(args.config_path));
  }
  require_input_file(args.manifest, "manifest");
  if (args.jobs < 1) {
    throw UsageError("ablate: --jobs must be at least 1");
  }
  if (args.repeats < 1) {
    throw UsageError("ablate: --repeats must be at least 1");
  }
  if (!(args.train_fraction > 0.0 && args.train_fraction < 1.0)) {
    throw UsageError("ablate: --train-fraction must lie in (0, 1)");
  }
  const training::TrainConfig base =
      build_train_config(args.model, nullptr, nullptr, args.binding);

  json resolved;
  resolved["command"] = "ablate";
  resolved["manifest"] = args.manifest;
  resolved["repeats"] = args.repeats;
  resolved["train_fraction"] = args.train_fraction;
  resolved["jobs"] = args.jobs;
  resolved["train_config"] = train_config_json(base);
  resolved["out"] = args.out;
  print_resolved(resolved);

  const std::vector<graph::NetworkInstance> instances =
      dataio::load_dataset(args.manifest);
  const std::vector<eval::ExperimentReport> reports =
      eval::run_ablation(instances, base, args.repeats, args.train_fraction,
                         args.jobs);

  fs::create_directories(args.out);
  const fs::path json_path = fs::path(args.out) / "ablation.json";
  const fs::path csv_path = fs::path(args.out) / "ablation.csv";
  eval::write_ablation_json(reports, json_path.string());
  eval::write_ablation_csv(reports, csv_path.string());
  for (const eval::ExperimentReport& report : reports) {
    std::cout << summary_line(report.variant, report) << "\n";
  }
  std::cout << "wrote " << json_path.string() << "\n";
  std::cout << "wrote " << csv_path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Joint embedding of paired structural/functional brain networks"};
  app.require_subcommand(1);

  GenerateArgs generate_args;
  ClusterArgs cluster_args;
  TrainArgs train_args;
  EmbedArgs embed_args;
  EvaluateArgs evaluate_args;
  GridArgs grid_args;
  AblateArgs ablate_args;

  setup_generate(app, generate_args);
  setup_cluster(app, cluster_args);
  setup_train(app, train_args);
  setup_embed(app, embed_args);
  setup_evaluate(app, evaluate_args);
  setup_gridsearch(app, grid_args);
  setup_ablate(app, ablate_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForAllHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return 2;
  }

  try {
    if (app.got_subcommand("generate")) {
      run_generate(generate_args);
    } else if (app.got_subcommand("cluster")) {
      run_cluster(cluster_args);
    } else if (app.got_subcommand("train")) {
      run_train(train_args);
    } else if (app.got_subcommand("embed")) {
      run_embed(embed_args);
    } else if (app.got_subcommand("evaluate")) {
      run_evaluate(evaluate_args);
    } else if (app.got_subcommand("gridsearch")) {
      run_gridsearch(grid_args);
    } else if (app.got_subcommand("ablate")) {
      run_ablate(ablate_args);
    }
  } catch (const UsageError& error) {
    std::cerr << "usage error: " << error.what() << "\n";
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
