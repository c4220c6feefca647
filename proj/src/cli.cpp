#include "textaug/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "textaug/augment.hpp"
#include "textaug/corpus.hpp"
#include "textaug/error.hpp"
#include "textaug/evalbench.hpp"
#include "textaug/manifest.hpp"
#include "textaug/providers.hpp"
#include "textaug/similarity.hpp"
#include "textaug/strings.hpp"
#include "textaug/textkit.hpp"

namespace textaug::cli {
namespace {

namespace fs = std::filesystem;
using corpus::LabeledExample;

std::string now_timestamp() {
  if (const char* v = std::getenv("AUG_TIMESTAMP")) return v;
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

// Collects the resolved configuration and output files of one command and
// writes the run manifest last, once every output exists on disk.
class ManifestBuilder {
 public:
  ManifestBuilder(std::string command, std::vector<std::string> argv) {
    manifest_.command = std::move(command);
    manifest_.argv = std::move(argv);
    manifest_.timestamp = now_timestamp();
  }

  void config(const std::string& key, std::string value) {
    manifest_.config[key] = std::move(value);
  }
  void config(const std::string& key, const char* value) {
    manifest_.config[key] = value;
  }
  template <typename T>
  void config(const std::string& key, T value) {
    if constexpr (std::is_floating_point_v<T>) {
      manifest_.config[key] = fmt(static_cast<double>(value));
    } else {
      manifest_.config[key] = std::to_string(value);
    }
  }

  void output(const fs::path& path) { outputs_.push_back(path); }
  void cassette(const std::string& path) { cassette_path_ = path; }

  void write(const fs::path& manifest_path) {
    for (const auto& path : outputs_) {
      manifest_.output_hashes[path.generic_string()] = hash_file(path);
    }
    if (!cassette_path_.empty() && fs::exists(cassette_path_)) {
      manifest_.cassette_path = cassette_path_;
      manifest_.cassette_hash = hash_file(cassette_path_);
    }
    ensure_parent(manifest_path);
    manifest_.write(manifest_path);
  }

 private:
  RunManifest manifest_;
  std::vector<fs::path> outputs_;
  std::string cassette_path_;
};

struct ProviderSetup {
  providers::ReplayMode mode = providers::ReplayMode::kReplay;
  std::string cassette_path;
  std::unique_ptr<providers::Cassette> cassette;
  std::unique_ptr<providers::ServiceClient> client;
};

ProviderSetup make_provider(std::string mode_name, std::string cassette_path) {
  if (mode_name.empty()) {
    if (const char* v = std::getenv("AUG_REPLAY_MODE")) mode_name = v;
  }
  if (mode_name.empty()) mode_name = "replay";
  ProviderSetup setup;
  setup.mode = providers::parse_replay_mode(mode_name);

  if (cassette_path.empty()) {
    if (const char* v = std::getenv("AUG_CASSETTE")) cassette_path = v;
  }
  setup.cassette_path = cassette_path;
  if (setup.mode == providers::ReplayMode::kReplay) {
    if (cassette_path.empty()) {
      throw ConfigError("replay mode requires --cassette or AUG_CASSETTE");
    }
    setup.cassette = std::make_unique<providers::Cassette>(
        providers::Cassette::load(cassette_path));
  } else if (setup.mode == providers::ReplayMode::kRecord) {
    if (cassette_path.empty()) {
      throw ConfigError("record mode requires --cassette or AUG_CASSETTE");
    }
    setup.cassette = std::make_unique<providers::Cassette>(
        providers::Cassette::open(cassette_path));
  }
  setup.client = std::make_unique<providers::ServiceClient>(
      providers::ProviderConfig::from_env(), setup.mode, setup.cassette.get());
  return setup;
}

std::vector<std::string> sorted_labels(
    std::initializer_list<const std::vector<LabeledExample>*> splits) {
  std::set<std::string> labels;
  for (const auto* split : splits) {
    for (const auto& e : *split) labels.insert(e.label);
  }
  return {labels.begin(), labels.end()};
}

// ---------------------------------------------------------------- subsample

struct SubsampleArgs {
  std::string in;
  std::string format = "jsonl";
  std::size_t per_class = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_subsample(const SubsampleArgs& a, const std::vector<std::string>& argv) {
  const auto format = corpus::parse_format(a.format);
  const auto bundle = corpus::load_dataset(a.in, format);
  corpus::SubsampleSpec spec;
  spec.per_class = a.per_class;
  spec.seed = a.seed;
  const auto sub = corpus::subsample(bundle, spec);
  ensure_parent(a.out);
  corpus::save_examples(sub.train, a.out, format);

  ManifestBuilder mb("subsample", argv);
  mb.config("in", a.in);
  mb.config("format", a.format);
  mb.config("per_class", a.per_class);
  mb.config("seed", a.seed);
  mb.config("out", a.out);
  mb.output(a.out);
  mb.write(a.out + ".manifest.json");
  std::cout << "subsampled " << sub.train.size() << " of " << bundle.train.size()
            << " examples (" << bundle.labels.size() << " classes) to " << a.out
            << "\n";
  return 0;
}

// ------------------------------------------------------------------ augment

struct RecipeArgs {
  std::string method;
  std::size_t k = 1;
  double alpha = 0.10;
  std::string prompts;
  std::vector<std::string> pivots;
  std::uint64_t seed = 0;
  std::size_t per_call = 20;
};

augment::AugmentMethod parse_cli_method(const std::string& name) {
  if (name == "eda") return augment::AugmentMethod::kEda;
  if (name == "backtrans") return augment::AugmentMethod::kBackTranslation;
  if (name == "llm-zero") return augment::AugmentMethod::kLlmZeroShot;
  if (name == "llm-few") return augment::AugmentMethod::kLlmFewShot;
  throw ConfigError("unknown method '" + name +
                    "' (expected eda, backtrans, llm-zero, or llm-few)");
}

augment::AugmentationRecipe build_recipe(const RecipeArgs& a) {
  augment::AugmentationRecipe recipe;
  recipe.method = parse_cli_method(a.method);
  recipe.k = a.k;
  recipe.seed = a.seed;
  recipe.per_call = a.per_call;
  switch (recipe.method) {
    case augment::AugmentMethod::kEda: {
      augment::EdaParams params;
      params.alpha = a.alpha;
      params.seed = a.seed;
      recipe.eda = params;
      break;
    }
    case augment::AugmentMethod::kBackTranslation:
      recipe.pivot_langs = a.pivots;
      break;
    case augment::AugmentMethod::kLlmZeroShot:
    case augment::AugmentMethod::kLlmFewShot:
      if (a.prompts.empty()) {
        throw ConfigError("--prompts is required for method '" + a.method + "'");
      }
      recipe.prompts = augment::load_prompt_catalog(a.prompts);
      break;
  }
  recipe.validate();
  return recipe;
}

bool needs_provider(augment::AugmentMethod method) {
  return method != augment::AugmentMethod::kEda;
}

struct AugmentArgs {
  std::string in;
  std::string format = "jsonl";
  RecipeArgs recipe;
  std::string thesaurus;
  std::string stopwords;
  std::string replay_mode;
  std::string cassette;
  bool include_original = false;
  std::string out;
};

int cmd_augment(const AugmentArgs& a, const std::vector<std::string>& argv) {
  const auto format = corpus::parse_format(a.format);
  const auto bundle = corpus::load_dataset(a.in, format);
  const auto recipe = build_recipe(a.recipe);

  augment::AugmentEnv env;
  augment::Thesaurus thesaurus;
  textkit::Stoplist stoplist;
  ProviderSetup provider;
  if (recipe.method == augment::AugmentMethod::kEda) {
    if (a.thesaurus.empty() || a.stopwords.empty()) {
      throw ConfigError("eda requires --thesaurus and --stopwords");
    }
    thesaurus = augment::load_thesaurus(a.thesaurus);
    stoplist = textkit::load_stoplist(a.stopwords);
    env.thesaurus = &thesaurus;
    env.stoplist = &stoplist;
  } else {
    provider = make_provider(a.replay_mode, a.cassette);
    env.client = provider.client.get();
  }

  auto generated = augment::apply_recipe(bundle.train, bundle.labels, recipe, env);
  const std::size_t generated_count = generated.size();

  std::vector<LabeledExample> out_examples;
  if (a.include_original) {
    out_examples = bundle.train;
    for (auto& e : generated) out_examples.push_back(std::move(e));
  } else {
    out_examples = std::move(generated);
  }
  ensure_parent(a.out);
  corpus::save_examples(out_examples, a.out, format);

  ManifestBuilder mb("augment", argv);
  mb.config("in", a.in);
  mb.config("format", a.format);
  mb.config("method", a.recipe.method);
  mb.config("k", a.recipe.k);
  mb.config("alpha", a.recipe.alpha);
  mb.config("seed", a.recipe.seed);
  mb.config("per_call", a.recipe.per_call);
  if (!a.recipe.prompts.empty()) mb.config("prompts", a.recipe.prompts);
  if (!a.recipe.pivots.empty()) {
    mb.config("pivots", strings::join(a.recipe.pivots, ","));
  }
  if (!a.thesaurus.empty()) mb.config("thesaurus", a.thesaurus);
  if (!a.stopwords.empty()) mb.config("stopwords", a.stopwords);
  mb.config("include_original", a.include_original ? "true" : "false");
  mb.config("out", a.out);
  if (needs_provider(recipe.method)) {
    mb.config("replay_mode", providers::replay_mode_name(provider.mode));
    mb.cassette(provider.cassette_path);
  }
  mb.output(a.out);
  mb.write(a.out + ".manifest.json");
  std::cout << "generated " << generated_count << " examples ("
            << out_examples.size() << " written) to " << a.out << "\n";
  return 0;
}

// -------------------------------------------------------------------- audit

struct AuditArgs {
  std::string train;
  std::string test;
  std::string generated;
  std::string format = "jsonl";
  std::string task = "task";
  std::vector<std::string> metrics = {"embed", "tfidf", "overlap"};
  std::string embedder = "hash";
  std::string stopwords;
  std::size_t embed_batch = 64;
  int jobs = 1;
  std::string replay_mode;
  std::string cassette;
  std::string out_dir;
};

similarity::MetricKind parse_cli_metric(const std::string& name) {
  if (name == "embed") return similarity::MetricKind::kEmbeddingCosine;
  if (name == "tfidf") return similarity::MetricKind::kTfIdfCosine;
  if (name == "overlap") return similarity::MetricKind::kWordOverlap;
  return similarity::parse_metric(name);
}

int cmd_audit(const AuditArgs& a, const std::vector<std::string>& argv) {
  const auto format = corpus::parse_format(a.format);
  corpus::DatasetBundle bundle;
  bundle.task_name = a.task;
  bundle.train = corpus::load_examples(a.train, format, "train");
  bundle.test = corpus::load_examples(a.test, format, "test");
  std::vector<LabeledExample> generated;
  if (!a.generated.empty()) {
    generated = corpus::load_examples(a.generated, format, "gen");
  }
  bundle.labels = sorted_labels({&bundle.train, &bundle.test, &generated});
  bundle.validate();

  std::vector<similarity::MetricKind> metrics;
  for (const auto& name : a.metrics) metrics.push_back(parse_cli_metric(name));

  if (a.stopwords.empty()) throw ConfigError("audit requires --stopwords");
  const auto stoplist = textkit::load_stoplist(a.stopwords);

  similarity::SimilarityResources resources;
  resources.stoplist = &stoplist;
  resources.jobs = a.jobs;

  ProviderSetup provider;
  std::optional<providers::HashEmbedder> hash_embedder;
  const bool wants_embeddings =
      std::find(metrics.begin(), metrics.end(),
                similarity::MetricKind::kEmbeddingCosine) != metrics.end();
  if (wants_embeddings) {
    if (a.embedder == "hash") {
      hash_embedder.emplace(stoplist);
      resources.embedder = [&](const std::vector<std::string>& texts) {
        return (*hash_embedder)(texts);
      };
    } else if (a.embedder == "provider") {
      provider = make_provider(a.replay_mode, a.cassette);
      resources.embedder = [client = provider.client.get(),
                            batch = a.embed_batch](
                               const std::vector<std::string>& texts) {
        std::vector<std::vector<double>> all;
        all.reserve(texts.size());
        for (std::size_t start = 0; start < texts.size(); start += batch) {
          const std::size_t end = std::min(texts.size(), start + batch);
          auto part = client->embed(
              std::vector<std::string>(texts.begin() + start, texts.begin() + end));
          for (auto& v : part) all.push_back(std::move(v));
        }
        return all;
      };
    } else {
      throw ConfigError("unknown embedder '" + a.embedder +
                        "' (expected hash or provider)");
    }
  }

  const auto reports = similarity::audit(bundle, generated, metrics, resources);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  similarity::write_audit_csv(reports, dir / "audit.csv");
  similarity::write_audit_json(reports, dir / "audit.json");
  similarity::write_audit_markdown(reports, dir / "audit.md");

  ManifestBuilder mb("audit", argv);
  mb.config("train", a.train);
  mb.config("test", a.test);
  if (!a.generated.empty()) mb.config("generated", a.generated);
  mb.config("format", a.format);
  mb.config("task", a.task);
  mb.config("metrics", strings::join(a.metrics, ","));
  mb.config("embedder", a.embedder);
  mb.config("stopwords", a.stopwords);
  mb.config("jobs", a.jobs);
  mb.config("out_dir", a.out_dir);
  if (a.embedder == "provider" && wants_embeddings) {
    mb.config("replay_mode", providers::replay_mode_name(provider.mode));
    mb.cassette(provider.cassette_path);
  }
  mb.output(dir / "audit.csv");
  mb.output(dir / "audit.json");
  mb.output(dir / "audit.md");
  mb.write(dir / "manifest.json");

  for (const auto& report : reports) {
    std::cout << report.pair_name << " " << similarity::metric_name(report.metric)
              << " mean=" << fmt(report.dataset_mean);
    if (report.metric == similarity::MetricKind::kWordOverlap) {
      const auto stats = similarity::overlap_stats(report);
      std::cout << " frac>2/3=" << fmt(stats.frac_above_two_thirds)
                << " max%=" << fmt(stats.max_percent)
                << " at_max=" << stats.count_at_max;
    }
    std::cout << "\n";
  }
  return 0;
}

// -------------------------------------------------------------------- bench

struct BenchArgs {
  std::string train;
  std::string dev;
  std::string test;
  std::string format = "jsonl";
  std::string task = "task";
  std::vector<std::string> methods;
  RecipeArgs recipe;  // method field unused; one recipe per --method entry
  std::string thesaurus;
  std::string stopwords;
  std::size_t per_class = 10;
  std::size_t reps = 15;
  std::uint64_t base_seed = 0;
  std::size_t epochs = 200;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::vector<std::size_t> sweep_k;
  bool no_train_data = false;
  std::size_t gen_per_class = 20;
  std::string replay_mode;
  std::string cassette;
  std::string out_dir;
};

int cmd_bench(const BenchArgs& a, const std::vector<std::string>& argv) {
  const auto format = corpus::parse_format(a.format);
  corpus::DatasetBundle bundle;
  bundle.task_name = a.task;
  bundle.train = corpus::load_examples(a.train, format, "train");
  if (!a.dev.empty()) bundle.dev = corpus::load_examples(a.dev, format, "dev");
  bundle.test = corpus::load_examples(a.test, format, "test");
  bundle.labels = sorted_labels({&bundle.train, &bundle.dev, &bundle.test});
  bundle.validate();

  std::vector<std::string> methods = a.methods;
  if (a.no_train_data && methods.empty()) methods.push_back("llm-zero");

  std::vector<std::pair<std::string, augment::AugmentationRecipe>> recipes;
  for (const auto& name : methods) {
    RecipeArgs args = a.recipe;
    args.method = name;
    recipes.emplace_back(name, build_recipe(args));
  }

  augment::AugmentEnv env;
  augment::Thesaurus thesaurus;
  textkit::Stoplist stoplist;
  ProviderSetup provider;
  bool uses_provider = false;
  for (const auto& [name, recipe] : recipes) {
    if (recipe.method == augment::AugmentMethod::kEda && !env.thesaurus) {
      if (a.thesaurus.empty() || a.stopwords.empty()) {
        throw ConfigError("eda requires --thesaurus and --stopwords");
      }
      thesaurus = augment::load_thesaurus(a.thesaurus);
      stoplist = textkit::load_stoplist(a.stopwords);
      env.thesaurus = &thesaurus;
      env.stoplist = &stoplist;
    }
    if (needs_provider(recipe.method) && !uses_provider) {
      provider = make_provider(a.replay_mode, a.cassette);
      env.client = provider.client.get();
      uses_provider = true;
    }
  }

  evalbench::TrainConfig config;
  config.epochs = a.epochs;
  config.learning_rate = a.learning_rate;
  config.l2 = a.l2;
  config.seed = a.base_seed;

  evalbench::BenchOptions options;
  options.per_class = a.per_class;
  options.repetitions = a.reps;
  options.base_seed = a.base_seed;

  std::vector<evalbench::ExperimentResult> results;
  bool swept = false;
  if (a.no_train_data) {
    if (recipes.size() != 1 ||
        recipes[0].second.method != augment::AugmentMethod::kLlmZeroShot) {
      throw ConfigError("--no-train-data runs a single llm-zero method");
    }
    results.push_back(evalbench::run_no_train_scenario(
        bundle, recipes[0].second, a.gen_per_class, config, options, env));
  } else if (!a.sweep_k.empty()) {
    swept = true;
    results = evalbench::sweep_k(bundle, recipes, a.sweep_k, config, options, env);
  } else {
    results.push_back(
        evalbench::run_experiment(bundle, std::nullopt, config, options, env));
    for (const auto& [name, recipe] : recipes) {
      results.push_back(
          evalbench::run_experiment(bundle, recipe, config, options, env));
    }
  }

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  evalbench::write_per_rep_csv(results, dir / "per_rep.csv");
  evalbench::write_aggregate_csv(results, dir / "aggregate.csv");
  evalbench::write_markdown_report(results, dir / "report.md");
  if (swept) evalbench::write_sweep_csv(results, dir / "sweep.csv");

  ManifestBuilder mb("bench", argv);
  mb.config("train", a.train);
  if (!a.dev.empty()) mb.config("dev", a.dev);
  mb.config("test", a.test);
  mb.config("format", a.format);
  mb.config("task", a.task);
  if (!methods.empty()) mb.config("methods", strings::join(methods, ","));
  mb.config("k", a.recipe.k);
  mb.config("alpha", a.recipe.alpha);
  mb.config("seed", a.recipe.seed);
  mb.config("per_call", a.recipe.per_call);
  if (!a.recipe.prompts.empty()) mb.config("prompts", a.recipe.prompts);
  if (!a.recipe.pivots.empty()) {
    mb.config("pivots", strings::join(a.recipe.pivots, ","));
  }
  if (!a.thesaurus.empty()) mb.config("thesaurus", a.thesaurus);
  if (!a.stopwords.empty()) mb.config("stopwords", a.stopwords);
  mb.config("per_class", a.per_class);
  mb.config("reps", a.reps);
  mb.config("base_seed", a.base_seed);
  mb.config("epochs", a.epochs);
  mb.config("learning_rate", a.learning_rate);
  mb.config("l2", a.l2);
  if (swept) {
    std::vector<std::string> ks;
    for (auto k : a.sweep_k) ks.push_back(std::to_string(k));
    mb.config("sweep_k", strings::join(ks, ","));
  }
  if (a.no_train_data) {
    mb.config("no_train_data", "true");
    mb.config("gen_per_class", a.gen_per_class);
  }
  mb.config("out_dir", a.out_dir);
  if (uses_provider) {
    mb.config("replay_mode", providers::replay_mode_name(provider.mode));
    mb.cassette(provider.cassette_path);
  }
  mb.output(dir / "per_rep.csv");
  mb.output(dir / "aggregate.csv");
  mb.output(dir / "report.md");
  if (swept) mb.output(dir / "sweep.csv");
  mb.write(dir / "manifest.json");

  for (const auto& r : results) {
    std::cout << r.task << " " << r.method << " K=" << r.k << " mean="
              << fmt(r.mean) << " std=" << fmt(r.std_dev) << " n="
              << r.per_rep_accuracy.size() << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------- ingest

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    if (b0 < 0x80) {
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
    } else {
      return false;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) return false;
    for (int k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]) &
           0xC0) != 0x80) {
        return false;
      }
    }
    i += static_cast<std::size_t>(len);
  }
  return true;
}

std::string latin1_to_utf8(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    const auto b = static_cast<unsigned char>(c);
    if (b < 0x80) {
      out += c;
    } else {
      out += static_cast<char>(0xC0 | (b >> 6));
      out += static_cast<char>(0x80 | (b & 0x3F));
    }
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string content = buffer.str();
  if (!valid_utf8(content)) content = latin1_to_utf8(content);
  return content;
}

// Intent corpus files: a JSON object mapping one intent name to a list of
// utterances, each utterance a "data" array of text chunks.
void ingest_intent_json(const fs::path& path, std::vector<LabeledExample>& out,
                        const std::string& id_prefix) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed intent file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error("intent file " + path.string() + ": expected a JSON object");
  }
  for (const auto& [intent, utterances] : j.items()) {
    for (const auto& utterance : utterances) {
      std::string text;
      for (const auto& chunk : utterance.at("data")) {
        text += chunk.at("text").get<std::string>();
      }
      LabeledExample e;
      e.id = id_prefix + "-" + std::to_string(out.size());
      e.text = std::move(text);
      e.label = intent;
      out.push_back(std::move(e));
    }
  }
}

std::vector<LabeledExample> ingest_snips(const fs::path& in,
                                         const std::string& split,
                                         const std::string& id_prefix) {
  std::vector<LabeledExample> out;
  if (fs::is_directory(in)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(in)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      const bool train_file = name.rfind("train_", 0) == 0 &&
                              name.size() > 10 &&
                              name.compare(name.size() - 10, 10, "_full.json") == 0;
      const bool test_file =
          name.rfind("validate_", 0) == 0 &&
          name.size() > 5 && name.compare(name.size() - 5, 5, ".json") == 0;
      if ((split == "train" && train_file) || (split != "train" && test_file)) {
        files.push_back(entry.path());
      }
    }
    if (files.empty()) {
      throw Error("no intent files for split '" + split + "' under " +
                  in.string());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) ingest_intent_json(file, out, id_prefix);
  } else {
    ingest_intent_json(in, out, id_prefix);
  }
  return out;
}

// Question-classification label files: one "LABEL:fine text..." line per
// example; the coarse label is the part before the colon.
std::vector<LabeledExample> ingest_trec(const fs::path& in,
                                        const std::string& id_prefix) {
  std::istringstream stream(read_text_file(in));
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strings::trim(line).empty()) continue;
    const auto colon = line.find(':');
    const auto space = line.find(' ');
    if (colon == std::string::npos || space == std::string::npos ||
        colon > space) {
      throw Error(in.string() + " line " + std::to_string(line_no) +
                  ": expected 'LABEL:fine question'");
    }
    LabeledExample e;
    e.id = id_prefix + "-" + std::to_string(out.size());
    e.label = line.substr(0, colon);
    e.text = strings::trim(line.substr(space + 1));
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error(in.string() + " contains no records");
  return out;
}

// Sentiment TSV with a "sentence<TAB>label" header and 0/1 labels.
std::vector<LabeledExample> ingest_sst2(const fs::path& in,
                                        const std::string& id_prefix) {
  std::istringstream stream(read_text_file(in));
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(in.string() + " line " + std::to_string(line_no) +
                  ": expected 'sentence<TAB>label'");
    }
    const std::string text = strings::trim(line.substr(0, tab));
    const std::string raw_label = strings::trim(line.substr(tab + 1));
    if (line_no == 1 && raw_label == "label") continue;  // header
    std::string label;
    if (raw_label == "0") {
      label = "negative";
    } else if (raw_label == "1") {
      label = "positive";
    } else {
      throw Error(in.string() + " line " + std::to_string(line_no) +
                  ": expected label 0 or 1, got '" + raw_label + "'");
    }
    LabeledExample e;
    e.id = id_prefix + "-" + std::to_string(out.size());
    e.text = text;
    e.label = label;
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error(in.string() + " contains no records");
  return out;
}

struct IngestArgs {
  std::string task;
  std::string in;
  std::string split = "train";
  std::string out;
};

int cmd_ingest(const IngestArgs& a, const std::vector<std::string>& argv) {
  const std::string id_prefix = a.task + "-" + a.split;
  std::vector<LabeledExample> examples;
  if (a.task == "snips") {
    examples = ingest_snips(a.in, a.split, id_prefix);
  } else if (a.task == "trec") {
    examples = ingest_trec(a.in, id_prefix);
  } else if (a.task == "sst2") {
    examples = ingest_sst2(a.in, id_prefix);
  } else {
    throw ConfigError("unknown task '" + a.task +
                      "' (expected snips, trec, or sst2)");
  }
  ensure_parent(a.out);
  corpus::save_examples(examples, a.out, corpus::FileFormat::kJsonl);

  ManifestBuilder mb("ingest", argv);
  mb.config("task", a.task);
  mb.config("in", a.in);
  mb.config("split", a.split);
  mb.config("out", a.out);
  mb.output(a.out);
  mb.write(a.out + ".manifest.json");

  std::map<std::string, std::size_t> counts;
  for (const auto& e : examples) ++counts[e.label];
  std::cout << "ingested " << examples.size() << " examples, "
            << counts.size() << " labels, to " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------ from-manifest

int rerun_from_manifest(const std::string& path) {
  const RunManifest manifest = RunManifest::read(path);
  std::cout << "re-executing '" << manifest.command << "' from " << path
            << "\n";
  const int code = run_cli(manifest.argv);
  if (code != 0) return code;

  std::size_t mismatches = 0;
  for (const auto& [file, expected] : manifest.output_hashes) {
    const std::string actual =
        fs::exists(file) ? hash_file(file) : std::string("<missing>");
    if (actual != expected) {
      std::cerr << "hash mismatch for " << file << ": expected " << expected
                << ", got " << actual << "\n";
      ++mismatches;
    }
  }
  if (mismatches > 0) {
    std::cerr << mismatches << " of " << manifest.output_hashes.size()
              << " output hashes differ from the manifest\n";
    return 1;
  }
  std::cout << "all " << manifest.output_hashes.size()
            << " output hashes match the manifest\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Synthetic text augmentation, contamination audits, and a "
               "seeded classification benchmark"};
  app.name("textaug");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(0, 1);

  std::string from_manifest;
  app.add_option("--from-manifest", from_manifest,
                 "re-execute a recorded run and verify its output hashes");

  int exit_code = 0;

  SubsampleArgs sub_args;
  auto* sub = app.add_subcommand("subsample",
                                 "draw a seeded per-class subsample");
  sub->add_option("--in", sub_args.in, "input examples file")->required();
  sub->add_option("--format", sub_args.format, "jsonl or tsv")
      ->capture_default_str();
  sub->add_option("--per-class", sub_args.per_class, "examples kept per class")
      ->capture_default_str();
  sub->add_option("--seed", sub_args.seed, "RNG seed")->capture_default_str();
  sub->add_option("--out", sub_args.out, "output file")->required();
  sub->callback([&] { exit_code = cmd_subsample(sub_args, args); });

  AugmentArgs aug_args;
  auto* aug = app.add_subcommand("augment", "generate synthetic examples");
  aug->add_option("--in", aug_args.in, "training examples file")->required();
  aug->add_option("--format", aug_args.format, "jsonl or tsv")
      ->capture_default_str();
  aug->add_option("--method", aug_args.recipe.method,
                  "eda, backtrans, llm-zero, or llm-few")
      ->required();
  aug->add_option("--k", aug_args.recipe.k, "generated per original example")
      ->capture_default_str();
  aug->add_option("--alpha", aug_args.recipe.alpha, "EDA intensity")
      ->capture_default_str();
  aug->add_option("--prompts", aug_args.recipe.prompts,
                  "prompt catalog JSON (LLM methods)");
  aug->add_option("--pivots", aug_args.recipe.pivots,
                  "pivot language codes (backtrans)")
      ->delimiter(',');
  aug->add_option("--seed", aug_args.recipe.seed, "RNG seed")
      ->capture_default_str();
  aug->add_option("--per-call", aug_args.recipe.per_call,
                  "sentences requested per chat call")
      ->capture_default_str();
  aug->add_option("--thesaurus", aug_args.thesaurus, "synonym table JSON (eda)");
  aug->add_option("--stopwords", aug_args.stopwords, "stop-word list (eda)");
  aug->add_option("--replay-mode", aug_args.replay_mode,
                  "record, replay, or passthrough");
  aug->add_option("--cassette", aug_args.cassette, "provider cassette JSONL");
  aug->add_flag("--include-original", aug_args.include_original,
                "write originals followed by generated examples");
  aug->add_option("--out", aug_args.out, "output file")->required();
  aug->callback([&] { exit_code = cmd_augment(aug_args, args); });

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "similarity contamination audit");
  audit->add_option("--train", audit_args.train, "training examples file")
      ->required();
  audit->add_option("--test", audit_args.test, "test examples file")->required();
  audit->add_option("--generated", audit_args.generated,
                    "generated examples file (optional)");
  audit->add_option("--format", audit_args.format, "jsonl or tsv")
      ->capture_default_str();
  audit->add_option("--task", audit_args.task, "task name for reports")
      ->capture_default_str();
  audit->add_option("--metrics", audit_args.metrics,
                    "embed, tfidf, overlap (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  audit->add_option("--embedder", audit_args.embedder, "hash or provider")
      ->capture_default_str();
  audit->add_option("--stopwords", audit_args.stopwords, "stop-word list")
      ->required();
  audit->add_option("--embed-batch", audit_args.embed_batch,
                    "texts per embedding request")
      ->capture_default_str();
  audit->add_option("--jobs", audit_args.jobs, "worker threads")
      ->capture_default_str();
  audit->add_option("--replay-mode", audit_args.replay_mode,
                    "record, replay, or passthrough");
  audit->add_option("--cassette", audit_args.cassette,
                    "provider cassette JSONL");
  audit->add_option("--out-dir", audit_args.out_dir, "report directory")
      ->required();
  audit->callback([&] { exit_code = cmd_audit(audit_args, args); });

  BenchArgs bench_args;
  auto* bench = app.add_subcommand(
      "bench", "seeded low-resource augmentation benchmark");
  bench->add_option("--train", bench_args.train, "training examples file")
      ->required();
  bench->add_option("--dev", bench_args.dev, "development examples file");
  bench->add_option("--test", bench_args.test, "test examples file")->required();
  bench->add_option("--format", bench_args.format, "jsonl or tsv")
      ->capture_default_str();
  bench->add_option("--task", bench_args.task, "task name for reports")
      ->capture_default_str();
  bench->add_option("--method", bench_args.methods,
                    "augmentation methods (comma separated)")
      ->delimiter(',');
  bench->add_option("--k", bench_args.recipe.k, "generated per original example")
      ->capture_default_str();
  bench->add_option("--alpha", bench_args.recipe.alpha, "EDA intensity")
      ->capture_default_str();
  bench->add_option("--prompts", bench_args.recipe.prompts,
                    "prompt catalog JSON (LLM methods)");
  bench->add_option("--pivots", bench_args.recipe.pivots,
                    "pivot language codes (backtrans)")
      ->delimiter(',');
  bench->add_option("--seed", bench_args.recipe.seed, "recipe seed")
      ->capture_default_str();
  bench->add_option("--per-call", bench_args.recipe.per_call,
                    "sentences requested per chat call")
      ->capture_default_str();
  bench->add_option("--thesaurus", bench_args.thesaurus,
                    "synonym table JSON (eda)");
  bench->add_option("--stopwords", bench_args.stopwords, "stop-word list (eda)");
  bench->add_option("--per-class", bench_args.per_class,
                    "training examples kept per class")
      ->capture_default_str();
  bench->add_option("--reps", bench_args.reps, "repetitions per cell")
      ->capture_default_str();
  bench->add_option("--base-seed", bench_args.base_seed,
                    "base seed; repetition r uses base+r")
      ->capture_default_str();
  bench->add_option("--epochs", bench_args.epochs, "training epochs")
      ->capture_default_str();
  bench->add_option("--lr,--learning-rate", bench_args.learning_rate,
                    "gradient-descent step size")
      ->capture_default_str();
  bench->add_option("--l2", bench_args.l2, "L2 penalty")->capture_default_str();
  bench->add_option("--sweep-k", bench_args.sweep_k,
                    "K values to sweep (comma separated)")
      ->delimiter(',');
  bench->add_flag("--no-train-data", bench_args.no_train_data,
                  "train on generated examples only");
  bench->add_option("--gen-per-class", bench_args.gen_per_class,
                    "generated examples per class for --no-train-data")
      ->capture_default_str();
  bench->add_option("--replay-mode", bench_args.replay_mode,
                    "record, replay, or passthrough");
  bench->add_option("--cassette", bench_args.cassette,
                    "provider cassette JSONL");
  bench->add_option("--out-dir", bench_args.out_dir, "result directory")
      ->required();
  bench->callback([&] { exit_code = cmd_bench(bench_args, args); });

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand(
      "ingest", "convert a published dataset to the JSONL schema");
  ingest->add_option("--task", ingest_args.task, "snips, trec, or sst2")
      ->required();
  ingest->add_option("--in", ingest_args.in, "source file or directory")
      ->required();
  ingest->add_option("--split", ingest_args.split,
                     "split being ingested (train or test)")
      ->capture_default_str();
  ingest->add_option("--out", ingest_args.out, "output JSONL file")->required();
  ingest->callback([&] { exit_code = cmd_ingest(ingest_args, args); });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (!from_manifest.empty()) {
    try {
      return rerun_from_manifest(from_manifest);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  return exit_code;
}

}  // namespace textaug::cli
