#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "textaug/augment.hpp"
#include "textaug/error.hpp"
#include "textaug/evalbench.hpp"
#include "textaug/providers.hpp"
#include "textaug/rng.hpp"
#include "textaug/strings.hpp"
#include "textaug/textkit.hpp"

#include "support/mock_provider_server.hpp"
#include "support/paths.hpp"

using namespace textaug;
using corpus::DatasetBundle;
using corpus::LabeledExample;
using evalbench::BenchOptions;
using evalbench::ClassifierModel;
using evalbench::ExperimentResult;
using evalbench::TrainConfig;
using providers::Cassette;
using providers::ReplayMode;
using providers::ServiceClient;
using testsupport::MockProviderServer;
using testsupport::TempDir;
using textkit::SparseVector;

namespace {

LabeledExample example(const std::string& id, const std::string& text,
                       const std::string& label) {
  LabeledExample e;
  e.id = id;
  e.text = text;
  e.label = label;
  return e;
}

// Two classes with disjoint vocabularies, trivially separable.
DatasetBundle separable_bundle(std::size_t train_per_class,
                               std::size_t dev_per_class,
                               std::size_t test_per_class) {
  const std::vector<std::string> pos_words = {"wonderful", "delight", "joy",
                                              "superb", "charming"};
  const std::vector<std::string> neg_words = {"awful", "dreary", "pain",
                                              "tedious", "grim"};
  auto text_for = [](const std::vector<std::string>& words, std::size_t i) {
    return words[i % words.size()] + " " + words[(i + 1) % words.size()] +
           " " + words[(i + 2) % words.size()];
  };
  DatasetBundle bundle;
  bundle.task_name = "toy";
  bundle.labels = {"neg", "pos"};
  auto fill = [&](std::vector<LabeledExample>& split, const std::string& stem,
                  std::size_t per_class) {
    for (std::size_t i = 0; i < per_class; ++i) {
      split.push_back(example(stem + "-pos-" + std::to_string(i),
                              text_for(pos_words, i), "pos"));
      split.push_back(example(stem + "-neg-" + std::to_string(i),
                              text_for(neg_words, i), "neg"));
    }
  };
  fill(bundle.train, "train", train_per_class);
  fill(bundle.dev, "dev", dev_per_class);
  fill(bundle.test, "test", test_per_class);
  return bundle;
}

textkit::TfIdfModel fit_model_for(const std::vector<LabeledExample>& examples) {
  std::vector<textkit::TokenList> docs;
  for (const auto& e : examples) docs.push_back(textkit::tokenize(e.text));
  return textkit::fit_tfidf(docs);
}

double loss_at(const std::vector<double>& weights,
               const std::vector<double>& bias,
               const std::vector<SparseVector>& features,
               const std::vector<std::size_t>& labels, std::size_t classes,
               std::size_t feats, double l2) {
  return evalbench::cross_entropy_loss_grad(weights, bias, features, labels,
                                            classes, feats, l2)
      .loss;
}

providers::ProviderConfig server_config(const MockProviderServer& server) {
  providers::ProviderConfig config;
  config.base_url = server.base_url();
  config.api_key = "test-key";
  config.requests_per_second = 0.0;
  config.sleep = [](std::chrono::milliseconds) {};
  config.timestamp = [] { return std::string("2024-01-01T00:00:00Z"); };
  return config;
}

// Pure function of the prompt so repeated runs see identical responses:
// emits N lines of class-specific vocabulary for "... labelled <label>".
std::string class_vocab_chat(const std::string& prompt) {
  const auto digits = prompt.find_first_of("0123456789");
  REQUIRE(digits != std::string::npos);
  const std::size_t n = std::stoul(prompt.substr(digits));
  const auto tail = prompt.rfind(' ');
  const std::string label = prompt.substr(tail + 1);
  const std::string words = label == "pos"
                                ? "wonderful delight joy superb charming"
                                : "awful dreary pain tedious grim";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(i + 1) + ". " + words + " sample " +
           label + std::to_string(i) + "\n";
  }
  return out;
}

augment::PromptTemplate zero_shot_template(const std::string& label) {
  augment::PromptTemplate tmpl;
  tmpl.id = label + "-gen";
  tmpl.label = label;
  tmpl.text = "Generate {n} sentences labelled " + label;
  tmpl.mode = augment::PromptMode::kZeroShotClass;
  return tmpl;
}

}  // namespace

TEST_CASE("aggregate computes mean and both standard deviations") {
  const auto result =
      evalbench::aggregate("task", "method", 2, {0.5, 0.7});
  CHECK(result.task == "task");
  CHECK(result.method == "method");
  CHECK(result.k == 2);
  CHECK(result.mean == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(result.std_dev == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(result.std_sample ==
        doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));

  const auto single = evalbench::aggregate("t", "m", 1, {0.8});
  CHECK(single.mean == doctest::Approx(0.8));
  CHECK(single.std_dev == 0.0);
  CHECK(single.std_sample == 0.0);

  const auto empty = evalbench::aggregate("t", "m", 0, {});
  CHECK(empty.mean == 0.0);
  CHECK(empty.per_rep_accuracy.empty());
}

TEST_CASE("softmax is a shift-invariant distribution") {
  Pcg32 rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.bounded(7);
    std::vector<double> logits(n);
    for (double& v : logits) v = (rng.next_double() - 0.5) * 100.0;
    const auto probs = evalbench::softmax(logits);
    double sum = 0.0;
    for (double p : probs) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<double> shifted = logits;
    for (double& v : shifted) v += 123.0;
    const auto probs_shifted = evalbench::softmax(shifted);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(probs_shifted[i] == doctest::Approx(probs[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("softmax handles uniform, extreme, and empty inputs") {
  const auto uniform = evalbench::softmax({3.0, 3.0, 3.0, 3.0});
  for (double p : uniform) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));

  const auto extreme = evalbench::softmax({1000.0, 0.0});
  CHECK(extreme[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(extreme[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::isfinite(extreme[0]));

  CHECK(evalbench::softmax({}).empty());
}

TEST_CASE("loss at zero weights is log of the class count") {
  for (std::size_t classes = 2; classes <= 5; ++classes) {
    std::vector<SparseVector> features(3);
    features[0].entries = {{0, 0.5}};
    features[1].entries = {{1, 1.0}};
    features[2].entries = {{0, 0.3}, {1, 0.4}};
    const std::vector<std::size_t> labels = {0, classes - 1, 0};
    const std::vector<double> weights(classes * 2, 0.0);
    const std::vector<double> bias(classes, 0.0);
    const double loss =
        loss_at(weights, bias, features, labels, classes, 2, 0.0);
    CHECK(loss ==
          doctest::Approx(std::log(static_cast<double>(classes)))
              .epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Pcg32 rng(2024);
  const double h = 1e-5;
  for (int model_i = 0; model_i < 100; ++model_i) {
    CAPTURE(model_i);
    const std::size_t classes = 2 + rng.bounded(3);
    const std::size_t feats = 3 + rng.bounded(6);
    const std::size_t examples = 2 + rng.bounded(4);
    const double l2 = (model_i % 2 == 0) ? 0.0 : 0.1;

    std::vector<SparseVector> features(examples);
    std::vector<std::size_t> labels(examples);
    for (std::size_t i = 0; i < examples; ++i) {
      const std::size_t nnz = 1 + rng.bounded(static_cast<std::uint32_t>(feats));
      std::vector<std::uint32_t> idx(feats);
      for (std::size_t j = 0; j < feats; ++j) idx[j] = static_cast<std::uint32_t>(j);
      rng.shuffle(idx);
      idx.resize(nnz);
      std::sort(idx.begin(), idx.end());
      for (const auto f : idx) {
        features[i].entries.emplace_back(f, 0.1 + rng.next_double());
      }
      labels[i] = rng.bounded(static_cast<std::uint32_t>(classes));
    }
    std::vector<double> weights(classes * feats);
    for (double& w : weights) w = (rng.next_double() - 0.5) * 2.0;
    std::vector<double> bias(classes);
    for (double& b : bias) b = (rng.next_double() - 0.5) * 2.0;

    const auto lg = evalbench::cross_entropy_loss_grad(
        weights, bias, features, labels, classes, feats, l2);

    for (std::size_t j = 0; j < weights.size(); ++j) {
      auto plus = weights;
      auto minus = weights;
      plus[j] += h;
      minus[j] -= h;
      const double fd =
          (loss_at(plus, bias, features, labels, classes, feats, l2) -
           loss_at(minus, bias, features, labels, classes, feats, l2)) /
          (2.0 * h);
      CHECK(lg.grad_weights[j] ==
            doctest::Approx(fd).epsilon(1e-4).scale(1.0));
    }
    for (std::size_t c = 0; c < classes; ++c) {
      auto plus = bias;
      auto minus = bias;
      plus[c] += h;
      minus[c] -= h;
      const double fd =
          (loss_at(weights, plus, features, labels, classes, feats, l2) -
           loss_at(weights, minus, features, labels, classes, feats, l2)) /
          (2.0 * h);
      CHECK(lg.grad_bias[c] == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("loss/grad rejects empty and mismatched inputs") {
  CHECK_THROWS_AS(
      evalbench::cross_entropy_loss_grad({}, {}, {}, {}, 2, 2, 0.0), Error);
  std::vector<SparseVector> features(2);
  CHECK_THROWS_AS(evalbench::cross_entropy_loss_grad(
                      std::vector<double>(4, 0.0), std::vector<double>(2, 0.0),
                      features, {0}, 2, 2, 0.0),
                  Error);
}

TEST_CASE("training separates a toy task perfectly") {
  const auto bundle = separable_bundle(8, 2, 4);
  const auto feature_model = fit_model_for(bundle.train);
  TrainConfig config;
  const auto model = evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                      feature_model, config);
  CHECK(evalbench::evaluate(model, bundle.train) == doctest::Approx(1.0));
  CHECK(evalbench::evaluate(model, bundle.test) == doctest::Approx(1.0));
}

TEST_CASE("zero epochs yields uniform predictions and first-label ties") {
  const auto bundle = separable_bundle(4, 0, 2);
  const auto feature_model = fit_model_for(bundle.train);
  TrainConfig config;
  config.epochs = 0;
  const auto model = evalbench::train(bundle.train, {}, bundle.labels,
                                      feature_model, config);
  for (double w : model.weights) CHECK(w == 0.0);
  const auto [label, probs] = evalbench::predict(model, bundle.test[0]);
  CHECK(label == bundle.labels[0]);
  for (double p : probs) CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("training is bit-for-bit deterministic") {
  const auto bundle = separable_bundle(6, 2, 2);
  const auto feature_model = fit_model_for(bundle.train);
  TrainConfig config;
  config.epochs = 50;
  const auto a = evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                  feature_model, config);
  const auto b = evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                  feature_model, config);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("a small learning rate drives the loss monotonically down") {
  const auto bundle = separable_bundle(6, 0, 2);
  const auto feature_model = fit_model_for(bundle.train);
  TrainConfig config;
  config.epochs = 100;
  config.learning_rate = 1e-3;
  config.early_stop_on_dev = false;
  std::vector<double> history;
  evalbench::train(bundle.train, {}, bundle.labels, feature_model, config,
                   &history);
  REQUIRE(history.size() == 100);
  for (std::size_t i = 1; i < history.size(); ++i) {
    CAPTURE(i);
    CHECK(history[i] <= history[i - 1] + 1e-12);
  }
}

TEST_CASE("dev selection never returns a worse dev checkpoint") {
  const auto bundle = separable_bundle(6, 3, 2);
  const auto feature_model = fit_model_for(bundle.train);
  TrainConfig with_selection;
  with_selection.epochs = 40;
  TrainConfig without_selection = with_selection;
  without_selection.early_stop_on_dev = false;
  const auto best = evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                     feature_model, with_selection);
  const auto last = evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                     feature_model, without_selection);
  CHECK(evalbench::evaluate(best, bundle.dev) >=
        evalbench::evaluate(last, bundle.dev));
}

TEST_CASE("training rejects bad configurations and label gaps") {
  const auto bundle = separable_bundle(4, 1, 1);
  const auto feature_model = fit_model_for(bundle.train);

  TrainConfig bad_lr;
  bad_lr.learning_rate = 0.0;
  CHECK_THROWS_AS(evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                   feature_model, bad_lr),
                  ConfigError);

  TrainConfig bad_l2;
  bad_l2.l2 = -1.0;
  CHECK_THROWS_AS(evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                   feature_model, bad_l2),
                  ConfigError);

  TrainConfig config;
  CHECK_THROWS_AS(
      evalbench::train(bundle.train, bundle.dev, {}, feature_model, config),
      Error);
  CHECK_THROWS_WITH_AS(
      evalbench::train(bundle.train, bundle.dev, {"neg", "pos", "ghost"},
                       feature_model, config),
      doctest::Contains("'ghost' has no training examples"), Error);

  auto stray_dev = bundle.dev;
  stray_dev[0].label = "mystery";
  CHECK_THROWS_WITH_AS(
      evalbench::train(bundle.train, stray_dev, bundle.labels, feature_model,
                       config),
      doctest::Contains("label outside the label inventory"), Error);
}

TEST_CASE("evaluation recounts argmax matches") {
  const auto bundle = separable_bundle(6, 2, 4);
  const auto feature_model = fit_model_for(bundle.train);
  const auto model = evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                      feature_model, TrainConfig{});

  CHECK(evalbench::evaluate(model, bundle.test) == doctest::Approx(1.0));

  auto flipped = bundle.test;
  for (auto& e : flipped) e.label = e.label == "pos" ? "neg" : "pos";
  CHECK(evalbench::evaluate(model, flipped) == doctest::Approx(0.0));

  CHECK_THROWS_AS(evalbench::evaluate(model, {}), Error);
}

TEST_CASE("predicted probabilities agree with the predicted label") {
  const auto bundle = separable_bundle(6, 2, 2);
  const auto feature_model = fit_model_for(bundle.train);
  const auto model = evalbench::train(bundle.train, bundle.dev, bundle.labels,
                                      feature_model, TrainConfig{});
  for (const auto& e : bundle.test) {
    const auto [label, probs] = evalbench::predict(model, e);
    REQUIRE(probs.size() == bundle.labels.size());
    const auto best =
        std::max_element(probs.begin(), probs.end()) - probs.begin();
    CHECK(model.label_order[static_cast<std::size_t>(best)] == label);
    double sum = 0.0;
    for (double p : probs) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("the no-augmentation baseline is deterministic and labeled no-aug") {
  const auto bundle = separable_bundle(8, 4, 4);
  BenchOptions options;
  options.per_class = 4;
  options.repetitions = 3;
  options.base_seed = 5;

  const auto a = evalbench::run_experiment(bundle, std::nullopt, TrainConfig{},
                                           options, {});
  CHECK(a.task == "toy");
  CHECK(a.method == "no-aug");
  CHECK(a.k == 0);
  REQUIRE(a.per_rep_accuracy.size() == 3);
  CHECK(a.mean == doctest::Approx(1.0));
  CHECK(a.std_dev == doctest::Approx(0.0));

  const auto b = evalbench::run_experiment(bundle, std::nullopt, TrainConfig{},
                                           options, {});
  CHECK(a.per_rep_accuracy == b.per_rep_accuracy);
}

TEST_CASE("an eda recipe reports its method and k") {
  const auto bundle = separable_bundle(6, 3, 3);
  const augment::Thesaurus thesaurus = {{"wonderful", {"marvelous"}},
                                        {"awful", {"horrid"}}};
  const textkit::Stoplist stoplist;
  augment::AugmentEnv env;
  env.thesaurus = &thesaurus;
  env.stoplist = &stoplist;

  augment::AugmentationRecipe recipe;
  recipe.method = augment::AugmentMethod::kEda;
  recipe.k = 2;
  recipe.eda = augment::EdaParams{};

  BenchOptions options;
  options.per_class = 3;
  options.repetitions = 2;

  const auto result = evalbench::run_experiment(bundle, recipe, TrainConfig{},
                                                options, env);
  CHECK(result.method == "eda");
  CHECK(result.k == 2);
  REQUIRE(result.per_rep_accuracy.size() == 2);

  const auto again = evalbench::run_experiment(bundle, recipe, TrainConfig{},
                                               options, env);
  CHECK(result.per_rep_accuracy == again.per_rep_accuracy);
}

TEST_CASE("experiment failures report the repetition") {
  auto bundle = separable_bundle(4, 2, 2);
  bundle.labels.push_back("ghost");
  CHECK_THROWS_WITH_AS(
      evalbench::run_experiment(bundle, std::nullopt, TrainConfig{},
                                BenchOptions{}, {}),
      doctest::Contains("repetition 0"), Error);
}

TEST_CASE("a k sweep validates every cell up front") {
  const auto bundle = separable_bundle(4, 2, 2);
  augment::AugmentationRecipe recipe;
  recipe.method = augment::AugmentMethod::kBackTranslation;
  recipe.pivot_langs = {"de", "fr"};
  CHECK_THROWS_AS(
      evalbench::sweep_k(bundle, {{"back-translation", recipe}}, {1, 2, 4},
                         TrainConfig{}, BenchOptions{}, {}),
      ConfigError);
}

TEST_CASE("a k sweep produces one result per method and k") {
  const auto bundle = separable_bundle(6, 3, 3);
  const augment::Thesaurus thesaurus = {{"wonderful", {"marvelous"}},
                                        {"awful", {"horrid"}}};
  const textkit::Stoplist stoplist;
  augment::AugmentEnv env;
  env.thesaurus = &thesaurus;
  env.stoplist = &stoplist;

  augment::AugmentationRecipe eda_a;
  eda_a.method = augment::AugmentMethod::kEda;
  eda_a.eda = augment::EdaParams{};
  augment::AugmentationRecipe eda_b = eda_a;
  eda_b.eda->alpha = 0.2;

  BenchOptions options;
  options.per_class = 3;
  options.repetitions = 1;

  const auto results = evalbench::sweep_k(
      bundle, {{"eda-0.1", eda_a}, {"eda-0.2", eda_b}}, {1, 2, 4},
      TrainConfig{}, options, env);
  REQUIRE(results.size() == 6);
  const std::vector<std::string> methods = {"eda-0.1", "eda-0.1", "eda-0.1",
                                            "eda-0.2", "eda-0.2", "eda-0.2"};
  const std::vector<std::size_t> ks = {1, 2, 4, 1, 2, 4};
  for (std::size_t i = 0; i < results.size(); ++i) {
    CAPTURE(i);
    CHECK(results[i].method == methods[i]);
    CHECK(results[i].k == ks[i]);
    CHECK(results[i].per_rep_accuracy.size() == 1);
    CHECK(results[i].std_sample == 0.0);
  }
}

TEST_CASE("the no-training-data scenario learns from generated text alone") {
  MockProviderServer server;
  server.on_chat(class_vocab_chat);
  Cassette cassette;
  ServiceClient client(server_config(server), ReplayMode::kRecord, &cassette);
  augment::AugmentEnv env;
  env.client = &client;

  auto bundle = separable_bundle(0, 0, 5);
  bundle.train.clear();
  bundle.dev.clear();

  augment::AugmentationRecipe recipe;
  recipe.method = augment::AugmentMethod::kLlmZeroShot;
  recipe.prompts = {zero_shot_template("neg"), zero_shot_template("pos")};

  BenchOptions options;
  options.repetitions = 2;

  const auto result = evalbench::run_no_train_scenario(
      bundle, recipe, 8, TrainConfig{}, options, env);
  CHECK(result.method == "llm-zero-shot");
  CHECK(result.k == 8);
  REQUIRE(result.per_rep_accuracy.size() == 2);
  // Generated pos/neg texts reuse the test vocabulary, so the task is
  // learnable from synthetic data alone.
  CHECK(result.mean == doctest::Approx(1.0));
  CHECK(result.std_dev == doctest::Approx(0.0));
}

TEST_CASE("the no-training-data scenario rejects other methods and zeros") {
  const auto bundle = separable_bundle(2, 1, 1);
  augment::AugmentationRecipe recipe;
  recipe.method = augment::AugmentMethod::kEda;
  recipe.eda = augment::EdaParams{};
  CHECK_THROWS_AS(evalbench::run_no_train_scenario(bundle, recipe, 8,
                                                   TrainConfig{},
                                                   BenchOptions{}, {}),
                  ConfigError);

  recipe.method = augment::AugmentMethod::kLlmZeroShot;
  recipe.prompts = {zero_shot_template("neg"), zero_shot_template("pos")};
  CHECK_THROWS_AS(evalbench::run_no_train_scenario(bundle, recipe, 8,
                                                   TrainConfig{},
                                                   BenchOptions{}, {}),
                  ConfigError);

  MockProviderServer server;
  Cassette cassette;
  ServiceClient client(server_config(server), ReplayMode::kRecord, &cassette);
  augment::AugmentEnv env;
  env.client = &client;
  CHECK_THROWS_AS(evalbench::run_no_train_scenario(bundle, recipe, 0,
                                                   TrainConfig{},
                                                   BenchOptions{}, env),
                  ConfigError);
}

TEST_CASE("result writers emit the documented csv schemas") {
  TempDir dir;
  const auto result = evalbench::aggregate("t", "m", 2, {0.5, 0.7});

  evalbench::write_per_rep_csv({result}, dir / "per_rep.csv");
  const auto per_rep = testsupport::read_file(dir / "per_rep.csv");
  CHECK(per_rep ==
        "task,method,K,rep,accuracy\n"
        "t,m,2,0,0.5\n"
        "t,m,2,1,0.7\n");

  evalbench::write_aggregate_csv({result}, dir / "aggregate.csv");
  const auto aggregate_csv = testsupport::read_file(dir / "aggregate.csv");
  CHECK(aggregate_csv.rfind("task,method,K,mean,std,std_sample,n\n", 0) == 0);
  CHECK(aggregate_csv.find("t,m,2,0.6,0.1,0.141421356237,2\n") !=
        std::string::npos);

  evalbench::write_sweep_csv({result}, dir / "sweep.csv");
  const auto sweep = testsupport::read_file(dir / "sweep.csv");
  CHECK(sweep ==
        "method,K,mean,std\n"
        "m,2,0.6,0.1\n");

  evalbench::write_markdown_report({result}, dir / "report.md");
  const auto report = testsupport::read_file(dir / "report.md");
  CHECK(report.find("| task | method | K | accuracy | reps |") !=
        std::string::npos);
  CHECK(report.find("| t | m | 2 | 0.600 (0.100) | 2 |") != std::string::npos);

  CHECK_THROWS_WITH_AS(
      evalbench::write_per_rep_csv({result}, dir / "absent" / "x.csv"),
      doctest::Contains("cannot write"), Error);
}
