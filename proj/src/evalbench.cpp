#include "textaug/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "textaug/error.hpp"
#include "textaug/rng.hpp"

namespace textaug::evalbench {

using corpus::DatasetBundle;
using corpus::LabeledExample;

ExperimentResult aggregate(std::string task, std::string method, std::size_t k,
                           std::vector<double> per_rep_accuracy) {
  ExperimentResult result;
  result.task = std::move(task);
  result.method = std::move(method);
  result.k = k;
  result.per_rep_accuracy = std::move(per_rep_accuracy);
  const std::size_t n = result.per_rep_accuracy.size();
  if (n == 0) return result;
  double sum = 0.0;
  for (double a : result.per_rep_accuracy) sum += a;
  result.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double a : result.per_rep_accuracy) {
    const double d = a - result.mean;
    sq += d * d;
  }
  result.std_dev = std::sqrt(sq / static_cast<double>(n));
  result.std_sample =
      n >= 2 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
  return result;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  std::vector<double> probs(logits.size());
  if (logits.empty()) return probs;
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

namespace {

std::vector<double> logits_of(const std::vector<double>& weights,
                              const std::vector<double>& bias,
                              const textkit::SparseVector& x,
                              std::size_t num_classes,
                              std::size_t num_features) {
  std::vector<double> logits(bias);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double* row = weights.data() + c * num_features;
    double dot = 0.0;
    for (const auto& [f, v] : x.entries) dot += row[f] * v;
    logits[c] += dot;
  }
  return logits;
}

std::size_t argmax_lowest(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace

LossGrad cross_entropy_loss_grad(const std::vector<double>& weights,
                                 const std::vector<double>& bias,
                                 const std::vector<textkit::SparseVector>& features,
                                 const std::vector<std::size_t>& label_idx,
                                 std::size_t num_classes,
                                 std::size_t num_features, double l2) {
  if (features.size() != label_idx.size()) {
    throw Error("feature/label count mismatch");
  }
  if (features.empty()) throw Error("loss requires at least one example");

  LossGrad out;
  out.grad_weights.assign(num_classes * num_features, 0.0);
  out.grad_bias.assign(num_classes, 0.0);

  const double inv_n = 1.0 / static_cast<double>(features.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto logits =
        logits_of(weights, bias, features[i], num_classes, num_features);
    const auto probs = softmax(logits);
    const std::size_t y = label_idx[i];
    loss -= std::log(std::max(probs[y], 1e-300));
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double delta = (probs[c] - (c == y ? 1.0 : 0.0)) * inv_n;
      out.grad_bias[c] += delta;
      double* row = out.grad_weights.data() + c * num_features;
      for (const auto& [f, v] : features[i].entries) row[f] += delta * v;
    }
  }
  loss *= inv_n;

  if (l2 > 0.0) {
    double sq = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      sq += weights[j] * weights[j];
      out.grad_weights[j] += l2 * weights[j];
    }
    loss += 0.5 * l2 * sq;
  }
  out.loss = loss;
  return out;
}

namespace {

std::vector<std::size_t> map_labels(const std::vector<LabeledExample>& examples,
                                    const std::unordered_map<std::string, std::size_t>& index,
                                    const char* split) {
  std::vector<std::size_t> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    const auto it = index.find(e.label);
    if (it == index.end()) {
      throw Error(std::string(split) + " example '" + e.id +
                  "' has a label outside the label inventory: '" + e.label +
                  "'");
    }
    out.push_back(it->second);
  }
  return out;
}

double accuracy_of(const std::vector<double>& weights,
                   const std::vector<double>& bias,
                   const std::vector<textkit::SparseVector>& features,
                   const std::vector<std::size_t>& label_idx,
                   std::size_t num_classes, std::size_t num_features) {
  if (features.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto logits =
        logits_of(weights, bias, features[i], num_classes, num_features);
    if (argmax_lowest(logits) == label_idx[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.size());
}

}  // namespace

ClassifierModel train(const std::vector<LabeledExample>& train_set,
                      const std::vector<LabeledExample>& dev_set,
                      const std::vector<std::string>& labels,
                      const textkit::TfIdfModel& feature_model,
                      const TrainConfig& config,
                      std::vector<double>* loss_history) {
  if (labels.empty()) throw Error("training requires a label inventory");
  if (config.learning_rate <= 0.0) {
    throw ConfigError("learning rate must be positive");
  }
  if (config.l2 < 0.0) throw ConfigError("l2 penalty must be non-negative");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);
  if (index.size() != labels.size()) throw Error("duplicate labels");

  const auto train_labels = map_labels(train_set, index, "train");
  const auto dev_labels = map_labels(dev_set, index, "dev");

  std::vector<std::size_t> per_class(labels.size(), 0);
  for (std::size_t y : train_labels) ++per_class[y];
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (per_class[c] == 0) {
      throw Error("class '" + labels[c] + "' has no training examples");
    }
  }

  ClassifierModel model;
  model.num_classes = labels.size();
  model.num_features = feature_model.vocabulary.size();
  model.weights.assign(model.num_classes * model.num_features, 0.0);
  model.bias.assign(model.num_classes, 0.0);
  model.feature_model = feature_model;
  model.label_order = labels;

  std::vector<textkit::SparseVector> train_x;
  train_x.reserve(train_set.size());
  for (const auto& e : train_set) {
    train_x.push_back(textkit::transform(feature_model, textkit::tokenize(e.text)));
  }
  std::vector<textkit::SparseVector> dev_x;
  dev_x.reserve(dev_set.size());
  for (const auto& e : dev_set) {
    dev_x.push_back(textkit::transform(feature_model, textkit::tokenize(e.text)));
  }

  const bool select_on_dev = config.early_stop_on_dev && !dev_set.empty();
  std::vector<double> best_weights;
  std::vector<double> best_bias;
  double best_dev_accuracy = -1.0;

  LossGrad lg = cross_entropy_loss_grad(model.weights, model.bias, train_x,
                                        train_labels, model.num_classes,
                                        model.num_features, config.l2);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
      model.weights[j] -= config.learning_rate * lg.grad_weights[j];
    }
    for (std::size_t c = 0; c < model.num_classes; ++c) {
      model.bias[c] -= config.learning_rate * lg.grad_bias[c];
    }
    lg = cross_entropy_loss_grad(model.weights, model.bias, train_x,
                                 train_labels, model.num_classes,
                                 model.num_features, config.l2);
    if (!std::isfinite(lg.loss)) {
      throw Error("training diverged: non-finite loss at epoch " +
                  std::to_string(epoch + 1));
    }
    if (loss_history) loss_history->push_back(lg.loss);
    if (select_on_dev) {
      const double acc =
          accuracy_of(model.weights, model.bias, dev_x, dev_labels,
                      model.num_classes, model.num_features);
      if (acc > best_dev_accuracy) {
        best_dev_accuracy = acc;
        best_weights = model.weights;
        best_bias = model.bias;
      }
    }
  }

  if (select_on_dev && best_dev_accuracy >= 0.0) {
    model.weights = std::move(best_weights);
    model.bias = std::move(best_bias);
  }
  return model;
}

std::pair<std::string, std::vector<double>> predict(
    const ClassifierModel& model, const LabeledExample& example) {
  const auto x =
      textkit::transform(model.feature_model, textkit::tokenize(example.text));
  const auto logits = logits_of(model.weights, model.bias, x,
                                model.num_classes, model.num_features);
  const auto probs = softmax(logits);
  return {model.label_order[argmax_lowest(probs)], probs};
}

double evaluate(const ClassifierModel& model,
                const std::vector<LabeledExample>& test_set) {
  if (test_set.empty()) throw Error("evaluation requires a non-empty test set");
  std::size_t correct = 0;
  for (const auto& e : test_set) {
    if (predict(model, e).first == e.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

namespace {

textkit::TfIdfModel fit_features(const std::vector<LabeledExample>& examples) {
  std::vector<textkit::TokenList> docs;
  docs.reserve(examples.size());
  for (const auto& e : examples) docs.push_back(textkit::tokenize(e.text));
  return textkit::fit_tfidf(docs);
}

}  // namespace

ExperimentResult run_experiment(const DatasetBundle& bundle,
                                const std::optional<augment::AugmentationRecipe>& recipe,
                                const TrainConfig& config,
                                const BenchOptions& options,
                                const augment::AugmentEnv& env) {
  if (recipe) recipe->validate();
  std::vector<double> accuracies;
  accuracies.reserve(options.repetitions);
  for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
    try {
      corpus::SubsampleSpec spec;
      spec.per_class = options.per_class;
      spec.seed = options.base_seed + rep;
      const DatasetBundle sub = corpus::subsample(bundle, spec);

      std::vector<LabeledExample> train_set = sub.train;
      if (recipe) {
        augment::AugmentationRecipe rep_recipe = *recipe;
        rep_recipe.seed = recipe->seed + rep;
        auto generated =
            augment::apply_recipe(sub.train, bundle.labels, rep_recipe, env);
        for (auto& e : generated) train_set.push_back(std::move(e));
      }

      const auto feature_model = fit_features(train_set);
      const auto model =
          train(train_set, sub.dev, bundle.labels, feature_model, config);
      accuracies.push_back(evaluate(model, bundle.test));
    } catch (const Error& e) {
      throw Error("repetition " + std::to_string(rep) + ": " + e.what());
    }
  }
  return aggregate(bundle.task_name,
                   recipe ? augment::method_name(recipe->method) : "no-aug",
                   recipe ? recipe->k : 0, std::move(accuracies));
}

std::vector<ExperimentResult> sweep_k(
    const DatasetBundle& bundle,
    const std::vector<std::pair<std::string, augment::AugmentationRecipe>>& recipes,
    const std::vector<std::size_t>& ks, const TrainConfig& config,
    const BenchOptions& options, const augment::AugmentEnv& env) {
  // Every (method, K) must be valid before the first repetition runs.
  std::vector<std::pair<std::string, augment::AugmentationRecipe>> cells;
  for (const auto& [name, recipe] : recipes) {
    for (const std::size_t k : ks) {
      augment::AugmentationRecipe cell = recipe;
      cell.k = k;
      cell.validate();
      cells.emplace_back(name, std::move(cell));
    }
  }
  std::vector<ExperimentResult> results;
  results.reserve(cells.size());
  for (const auto& [name, cell] : cells) {
    ExperimentResult result = run_experiment(bundle, cell, config, options, env);
    result.method = name;
    results.push_back(std::move(result));
  }
  return results;
}

ExperimentResult run_no_train_scenario(const DatasetBundle& bundle,
                                       const augment::AugmentationRecipe& recipe,
                                       std::size_t per_class_generated,
                                       const TrainConfig& config,
                                       const BenchOptions& options,
                                       const augment::AugmentEnv& env) {
  if (recipe.method != augment::AugmentMethod::kLlmZeroShot) {
    throw ConfigError("the no-training-data scenario requires llm-zero-shot");
  }
  if (!env.client) throw ConfigError("llm-zero-shot requires a provider client");
  if (per_class_generated == 0) {
    throw ConfigError("per-class generation count must be positive");
  }

  std::vector<double> accuracies;
  accuracies.reserve(options.repetitions);
  for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
    try {
      augment::AugmentationRecipe rep_recipe = recipe;
      rep_recipe.seed = recipe.seed + rep;
      const auto generated = augment::llm_zero_shot(
          rep_recipe, bundle.labels, per_class_generated, *env.client);
      for (const auto& e : generated) {
        if (e.provenance.kind != corpus::ProvenanceKind::kGenerated) {
          throw Error("original example '" + e.id +
                      "' leaked into the no-training-data scenario");
        }
      }

      // Per-class 75/25 train/dev split of the generated pool, seeded.
      std::vector<LabeledExample> train_set;
      std::vector<LabeledExample> dev_set;
      Pcg32 rng(options.base_seed + rep);
      for (const auto& label : bundle.labels) {
        std::vector<std::size_t> indices;
        for (std::size_t i = 0; i < generated.size(); ++i) {
          if (generated[i].label == label) indices.push_back(i);
        }
        rng.shuffle(indices);
        const std::size_t dev_count = indices.size() / 4;
        const std::size_t train_count = indices.size() - dev_count;
        std::sort(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(train_count));
        std::sort(indices.begin() + static_cast<std::ptrdiff_t>(train_count), indices.end());
        for (std::size_t i = 0; i < indices.size(); ++i) {
          (i < train_count ? train_set : dev_set).push_back(generated[indices[i]]);
        }
      }

      const auto feature_model = fit_features(train_set);
      const auto model =
          train(train_set, dev_set, bundle.labels, feature_model, config);
      accuracies.push_back(evaluate(model, bundle.test));
    } catch (const Error& e) {
      throw Error("repetition " + std::to_string(rep) + ": " + e.what());
    }
  }
  ExperimentResult result =
      aggregate(bundle.task_name, "llm-zero-shot", per_class_generated,
                std::move(accuracies));
  return result;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

}  // namespace

void write_per_rep_csv(const std::vector<ExperimentResult>& results,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "task,method,K,rep,accuracy\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.per_rep_accuracy.size(); ++i) {
      out << r.task << ',' << r.method << ',' << r.k << ',' << i << ','
          << fmt(r.per_rep_accuracy[i]) << '\n';
    }
  }
}

void write_aggregate_csv(const std::vector<ExperimentResult>& results,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "task,method,K,mean,std,std_sample,n\n";
  for (const auto& r : results) {
    out << r.task << ',' << r.method << ',' << r.k << ',' << fmt(r.mean) << ','
        << fmt(r.std_dev) << ',' << fmt(r.std_sample) << ','
        << r.per_rep_accuracy.size() << '\n';
  }
}

void write_sweep_csv(const std::vector<ExperimentResult>& results,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "method,K,mean,std\n";
  for (const auto& r : results) {
    out << r.method << ',' << r.k << ',' << fmt(r.mean) << ','
        << fmt(r.std_dev) << '\n';
  }
}

void write_markdown_report(const std::vector<ExperimentResult>& results,
                           const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# Benchmark results\n\n";
  out << "Accuracy is the mean over repetitions; the parenthesized value is "
         "the population standard deviation.\n\n";
  out << "| task | method | K | accuracy | reps |\n";
  out << "|------|--------|--:|----------|-----:|\n";
  char buf[64];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%.3f (%.3f)", r.mean, r.std_dev);
    out << "| " << r.task << " | " << r.method << " | " << r.k << " | " << buf
        << " | " << r.per_rep_accuracy.size() << " |\n";
  }
}

}  // namespace textaug::evalbench
