#ifndef TEXTAUG_EVALBENCH_HPP
#define TEXTAUG_EVALBENCH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "textaug/augment.hpp"
#include "textaug/corpus.hpp"
#include "textaug/textkit.hpp"

namespace textaug::evalbench {

// Multinomial logistic regression over TF-IDF features. Weights are
// row-major [class][feature].
struct ClassifierModel {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  textkit::TfIdfModel feature_model;
  std::vector<std::string> label_order;
};

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  bool early_stop_on_dev = true;  // keep the best dev-accuracy checkpoint
};

struct ExperimentResult {
  std::string task;
  std::string method;
  std::size_t k = 0;
  std::vector<double> per_rep_accuracy;
  double mean = 0.0;
  double std_dev = 0.0;     // population form (divide by n)
  double std_sample = 0.0;  // divide by n-1; 0 when n < 2
};

ExperimentResult aggregate(std::string task, std::string method, std::size_t k,
                           std::vector<double> per_rep_accuracy);

// Mean cross-entropy + (l2/2)|W|^2 and its analytic gradient; bias is not
// regularized. Exposed so the finite-difference check can drive it directly.
struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_weights;
  std::vector<double> grad_bias;
};

LossGrad cross_entropy_loss_grad(const std::vector<double>& weights,
                                 const std::vector<double>& bias,
                                 const std::vector<textkit::SparseVector>& features,
                                 const std::vector<std::size_t>& label_idx,
                                 std::size_t num_classes,
                                 std::size_t num_features, double l2);

std::vector<double> softmax(const std::vector<double>& logits);

// Full-batch gradient descent from zero weights; after each epoch the dev
// accuracy is evaluated and the best checkpoint (earliest on ties) is
// returned. epochs = 0 returns the initialization. Errors on a class with no
// training examples or a non-finite loss. `loss_history`, when given,
// receives the post-epoch training losses.
ClassifierModel train(const std::vector<corpus::LabeledExample>& train_set,
                      const std::vector<corpus::LabeledExample>& dev_set,
                      const std::vector<std::string>& labels,
                      const textkit::TfIdfModel& feature_model,
                      const TrainConfig& config,
                      std::vector<double>* loss_history = nullptr);

// Softmax over logits; argmax label with ties broken by label order.
std::pair<std::string, std::vector<double>> predict(
    const ClassifierModel& model, const corpus::LabeledExample& example);

// Fraction of correct argmax predictions over a non-empty test set.
double evaluate(const ClassifierModel& model,
                const std::vector<corpus::LabeledExample>& test_set);

struct BenchOptions {
  std::size_t per_class = 10;
  std::size_t repetitions = 15;
  std::uint64_t base_seed = 0;
};

// One (task, method, K) cell: per repetition r, subsample with seed
// base_seed + r, apply the recipe to the subsampled train set, fit TF-IDF on
// train + generated, train, and evaluate on the full test set.
ExperimentResult run_experiment(const corpus::DatasetBundle& bundle,
                                const std::optional<augment::AugmentationRecipe>& recipe,
                                const TrainConfig& config,
                                const BenchOptions& options,
                                const augment::AugmentEnv& env);

// One result per (method, K).
std::vector<ExperimentResult> sweep_k(
    const corpus::DatasetBundle& bundle,
    const std::vector<std::pair<std::string, augment::AugmentationRecipe>>& recipes,
    const std::vector<std::size_t>& ks, const TrainConfig& config,
    const BenchOptions& options, const augment::AugmentEnv& env);

// Training set = zero-shot generated examples only (per_class_generated per
// class, split 75/25 into train/dev per class, seeded); test = the full
// original test set. Throws if any original training example leaks in.
ExperimentResult run_no_train_scenario(const corpus::DatasetBundle& bundle,
                                       const augment::AugmentationRecipe& recipe,
                                       std::size_t per_class_generated,
                                       const TrainConfig& config,
                                       const BenchOptions& options,
                                       const augment::AugmentEnv& env);

void write_per_rep_csv(const std::vector<ExperimentResult>& results,
                       const std::filesystem::path& path);
void write_aggregate_csv(const std::vector<ExperimentResult>& results,
                         const std::filesystem::path& path);
void write_sweep_csv(const std::vector<ExperimentResult>& results,
                     const std::filesystem::path& path);
void write_markdown_report(const std::vector<ExperimentResult>& results,
                           const std::filesystem::path& path);

}  // namespace textaug::evalbench

#endif  // TEXTAUG_EVALBENCH_HPP
