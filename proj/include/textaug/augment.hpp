#ifndef TEXTAUG_AUGMENT_HPP
#define TEXTAUG_AUGMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "textaug/corpus.hpp"
#include "textaug/providers.hpp"
#include "textaug/rng.hpp"
#include "textaug/textkit.hpp"

namespace textaug::augment {

using Thesaurus = std::unordered_map<std::string, std::vector<std::string>>;

// JSON object of word -> array of synonyms.
Thesaurus load_thesaurus(const std::filesystem::path& path);

struct EdaParams {
  double alpha = 0.10;  // proportion of words affected per operation
  std::uint64_t seed = 0;
};

enum class PromptMode { kZeroShotClass, kFewShotParaphrase };

// A class-conditioned generation prompt. ZeroShotClass templates contain the
// `{n}` placeholder; FewShotParaphrase templates contain `{n}` and
// `{sentence}`.
struct PromptTemplate {
  std::string id;
  std::string label;
  std::string text;
  PromptMode mode = PromptMode::kZeroShotClass;

  void validate() const;
};

// JSON array of {id, label, template, mode}.
std::vector<PromptTemplate> load_prompt_catalog(
    const std::filesystem::path& path);

enum class AugmentMethod { kEda, kBackTranslation, kLlmZeroShot, kLlmFewShot };

std::string method_name(AugmentMethod method);
AugmentMethod parse_method(const std::string& name);

struct AugmentationRecipe {
  AugmentMethod method = AugmentMethod::kEda;
  std::size_t k = 1;  // generated per original example (per class for
                      // zero-shot without training data)
  std::optional<EdaParams> eda;
  std::vector<std::string> pivot_langs;
  std::vector<PromptTemplate> prompts;
  std::uint64_t seed = 0;
  std::size_t per_call = 20;  // zero-shot batch size per chat call

  // Method-specific optionals must be present exactly when required; back
  // translation needs |pivot_langs| >= k (one distinct language per copy).
  void validate() const;
};

// The four EDA word-level operations. All draw from the caller's generator;
// tokens are assumed lowercased (tokenize output).
textkit::TokenList synonym_replacement(const textkit::TokenList& tokens,
                                       std::size_t n, const Thesaurus& thesaurus,
                                       const textkit::Stoplist& stoplist,
                                       Pcg32& rng);
textkit::TokenList random_insertion(const textkit::TokenList& tokens,
                                    std::size_t n, const Thesaurus& thesaurus,
                                    const textkit::Stoplist& stoplist,
                                    Pcg32& rng);
textkit::TokenList random_swap(const textkit::TokenList& tokens, std::size_t n,
                               Pcg32& rng);
textkit::TokenList random_deletion(const textkit::TokenList& tokens, double p,
                                   Pcg32& rng);

// k generated examples, one operation per output chosen round-robin
// (replacement, insertion, swap, deletion), intensity
// n = max(1, round(alpha x token count)) and deletion p = alpha.
std::vector<corpus::LabeledExample> eda_augment(
    const corpus::LabeledExample& example, const EdaParams& params,
    std::size_t k, const Thesaurus& thesaurus,
    const textkit::Stoplist& stoplist);

// k round trips text -> pivot -> original language, one pivot per copy.
// Outputs equal to the source text are kept and flagged.
std::vector<corpus::LabeledExample> back_translate(
    const corpus::LabeledExample& example,
    const std::vector<std::string>& pivot_langs, std::size_t k,
    providers::ServiceClient& client);

// Replaces `{n}` with the decimal count and, for FewShotParaphrase,
// `{sentence}` with the given sentence. A required placeholder without a
// value is an error.
std::string render_prompt(const PromptTemplate& tmpl, std::size_t n,
                          const std::optional<std::string>& sentence = {});

// Splits a model response into items: per line, strips enumeration markers
// (`1.`, `1)`, `-`, `*`, bullet), wrapping quotes and markdown emphasis,
// collapses internal whitespace, drops empties, and deduplicates exact
// repeats keeping the first. Truncates to expected_n when expected_n > 0.
// Zero parsed items is an error carrying the raw response.
std::vector<std::string> parse_generated_list(const std::string& response,
                                              std::size_t expected_n);

// Per label: render the class prompt, call the chat provider in per_call
// batches, parse, and follow up on shortfalls (up to 3 extra rounds per
// batch, then accept with a warning flag). Every label must have a
// ZeroShotClass template before any call is made.
std::vector<corpus::LabeledExample> llm_zero_shot(
    const AugmentationRecipe& recipe,
    const std::vector<std::pair<std::string, std::size_t>>& label_counts,
    providers::ServiceClient& client);

// Convenience: the same count for every label.
std::vector<corpus::LabeledExample> llm_zero_shot(
    const AugmentationRecipe& recipe, const std::vector<std::string>& labels,
    std::size_t count_per_class, providers::ServiceClient& client);

// k paraphrases per training example, labels copied from the source;
// paraphrases equal to their source are kept and flagged.
std::vector<corpus::LabeledExample> llm_few_shot(
    const std::vector<corpus::LabeledExample>& train, std::size_t k,
    const PromptTemplate& tmpl, providers::ServiceClient& client,
    std::uint64_t seed);

// Dispatches a recipe over a training set (the bench entry point).
struct AugmentEnv {
  const Thesaurus* thesaurus = nullptr;
  const textkit::Stoplist* stoplist = nullptr;
  providers::ServiceClient* client = nullptr;
};

std::vector<corpus::LabeledExample> apply_recipe(
    const std::vector<corpus::LabeledExample>& train,
    const std::vector<std::string>& labels, const AugmentationRecipe& recipe,
    const AugmentEnv& env);

}  // namespace textaug::augment

#endif  // TEXTAUG_AUGMENT_HPP
