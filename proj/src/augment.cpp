#include "textaug/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "textaug/error.hpp"
#include "textaug/strings.hpp"

namespace textaug::augment {

using corpus::LabeledExample;
using corpus::Provenance;
using nlohmann::json;
using textkit::Stoplist;
using textkit::TokenList;

Thesaurus load_thesaurus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open thesaurus " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed thesaurus " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error("thesaurus " + path.string() +
                ": expected a JSON object of word -> synonyms");
  }
  Thesaurus thesaurus;
  for (const auto& [word, synonyms] : j.items()) {
    std::vector<std::string> list;
    for (const auto& s : synonyms) {
      list.push_back(strings::to_lower_ascii(s.get<std::string>()));
    }
    thesaurus[strings::to_lower_ascii(word)] = std::move(list);
  }
  return thesaurus;
}

void PromptTemplate::validate() const {
  if (id.empty()) throw ConfigError("prompt template has an empty id");
  if (text.find("{n}") == std::string::npos) {
    throw ConfigError("prompt template '" + id + "' lacks the {n} placeholder");
  }
  if (mode == PromptMode::kZeroShotClass) {
    if (label.empty()) {
      throw ConfigError("zero-shot prompt template '" + id +
                        "' has an empty label");
    }
  } else {
    if (text.find("{sentence}") == std::string::npos) {
      throw ConfigError("few-shot prompt template '" + id +
                        "' lacks the {sentence} placeholder");
    }
  }
}

std::vector<PromptTemplate> load_prompt_catalog(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open prompt catalog " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed prompt catalog " + path.string() + ": " + e.what());
  }
  if (!j.is_array()) {
    throw Error("prompt catalog " + path.string() + ": expected a JSON array");
  }
  std::vector<PromptTemplate> catalog;
  std::unordered_set<std::string> ids;
  for (const auto& item : j) {
    PromptTemplate tmpl;
    tmpl.id = item.at("id").get<std::string>();
    tmpl.label = item.value("label", std::string{});
    tmpl.text = item.at("template").get<std::string>();
    const std::string mode = item.value("mode", std::string{"zero_shot_class"});
    if (mode == "zero_shot_class") {
      tmpl.mode = PromptMode::kZeroShotClass;
    } else if (mode == "few_shot_paraphrase") {
      tmpl.mode = PromptMode::kFewShotParaphrase;
    } else {
      throw Error("prompt catalog " + path.string() + ": unknown mode '" +
                  mode + "' for template '" + tmpl.id + "'");
    }
    tmpl.validate();
    if (!ids.insert(tmpl.id).second) {
      throw Error("prompt catalog " + path.string() + ": duplicate id '" +
                  tmpl.id + "'");
    }
    catalog.push_back(std::move(tmpl));
  }
  return catalog;
}

std::string method_name(AugmentMethod method) {
  switch (method) {
    case AugmentMethod::kEda: return "eda";
    case AugmentMethod::kBackTranslation: return "back-translation";
    case AugmentMethod::kLlmZeroShot: return "llm-zero-shot";
    case AugmentMethod::kLlmFewShot: return "llm-few-shot";
  }
  throw Error("unknown augmentation method");
}

AugmentMethod parse_method(const std::string& name) {
  if (name == "eda") return AugmentMethod::kEda;
  if (name == "back-translation") return AugmentMethod::kBackTranslation;
  if (name == "llm-zero-shot") return AugmentMethod::kLlmZeroShot;
  if (name == "llm-few-shot") return AugmentMethod::kLlmFewShot;
  throw ConfigError("unknown augmentation method '" + name +
                    "' (expected eda, back-translation, llm-zero-shot, or "
                    "llm-few-shot)");
}

void AugmentationRecipe::validate() const {
  if (k == 0) throw ConfigError("recipe requires k >= 1");
  if (per_call == 0) throw ConfigError("recipe requires per_call >= 1");
  switch (method) {
    case AugmentMethod::kEda: {
      if (!eda) throw ConfigError("eda recipe requires EDA parameters");
      if (eda->alpha < 0.0 || eda->alpha > 1.0) {
        throw ConfigError("eda alpha must lie in [0, 1]");
      }
      break;
    }
    case AugmentMethod::kBackTranslation: {
      if (pivot_langs.size() < k) {
        throw ConfigError(
            "back-translation requires at least k pivot languages (k = " +
            std::to_string(k) + ", got " + std::to_string(pivot_langs.size()) +
            ")");
      }
      std::unordered_set<std::string> seen(pivot_langs.begin(),
                                           pivot_langs.end());
      if (seen.size() != pivot_langs.size()) {
        throw ConfigError("back-translation pivot languages must be distinct");
      }
      break;
    }
    case AugmentMethod::kLlmZeroShot: {
      const bool any =
          std::any_of(prompts.begin(), prompts.end(), [](const auto& t) {
            return t.mode == PromptMode::kZeroShotClass;
          });
      if (!any) {
        throw ConfigError("llm-zero-shot recipe requires class prompt templates");
      }
      break;
    }
    case AugmentMethod::kLlmFewShot: {
      const bool any =
          std::any_of(prompts.begin(), prompts.end(), [](const auto& t) {
            return t.mode == PromptMode::kFewShotParaphrase;
          });
      if (!any) {
        throw ConfigError(
            "llm-few-shot recipe requires a paraphrase prompt template");
      }
      break;
    }
  }
  for (const auto& tmpl : prompts) tmpl.validate();
}

namespace {

bool has_synonyms(const Thesaurus& thesaurus, const std::string& word) {
  const auto it = thesaurus.find(word);
  return it != thesaurus.end() && !it->second.empty();
}

const std::string& pick_synonym(const Thesaurus& thesaurus,
                                const std::string& word, Pcg32& rng) {
  const auto& list = thesaurus.at(word);
  return list[rng.bounded(static_cast<std::uint32_t>(list.size()))];
}

std::vector<std::size_t> non_stopword_positions(const TokenList& tokens,
                                                const Stoplist& stoplist) {
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!stoplist.count(tokens[i])) positions.push_back(i);
  }
  return positions;
}

}  // namespace

TokenList synonym_replacement(const TokenList& tokens, std::size_t n,
                              const Thesaurus& thesaurus,
                              const Stoplist& stoplist, Pcg32& rng) {
  TokenList out = tokens;
  auto candidates = non_stopword_positions(tokens, stoplist);
  std::size_t replaced = 0;
  while (replaced < n && !candidates.empty()) {
    const std::size_t pick =
        rng.bounded(static_cast<std::uint32_t>(candidates.size()));
    const std::size_t position = candidates[pick];
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
    if (!has_synonyms(thesaurus, out[position])) continue;
    out[position] = pick_synonym(thesaurus, out[position], rng);
    ++replaced;
  }
  return out;
}

TokenList random_insertion(const TokenList& tokens, std::size_t n,
                           const Thesaurus& thesaurus, const Stoplist& stoplist,
                           Pcg32& rng) {
  TokenList out = tokens;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (!stoplist.count(out[j]) && has_synonyms(thesaurus, out[j])) {
        candidates.push_back(j);
      }
    }
    if (candidates.empty()) break;
    const std::size_t source =
        candidates[rng.bounded(static_cast<std::uint32_t>(candidates.size()))];
    const std::string synonym = pick_synonym(thesaurus, out[source], rng);
    const std::size_t position =
        rng.bounded(static_cast<std::uint32_t>(out.size() + 1));
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(position), synonym);
  }
  return out;
}

TokenList random_swap(const TokenList& tokens, std::size_t n, Pcg32& rng) {
  TokenList out = tokens;
  if (out.size() < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = rng.bounded(static_cast<std::uint32_t>(out.size()));
    std::size_t b = rng.bounded(static_cast<std::uint32_t>(out.size() - 1));
    if (b >= a) ++b;
    std::swap(out[a], out[b]);
  }
  return out;
}

TokenList random_deletion(const TokenList& tokens, double p, Pcg32& rng) {
  if (tokens.empty() || p <= 0.0) return tokens;
  TokenList out;
  for (const auto& token : tokens) {
    if (rng.next_double() >= p) out.push_back(token);
  }
  if (out.empty()) {
    out.push_back(tokens[rng.bounded(static_cast<std::uint32_t>(tokens.size()))]);
  }
  return out;
}

std::vector<LabeledExample> eda_augment(const LabeledExample& example,
                                        const EdaParams& params, std::size_t k,
                                        const Thesaurus& thesaurus,
                                        const Stoplist& stoplist) {
  if (params.alpha < 0.0 || params.alpha > 1.0) {
    throw ConfigError("eda alpha must lie in [0, 1]");
  }
  const TokenList tokens = textkit::tokenize(example.text);
  const auto n = static_cast<std::size_t>(std::max<long>(
      1, std::lround(params.alpha * static_cast<double>(tokens.size()))));

  static const char* kOpNames[] = {"synonym_replacement", "random_insertion",
                                   "random_swap", "random_deletion"};
  Pcg32 rng(params.seed);
  std::vector<LabeledExample> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t op = i % 4;
    TokenList generated;
    switch (op) {
      case 0: generated = synonym_replacement(tokens, n, thesaurus, stoplist, rng); break;
      case 1: generated = random_insertion(tokens, n, thesaurus, stoplist, rng); break;
      case 2: generated = random_swap(tokens, n, rng); break;
      case 3: generated = random_deletion(tokens, params.alpha, rng); break;
    }
    LabeledExample e;
    e.id = example.id + "-eda-" + std::to_string(i);
    e.text = strings::join(generated, " ");
    e.label = example.label;
    e.provenance = Provenance::generated("eda", params.seed, kOpNames[op]);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<LabeledExample> back_translate(
    const LabeledExample& example, const std::vector<std::string>& pivot_langs,
    std::size_t k, providers::ServiceClient& client) {
  if (k > pivot_langs.size()) {
    throw ConfigError("back-translation needs k <= number of pivot languages");
  }
  std::vector<LabeledExample> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::string& pivot = pivot_langs[i];
    std::string text;
    try {
      const std::string forward = client.translate(example.text, "en", pivot);
      text = client.translate(forward, pivot, "en");
    } catch (const ProviderError& e) {
      throw ProviderError("back-translation via '" + pivot +
                          "' failed: " + e.what(),
                          out.size());
    }
    LabeledExample e;
    e.id = example.id + "-bt-" + pivot;
    e.text = text;
    e.label = example.label;
    e.provenance = Provenance::generated("back-translation", 0, pivot);
    if (e.text == example.text) e.flags.push_back("duplicate-of-source");
    out.push_back(std::move(e));
  }
  return out;
}

std::string render_prompt(const PromptTemplate& tmpl, std::size_t n,
                          const std::optional<std::string>& sentence) {
  std::string rendered =
      strings::replace_all(tmpl.text, "{n}", std::to_string(n));
  if (tmpl.mode == PromptMode::kFewShotParaphrase) {
    if (!sentence) {
      throw ConfigError("prompt template '" + tmpl.id +
                        "' requires a sentence argument");
    }
    rendered = strings::replace_all(rendered, "{sentence}", *sentence);
  }
  return rendered;
}

namespace {

// Strips one leading enumeration marker: "12.", "12)", or a bullet
// ('-', '*', or U+2022) followed by whitespace.
std::string strip_enumeration(std::string s) {
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) {
    ++digits;
  }
  if (digits > 0 && digits < s.size() &&
      (s[digits] == '.' || s[digits] == ')')) {
    return strings::trim(s.substr(digits + 1));
  }
  if (!s.empty() && (s[0] == '-' || s[0] == '*') &&
      (s.size() == 1 || s[1] == ' ' || s[1] == '\t')) {
    return strings::trim(s.substr(1));
  }
  if (s.rfind("\xE2\x80\xA2", 0) == 0) {  // U+2022 bullet
    return strings::trim(s.substr(3));
  }
  return s;
}

bool strip_pair(std::string& s, const std::string& open,
                const std::string& close) {
  if (s.size() < open.size() + close.size()) return false;
  if (s.rfind(open, 0) != 0) return false;
  if (s.compare(s.size() - close.size(), close.size(), close) != 0) return false;
  s = strings::trim(s.substr(open.size(),
                             s.size() - open.size() - close.size()));
  return true;
}

std::string clean_item(const std::string& line) {
  std::string s = strip_enumeration(strings::trim(line));
  strip_pair(s, "**", "**");
  strip_pair(s, "*", "*");
  if (!strip_pair(s, "\"", "\"")) {
    strip_pair(s, "\xE2\x80\x9C", "\xE2\x80\x9D");  // curly double quotes
  }
  return strings::collapse_spaces(s);
}

}  // namespace

std::vector<std::string> parse_generated_list(const std::string& response,
                                              std::size_t expected_n) {
  std::vector<std::string> items;
  std::unordered_set<std::string> seen;
  std::size_t start = 0;
  while (start <= response.size()) {
    std::size_t end = response.find('\n', start);
    if (end == std::string::npos) end = response.size();
    std::string line = response.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    start = end + 1;
    const std::string item = clean_item(line);
    if (item.empty() || !seen.insert(item).second) continue;
    items.push_back(item);
    if (start > response.size()) break;
  }
  if (items.empty()) {
    throw Error("no generated sentences parsed from response: \"" + response +
                "\"");
  }
  if (expected_n > 0 && items.size() > expected_n) items.resize(expected_n);
  return items;
}

namespace {

const PromptTemplate& class_template(const AugmentationRecipe& recipe,
                                     const std::string& label) {
  for (const auto& tmpl : recipe.prompts) {
    if (tmpl.mode == PromptMode::kZeroShotClass && tmpl.label == label) {
      return tmpl;
    }
  }
  throw ConfigError("no class prompt template for label '" + label + "'");
}

// One batch of up to `wanted` sentences for a label: initial call plus up to
// three shortfall follow-ups. Returns what it got; short batches set
// `*shortfall`.
std::vector<std::string> zero_shot_batch(const PromptTemplate& tmpl,
                                         std::size_t wanted,
                                         providers::ServiceClient& client,
                                         bool* shortfall) {
  std::vector<std::string> got;
  std::unordered_set<std::string> seen;
  for (int round = 0; round <= 3 && got.size() < wanted; ++round) {
    const std::size_t missing = wanted - got.size();
    providers::ChatRequest req;
    req.prompt = render_prompt(tmpl, missing);
    std::vector<std::string> parsed;
    try {
      parsed = parse_generated_list(client.chat_complete(req), missing);
    } catch (const Error& e) {
      if (round == 3) {
        throw Error("zero-shot generation for label '" + tmpl.label +
                    "' failed: " + e.what());
      }
      continue;
    }
    for (auto& item : parsed) {
      if (got.size() >= wanted) break;
      if (seen.insert(item).second) got.push_back(std::move(item));
    }
  }
  if (got.size() < wanted) *shortfall = true;
  return got;
}

}  // namespace

std::vector<LabeledExample> llm_zero_shot(
    const AugmentationRecipe& recipe,
    const std::vector<std::pair<std::string, std::size_t>>& label_counts,
    providers::ServiceClient& client) {
  // Missing templates must fail before any provider call.
  for (const auto& [label, count] : label_counts) {
    if (count > 0) class_template(recipe, label);
  }

  std::vector<LabeledExample> out;
  for (const auto& [label, count] : label_counts) {
    if (count == 0) continue;
    const PromptTemplate& tmpl = class_template(recipe, label);
    std::vector<std::string> texts;
    bool shortfall = false;
    while (texts.size() < count && !shortfall) {
      const std::size_t wanted =
          std::min(recipe.per_call, count - texts.size());
      auto batch = zero_shot_batch(tmpl, wanted, client, &shortfall);
      for (auto& text : batch) texts.push_back(std::move(text));
    }
    std::size_t index = 0;
    for (auto& text : texts) {
      LabeledExample e;
      e.id = label + "-llm0-" + std::to_string(index++);
      e.text = std::move(text);
      e.label = label;
      e.provenance =
          Provenance::generated("llm-zero-shot", recipe.seed, tmpl.id);
      if (shortfall) e.flags.push_back("count-shortfall");
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<LabeledExample> llm_zero_shot(const AugmentationRecipe& recipe,
                                          const std::vector<std::string>& labels,
                                          std::size_t count_per_class,
                                          providers::ServiceClient& client) {
  std::vector<std::pair<std::string, std::size_t>> label_counts;
  label_counts.reserve(labels.size());
  for (const auto& label : labels) label_counts.emplace_back(label, count_per_class);
  return llm_zero_shot(recipe, label_counts, client);
}

std::vector<LabeledExample> llm_few_shot(const std::vector<LabeledExample>& train,
                                         std::size_t k,
                                         const PromptTemplate& tmpl,
                                         providers::ServiceClient& client,
                                         std::uint64_t seed) {
  if (tmpl.mode != PromptMode::kFewShotParaphrase) {
    throw ConfigError("llm-few-shot requires a paraphrase prompt template");
  }
  tmpl.validate();
  std::vector<LabeledExample> out;
  if (k == 0) return out;
  out.reserve(train.size() * k);
  for (const auto& source : train) {
    std::vector<std::string> texts;
    bool shortfall = false;
    for (int round = 0; round <= 3 && texts.size() < k; ++round) {
      const std::size_t missing = k - texts.size();
      providers::ChatRequest req;
      req.prompt = render_prompt(tmpl, missing, source.text);
      std::vector<std::string> parsed;
      try {
        parsed = parse_generated_list(client.chat_complete(req), missing);
      } catch (const Error& e) {
        if (round == 3) {
          throw Error("paraphrase generation for example '" + source.id +
                      "' failed: " + e.what());
        }
        continue;
      }
      for (auto& item : parsed) {
        if (texts.size() >= k) break;
        texts.push_back(std::move(item));
      }
    }
    if (texts.size() < k) shortfall = true;
    std::size_t index = 0;
    for (auto& text : texts) {
      LabeledExample e;
      e.id = source.id + "-para-" + std::to_string(index++);
      e.text = std::move(text);
      e.label = source.label;
      e.provenance = Provenance::generated("llm-few-shot", seed, tmpl.id);
      if (e.text == source.text) e.flags.push_back("duplicate-of-source");
      if (shortfall) e.flags.push_back("count-shortfall");
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<LabeledExample> apply_recipe(const std::vector<LabeledExample>& train,
                                         const std::vector<std::string>& labels,
                                         const AugmentationRecipe& recipe,
                                         const AugmentEnv& env) {
  recipe.validate();
  switch (recipe.method) {
    case AugmentMethod::kEda: {
      if (!env.thesaurus || !env.stoplist) {
        throw ConfigError("eda requires a thesaurus and a stop-word list");
      }
      Pcg32 master(recipe.seed);
      std::vector<LabeledExample> out;
      out.reserve(train.size() * recipe.k);
      for (const auto& example : train) {
        EdaParams params = *recipe.eda;
        params.seed = master.next64();
        auto generated = eda_augment(example, params, recipe.k, *env.thesaurus,
                                     *env.stoplist);
        for (auto& e : generated) out.push_back(std::move(e));
      }
      return out;
    }
    case AugmentMethod::kBackTranslation: {
      if (!env.client) throw ConfigError("back-translation requires a provider client");
      std::vector<LabeledExample> out;
      out.reserve(train.size() * recipe.k);
      for (const auto& example : train) {
        auto generated =
            back_translate(example, recipe.pivot_langs, recipe.k, *env.client);
        for (auto& e : generated) out.push_back(std::move(e));
      }
      return out;
    }
    case AugmentMethod::kLlmZeroShot: {
      if (!env.client) throw ConfigError("llm-zero-shot requires a provider client");
      std::map<std::string, std::size_t> counts;
      for (const auto& e : train) ++counts[e.label];
      std::vector<std::pair<std::string, std::size_t>> label_counts;
      for (const auto& label : labels) {
        const auto it = counts.find(label);
        const std::size_t sources = it == counts.end() ? 0 : it->second;
        label_counts.emplace_back(label, sources * recipe.k);
      }
      return llm_zero_shot(recipe, label_counts, *env.client);
    }
    case AugmentMethod::kLlmFewShot: {
      if (!env.client) throw ConfigError("llm-few-shot requires a provider client");
      for (const auto& tmpl : recipe.prompts) {
        if (tmpl.mode == PromptMode::kFewShotParaphrase) {
          return llm_few_shot(train, recipe.k, tmpl, *env.client, recipe.seed);
        }
      }
      throw ConfigError("llm-few-shot recipe requires a paraphrase prompt template");
    }
  }
  throw Error("unknown augmentation method");
}

}  // namespace textaug::augment
