#ifndef TEXTAUG_CORPUS_HPP
#define TEXTAUG_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace textaug::corpus {

enum class ProvenanceKind { kOriginal, kGenerated };

// Where an example came from. Original examples carry no further detail;
// generated ones record the producing method, the seed of the run, and the
// prompt or operation identifier within that method.
struct Provenance {
  ProvenanceKind kind = ProvenanceKind::kOriginal;
  std::string method;
  std::uint64_t seed = 0;
  std::string prompt_id;

  static Provenance original() { return {}; }
  static Provenance generated(std::string method, std::uint64_t seed,
                              std::string prompt_id) {
    return {ProvenanceKind::kGenerated, std::move(method), seed,
            std::move(prompt_id)};
  }
  bool operator==(const Provenance&) const = default;
};

struct LabeledExample {
  std::string id;
  std::string text;
  std::string label;
  Provenance provenance;
  // Free-form annotations, e.g. "duplicate-of-source" or shortfall warnings.
  std::vector<std::string> flags;

  bool operator==(const LabeledExample&) const = default;
};

// Named train/dev/test splits plus the class-label inventory for one task.
// `labels` is an ordered set: unique entries whose order defines the label
// order used by prompts, reports, and classifier tie-breaking.
struct DatasetBundle {
  std::string task_name;
  std::vector<std::string> labels;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;

  // Throws Error when an invariant is violated: duplicate labels, split
  // labels outside the inventory, duplicate ids within a split, or splits
  // sharing ids.
  void validate() const;
  std::map<std::string, std::size_t> class_counts(
      const std::vector<LabeledExample>& split) const;
};

struct SubsampleSpec {
  std::size_t per_class = 10;
  std::uint64_t seed = 0;
};

enum class FileFormat { kJsonl, kTsv };

FileFormat parse_format(const std::string& name);

// Reads one split file. Records missing an explicit id get "<id_prefix>-<n>"
// with n the 0-based record index. Throws Error naming the offending line on
// malformed records, on duplicate explicit ids, and on empty files.
std::vector<LabeledExample> load_examples(const std::filesystem::path& path,
                                          FileFormat format,
                                          const std::string& id_prefix);

void save_examples(const std::vector<LabeledExample>& examples,
                   const std::filesystem::path& path, FileFormat format);

// Loads a single file into the train split; labels become the sorted set of
// observed labels.
DatasetBundle load_dataset(const std::filesystem::path& path,
                           FileFormat format);

// Writes the train split of `bundle`. load_dataset(save_dataset(b)) equals b
// on (text, label, provenance) up to id regeneration.
void save_dataset(const DatasetBundle& bundle,
                  const std::filesystem::path& path, FileFormat format);

// Low-resource subsample: train and dev each keep min(per_class, available)
// examples per class, drawn without replacement from one seeded stream
// (train classes first, then dev, in label order); test passes through.
// Selection order within a class follows the original split order. A label
// missing from train (or from a non-empty dev) is an error naming both.
DatasetBundle subsample(const DatasetBundle& bundle, const SubsampleSpec& spec);

}  // namespace textaug::corpus

#endif  // TEXTAUG_CORPUS_HPP
