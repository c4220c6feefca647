#ifndef TEXTAUG_SIMILARITY_HPP
#define TEXTAUG_SIMILARITY_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "textaug/corpus.hpp"
#include "textaug/textkit.hpp"

namespace textaug::similarity {

enum class MetricKind { kEmbeddingCosine, kTfIdfCosine, kWordOverlap };

std::string metric_name(MetricKind metric);
MetricKind parse_metric(const std::string& name);

// Maximum over the reference set for one generated example. `raw_score`
// keeps the pre-clamp value (embedding cosines can be negative).
struct SimilarityEntry {
  std::string generated_id;
  std::string reference_id;
  double score = 0.0;
  double raw_score = 0.0;
};

struct SimilarityReport {
  MetricKind metric = MetricKind::kWordOverlap;
  std::string pair_name;  // e.g. "generated-to-test", "train-to-test"
  std::vector<SimilarityEntry> per_example_max;
  double dataset_mean = 0.0;
};

struct OverlapStats {
  double frac_above_two_thirds = 0.0;  // strictly greater than 2/3
  double max_percent = 0.0;            // 100 x max score
  std::size_t count_at_max = 0;        // |score - max| <= 1e-9
};

using Embedder = std::function<std::vector<std::vector<double>>(
    const std::vector<std::string>&)>;

struct SimilarityResources {
  // Required for kWordOverlap; when present it also filters the tokens that
  // feed kTfIdfCosine (the audit removes stop words before vectorizing).
  const textkit::Stoplist* stoplist = nullptr;
  Embedder embedder;                          // required for kEmbeddingCosine
  const textkit::TfIdfModel* tfidf = nullptr; // fitted on generated+reference
                                              // when absent
  int jobs = 1;
};

// |content(a) n content(b)| / max(|content(a)|, |content(b)|) over unique
// content words; 0 when either (or both) content set is empty.
double word_overlap(const corpus::LabeledExample& a,
                    const corpus::LabeledExample& b,
                    const textkit::Stoplist& stoplist);

// For each generated example, the maximum metric value over all reference
// examples (ties broken by lowest reference index); dataset_mean is the
// arithmetic mean of the maxima. Per-example entries keep generated order
// even when evaluated in parallel.
SimilarityReport pairwise_max(const std::vector<corpus::LabeledExample>& generated,
                              const std::vector<corpus::LabeledExample>& reference,
                              MetricKind metric,
                              const SimilarityResources& resources);

// Table-style overlap statistics; requires a WordOverlap report.
OverlapStats overlap_stats(const SimilarityReport& report);

// One report per (pair, metric): generated-to-train, generated-to-test, and
// train-to-test (train plays the generated side). When `generated` is empty
// only the train-to-test pair is produced. The TF-IDF corpus is fit jointly
// on train + test + generated.
std::vector<SimilarityReport> audit(const corpus::DatasetBundle& bundle,
                                    const std::vector<corpus::LabeledExample>& generated,
                                    const std::vector<MetricKind>& metrics,
                                    const SimilarityResources& resources);

void write_audit_csv(const std::vector<SimilarityReport>& reports,
                     const std::filesystem::path& path);
void write_audit_json(const std::vector<SimilarityReport>& reports,
                      const std::filesystem::path& path);
void write_audit_markdown(const std::vector<SimilarityReport>& reports,
                          const std::filesystem::path& path);

}  // namespace textaug::similarity

#endif  // TEXTAUG_SIMILARITY_HPP
