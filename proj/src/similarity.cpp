#include "textaug/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "textaug/error.hpp"

namespace textaug::similarity {

using corpus::LabeledExample;
using nlohmann::json;

std::string metric_name(MetricKind metric) {
  switch (metric) {
    case MetricKind::kEmbeddingCosine: return "embedding_cosine";
    case MetricKind::kTfIdfCosine: return "tfidf_cosine";
    case MetricKind::kWordOverlap: return "word_overlap";
  }
  throw Error("unknown similarity metric");
}

MetricKind parse_metric(const std::string& name) {
  if (name == "embedding_cosine") return MetricKind::kEmbeddingCosine;
  if (name == "tfidf_cosine") return MetricKind::kTfIdfCosine;
  if (name == "word_overlap") return MetricKind::kWordOverlap;
  throw ConfigError("unknown similarity metric '" + name +
                    "' (expected embedding_cosine, tfidf_cosine, or "
                    "word_overlap)");
}

double word_overlap(const LabeledExample& a, const LabeledExample& b,
                    const textkit::Stoplist& stoplist) {
  const auto ca = textkit::content_words(textkit::tokenize(a.text), stoplist);
  const auto cb = textkit::content_words(textkit::tokenize(b.text), stoplist);
  if (ca.empty() || cb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& w : ca) {
    if (cb.count(w)) ++common;
  }
  return static_cast<double>(common) /
         static_cast<double>(std::max(ca.size(), cb.size()));
}

namespace {

std::vector<double> embed_norms(const std::vector<std::vector<double>>& vecs) {
  std::vector<double> norms(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    double s = 0.0;
    for (double x : vecs[i]) s += x * x;
    norms[i] = std::sqrt(s);
  }
  return norms;
}

double dense_cosine(const std::vector<double>& u, double nu,
                    const std::vector<double>& v, double nv) {
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return dot / (nu * nv);
}

std::vector<std::string> texts_of(const std::vector<LabeledExample>& examples) {
  std::vector<std::string> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.text);
  return out;
}

// TF-IDF similarity works on stop-word-filtered term counts when a stoplist
// is supplied (contamination-audit definition); otherwise on raw tokens.
textkit::TokenList tfidf_tokens(const std::string& text,
                                const textkit::Stoplist* stoplist) {
  auto tokens = textkit::tokenize(text);
  if (stoplist) return textkit::remove_stopwords(tokens, *stoplist);
  return tokens;
}

// Runs fn(i) for i in [0, n), split across `jobs` threads. fn must only
// touch slot i of its outputs.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

SimilarityReport pairwise_max(const std::vector<LabeledExample>& generated,
                              const std::vector<LabeledExample>& reference,
                              MetricKind metric,
                              const SimilarityResources& resources) {
  if (reference.empty()) throw Error("similarity reference set is empty");

  SimilarityReport report;
  report.metric = metric;
  report.per_example_max.resize(generated.size());

  // Precompute per-side representations once; the scan below is O(G x R).
  std::vector<std::set<std::string>> gen_words;
  std::vector<std::set<std::string>> ref_words;
  std::vector<textkit::SparseVector> gen_vecs;
  std::vector<textkit::SparseVector> ref_vecs;
  std::vector<std::vector<double>> gen_emb;
  std::vector<std::vector<double>> ref_emb;
  std::vector<double> gen_norms;
  std::vector<double> ref_norms;
  textkit::TfIdfModel local_model;

  switch (metric) {
    case MetricKind::kWordOverlap: {
      if (!resources.stoplist) {
        throw ConfigError("word_overlap metric requires a stop-word list");
      }
      gen_words.reserve(generated.size());
      for (const auto& e : generated) {
        gen_words.push_back(
            textkit::content_words(textkit::tokenize(e.text), *resources.stoplist));
      }
      ref_words.reserve(reference.size());
      for (const auto& e : reference) {
        ref_words.push_back(
            textkit::content_words(textkit::tokenize(e.text), *resources.stoplist));
      }
      break;
    }
    case MetricKind::kTfIdfCosine: {
      const textkit::TfIdfModel* model = resources.tfidf;
      if (!model) {
        std::vector<textkit::TokenList> docs;
        docs.reserve(generated.size() + reference.size());
        for (const auto& e : generated) {
          docs.push_back(tfidf_tokens(e.text, resources.stoplist));
        }
        for (const auto& e : reference) {
          docs.push_back(tfidf_tokens(e.text, resources.stoplist));
        }
        local_model = textkit::fit_tfidf(docs);
        model = &local_model;
      }
      gen_vecs.reserve(generated.size());
      for (const auto& e : generated) {
        gen_vecs.push_back(
            textkit::transform(*model, tfidf_tokens(e.text, resources.stoplist)));
      }
      ref_vecs.reserve(reference.size());
      for (const auto& e : reference) {
        ref_vecs.push_back(
            textkit::transform(*model, tfidf_tokens(e.text, resources.stoplist)));
      }
      break;
    }
    case MetricKind::kEmbeddingCosine: {
      if (!resources.embedder) {
        throw ConfigError("embedding_cosine metric requires an embedder");
      }
      gen_emb = resources.embedder(texts_of(generated));
      ref_emb = resources.embedder(texts_of(reference));
      if (gen_emb.size() != generated.size() ||
          ref_emb.size() != reference.size()) {
        throw ProviderError("embedder returned a wrong number of vectors");
      }
      gen_norms = embed_norms(gen_emb);
      ref_norms = embed_norms(ref_emb);
      break;
    }
  }

  parallel_for(generated.size(), resources.jobs, [&](std::size_t i) {
    double best = -2.0;
    double best_raw = -2.0;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < reference.size(); ++j) {
      double raw = 0.0;
      switch (metric) {
        case MetricKind::kWordOverlap: {
          const auto& a = gen_words[i];
          const auto& b = ref_words[j];
          if (a.empty() || b.empty()) {
            raw = 0.0;
          } else {
            std::size_t common = 0;
            for (const auto& w : a) {
              if (b.count(w)) ++common;
            }
            raw = static_cast<double>(common) /
                  static_cast<double>(std::max(a.size(), b.size()));
          }
          break;
        }
        case MetricKind::kTfIdfCosine:
          raw = textkit::cosine(gen_vecs[i], ref_vecs[j]);
          break;
        case MetricKind::kEmbeddingCosine:
          raw = dense_cosine(gen_emb[i], gen_norms[i], ref_emb[j], ref_norms[j]);
          break;
      }
      const double score = std::clamp(raw, 0.0, 1.0);
      if (score > best) {
        best = score;
        best_raw = raw;
        best_j = j;
      }
    }
    report.per_example_max[i] = SimilarityEntry{
        generated[i].id, reference[best_j].id, best, best_raw};
  });

  double sum = 0.0;
  for (const auto& entry : report.per_example_max) sum += entry.score;
  report.dataset_mean =
      generated.empty() ? 0.0 : sum / static_cast<double>(generated.size());
  return report;
}

OverlapStats overlap_stats(const SimilarityReport& report) {
  if (report.metric != MetricKind::kWordOverlap) {
    throw ConfigError("overlap statistics are defined for word_overlap only");
  }
  OverlapStats stats;
  if (report.per_example_max.empty()) return stats;

  constexpr double kThreshold = 2.0 / 3.0;
  double max_score = 0.0;
  std::size_t above = 0;
  for (const auto& entry : report.per_example_max) {
    if (entry.score > kThreshold) ++above;
    max_score = std::max(max_score, entry.score);
  }
  stats.frac_above_two_thirds =
      static_cast<double>(above) /
      static_cast<double>(report.per_example_max.size());
  stats.max_percent = 100.0 * max_score;
  for (const auto& entry : report.per_example_max) {
    if (std::abs(entry.score - max_score) <= 1e-9) ++stats.count_at_max;
  }
  return stats;
}

std::vector<SimilarityReport> audit(
    const corpus::DatasetBundle& bundle,
    const std::vector<LabeledExample>& generated,
    const std::vector<MetricKind>& metrics,
    const SimilarityResources& resources) {
  if (bundle.train.empty()) throw Error("audit requires a non-empty train split");
  if (bundle.test.empty()) throw Error("audit requires a non-empty test split");
  if (metrics.empty()) throw ConfigError("audit requires at least one metric");

  // Fit one TF-IDF model over every text the audit touches so all pairs
  // share a vocabulary.
  textkit::TfIdfModel shared_model;
  bool have_model = false;
  if (std::find(metrics.begin(), metrics.end(), MetricKind::kTfIdfCosine) !=
      metrics.end()) {
    std::vector<textkit::TokenList> docs;
    docs.reserve(bundle.train.size() + bundle.test.size() + generated.size());
    for (const auto& e : bundle.train) {
      docs.push_back(tfidf_tokens(e.text, resources.stoplist));
    }
    for (const auto& e : bundle.test) {
      docs.push_back(tfidf_tokens(e.text, resources.stoplist));
    }
    for (const auto& e : generated) {
      docs.push_back(tfidf_tokens(e.text, resources.stoplist));
    }
    shared_model = textkit::fit_tfidf(docs);
    have_model = true;
  }

  SimilarityResources local = resources;
  if (have_model) local.tfidf = &shared_model;

  struct Pair {
    std::string name;
    const std::vector<LabeledExample>* generated_side;
    const std::vector<LabeledExample>* reference_side;
  };
  std::vector<Pair> pairs;
  if (!generated.empty()) {
    pairs.push_back({"generated-to-train", &generated, &bundle.train});
    pairs.push_back({"generated-to-test", &generated, &bundle.test});
  }
  pairs.push_back({"train-to-test", &bundle.train, &bundle.test});

  std::vector<SimilarityReport> reports;
  reports.reserve(pairs.size() * metrics.size());
  for (const auto& pair : pairs) {
    for (const auto metric : metrics) {
      SimilarityReport report =
          pairwise_max(*pair.generated_side, *pair.reference_side, metric, local);
      report.pair_name = pair.name;
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

json report_to_json(const SimilarityReport& report) {
  json j;
  j["pair"] = report.pair_name;
  j["metric"] = metric_name(report.metric);
  j["dataset_mean"] = report.dataset_mean;
  json entries = json::array();
  for (const auto& e : report.per_example_max) {
    entries.push_back({{"generated_id", e.generated_id},
                       {"reference_id", e.reference_id},
                       {"score", e.score},
                       {"raw_score", e.raw_score}});
  }
  j["per_example_max"] = std::move(entries);
  if (report.metric == MetricKind::kWordOverlap) {
    const OverlapStats stats = overlap_stats(report);
    j["overlap_stats"] = {{"frac_above_two_thirds", stats.frac_above_two_thirds},
                          {"max_percent", stats.max_percent},
                          {"count_at_max", stats.count_at_max}};
  }
  return j;
}

}  // namespace

void write_audit_csv(const std::vector<SimilarityReport>& reports,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "pair,metric,mean,n\n";
  char buf[32];
  for (const auto& report : reports) {
    std::snprintf(buf, sizeof(buf), "%.12g", report.dataset_mean);
    out << csv_escape(report.pair_name) << ',' << metric_name(report.metric)
        << ',' << buf << ',' << report.per_example_max.size() << '\n';
  }
}

void write_audit_json(const std::vector<SimilarityReport>& reports,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  json j = json::array();
  for (const auto& report : reports) j.push_back(report_to_json(report));
  out << j.dump(2) << '\n';
}

void write_audit_markdown(const std::vector<SimilarityReport>& reports,
                          const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# Similarity audit\n\n";
  out << "| pair | metric | mean max | >2/3 (%) | max (%) | at max |\n";
  out << "|------|--------|---------:|---------:|--------:|-------:|\n";
  char buf[128];
  for (const auto& report : reports) {
    if (report.metric == MetricKind::kWordOverlap) {
      const OverlapStats stats = overlap_stats(report);
      std::snprintf(buf, sizeof(buf), "%.3f | %.1f | %.1f | %zu",
                    report.dataset_mean, 100.0 * stats.frac_above_two_thirds,
                    stats.max_percent, stats.count_at_max);
    } else {
      std::snprintf(buf, sizeof(buf), "%.3f | | | ", report.dataset_mean);
    }
    out << "| " << report.pair_name << " | " << metric_name(report.metric)
        << " | " << buf << " |\n";
  }
}

}  // namespace textaug::similarity
