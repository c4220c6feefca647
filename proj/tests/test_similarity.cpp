#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "textaug/corpus.hpp"
#include "textaug/error.hpp"
#include "textaug/providers.hpp"
#include "textaug/rng.hpp"
#include "textaug/similarity.hpp"
#include "textaug/strings.hpp"

#include "support/oracles.hpp"
#include "support/paths.hpp"

using namespace textaug;
using corpus::DatasetBundle;
using corpus::LabeledExample;
using similarity::MetricKind;
using similarity::SimilarityReport;
using similarity::SimilarityResources;

namespace {

const textkit::Stoplist kStop = {"the", "a", "an", "is", "was", "who", "of"};

LabeledExample ex(const std::string& id, const std::string& text,
                  const std::string& label = "x") {
  LabeledExample e;
  e.id = id;
  e.text = text;
  e.label = label;
  return e;
}

std::vector<LabeledExample> to_examples(const std::vector<std::string>& texts,
                                        const std::string& prefix) {
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back(ex(prefix + "-" + std::to_string(i), texts[i]));
  }
  return out;
}

SimilarityResources overlap_resources() {
  SimilarityResources r;
  r.stoplist = &kStop;
  return r;
}

}  // namespace

TEST_CASE("word overlap on identical, disjoint, and stop-word-heavy pairs") {
  CHECK(similarity::word_overlap(ex("a", "telephone invented bell"),
                                 ex("b", "telephone invented bell"), kStop) ==
        doctest::Approx(1.0));
  CHECK(similarity::word_overlap(ex("a", "apples oranges"),
                                 ex("b", "planes trains"), kStop) == 0.0);
  // Same content-word set despite different stop words and order.
  CHECK(similarity::word_overlap(
            ex("a", "Who invented the telephone?"),
            ex("b", "The telephone was invented"), kStop) ==
        doctest::Approx(1.0));
  // An extra content word on one side shrinks the ratio to 2/3.
  CHECK(similarity::word_overlap(
            ex("a", "Who invented the telephone?"),
            ex("b", "the person who invented a telephone"), kStop) ==
        doctest::Approx(2.0 / 3.0));
  // Both sides all stop words: no contamination evidence.
  CHECK(similarity::word_overlap(ex("a", "the a an"), ex("b", "is was of"),
                                 kStop) == 0.0);
  CHECK(similarity::word_overlap(ex("a", "the a an"), ex("b", "telephone"),
                                 kStop) == 0.0);
}

TEST_CASE("word overlap uses the larger content set as denominator") {
  // content(a) = {red}, content(b) = {red, blue, green} -> 1/3.
  CHECK(similarity::word_overlap(ex("a", "red"), ex("b", "red blue green"),
                                 kStop) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("word overlap ignores order, duplication, and stop words") {
  Pcg32 rng(8);
  const std::vector<std::string> bank = {"wolf", "bear", "lynx", "deer", "hawk"};
  const std::vector<std::string> stops = {"the", "a", "is", "of"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> words;
    const std::size_t len = 1 + rng.bounded(6);
    for (std::size_t i = 0; i < len; ++i) {
      words.push_back(bank[rng.bounded(static_cast<std::uint32_t>(bank.size()))]);
    }
    const std::string base = strings::join(words, " ");

    auto mutated = words;
    rng.shuffle(mutated);
    mutated.push_back(mutated[rng.bounded(static_cast<std::uint32_t>(mutated.size()))]);
    mutated.insert(mutated.begin() + rng.bounded(static_cast<std::uint32_t>(mutated.size() + 1)),
                   stops[rng.bounded(static_cast<std::uint32_t>(stops.size()))]);

    const auto reference = ex("r", "wolf bear lynx");
    const double a = similarity::word_overlap(ex("a", base), reference, kStop);
    const double b = similarity::word_overlap(
        ex("b", strings::join(mutated, " ")), reference, kStop);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("word overlap is symmetric") {
  Pcg32 rng(9);
  const std::vector<std::string> bank = {"wolf", "bear", "lynx", "the", "a"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto draw = [&] {
      std::vector<std::string> words;
      const std::size_t len = rng.bounded(7);
      for (std::size_t i = 0; i < len; ++i) {
        words.push_back(bank[rng.bounded(static_cast<std::uint32_t>(bank.size()))]);
      }
      return strings::join(words, " ");
    };
    const auto a = ex("a", draw());
    const auto b = ex("b", draw());
    CHECK(similarity::word_overlap(a, b, kStop) ==
          similarity::word_overlap(b, a, kStop));
  }
}

TEST_CASE("pairwise_max takes per-example maxima and their mean") {
  // g1 scores 0.2 and 0.8 against the two refs, g2 scores 0.2 and 0.4.
  const auto generated = to_examples({"wolf bear lynx deer hawk", "wolf bear"}, "g");
  const auto reference = to_examples({"wolf puma otter moose crane",
                                      "wolf bear lynx deer crane"},
                                     "r");
  const auto report = similarity::pairwise_max(generated, reference,
                                               MetricKind::kWordOverlap,
                                               overlap_resources());
  REQUIRE(report.per_example_max.size() == 2);
  CHECK(report.per_example_max[0].score == doctest::Approx(0.8));
  CHECK(report.per_example_max[0].reference_id == "r-1");
  CHECK(report.per_example_max[1].score == doctest::Approx(0.4));
  CHECK(report.dataset_mean == doctest::Approx(0.6));
}

TEST_CASE("pairwise_max of a list against itself is all ones") {
  const auto docs = to_examples({"wolf bear", "lynx deer", "hawk crane"}, "d");
  const auto report = similarity::pairwise_max(docs, docs,
                                               MetricKind::kWordOverlap,
                                               overlap_resources());
  for (const auto& entry : report.per_example_max) {
    CHECK(entry.score == doctest::Approx(1.0));
  }
  CHECK(report.dataset_mean == doctest::Approx(1.0));
}

TEST_CASE("pairwise_max breaks ties by lowest reference index") {
  const auto generated = to_examples({"wolf bear"}, "g");
  const auto reference = to_examples({"lynx", "wolf bear", "wolf bear"}, "r");
  const auto report = similarity::pairwise_max(generated, reference,
                                               MetricKind::kWordOverlap,
                                               overlap_resources());
  CHECK(report.per_example_max[0].reference_id == "r-1");
}

TEST_CASE("pairwise_max rejects an empty reference set") {
  const auto docs = to_examples({"wolf"}, "d");
  CHECK_THROWS_AS(similarity::pairwise_max(docs, {}, MetricKind::kWordOverlap,
                                           overlap_resources()),
                  Error);
}

TEST_CASE("pairwise_max results are order-stable under threads") {
  Pcg32 rng(77);
  const std::vector<std::string> bank = {"ant", "bee", "cat", "dog", "eel",
                                         "fox"};
  std::vector<std::string> gen_texts, ref_texts;
  for (int i = 0; i < 40; ++i) {
    std::vector<std::string> words;
    const std::size_t len = 1 + rng.bounded(6);
    for (std::size_t w = 0; w < len; ++w) {
      words.push_back(bank[rng.bounded(static_cast<std::uint32_t>(bank.size()))]);
    }
    (i % 2 ? gen_texts : ref_texts).push_back(strings::join(words, " "));
  }
  const auto generated = to_examples(gen_texts, "g");
  const auto reference = to_examples(ref_texts, "r");

  auto serial = overlap_resources();
  serial.jobs = 1;
  auto parallel = overlap_resources();
  parallel.jobs = 8;
  const auto a = similarity::pairwise_max(generated, reference,
                                          MetricKind::kWordOverlap, serial);
  const auto b = similarity::pairwise_max(generated, reference,
                                          MetricKind::kWordOverlap, parallel);
  REQUIRE(a.per_example_max.size() == b.per_example_max.size());
  for (std::size_t i = 0; i < a.per_example_max.size(); ++i) {
    CHECK(a.per_example_max[i].generated_id == b.per_example_max[i].generated_id);
    CHECK(a.per_example_max[i].reference_id == b.per_example_max[i].reference_id);
    CHECK(a.per_example_max[i].score == b.per_example_max[i].score);
  }
}

TEST_CASE("enlarging the reference set never lowers a per-example max") {
  const auto generated = to_examples({"wolf bear lynx", "deer hawk"}, "g");
  auto reference = to_examples({"wolf", "deer"}, "r");
  const auto before = similarity::pairwise_max(generated, reference,
                                               MetricKind::kWordOverlap,
                                               overlap_resources());
  reference.push_back(ex("r-2", "wolf bear lynx"));
  const auto after = similarity::pairwise_max(generated, reference,
                                              MetricKind::kWordOverlap,
                                              overlap_resources());
  for (std::size_t i = 0; i < before.per_example_max.size(); ++i) {
    CHECK(after.per_example_max[i].score >=
          before.per_example_max[i].score - 1e-12);
  }
}

TEST_CASE("overlap_stats on a hand-built report") {
  SimilarityReport report;
  report.metric = MetricKind::kWordOverlap;
  report.pair_name = "generated-to-test";
  const std::vector<double> scores = {0.5, 0.7, 1.0, 1.0};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    report.per_example_max.push_back(
        {"g-" + std::to_string(i), "r-0", scores[i], scores[i]});
  }
  report.dataset_mean = 0.8;
  const auto stats = similarity::overlap_stats(report);
  CHECK(stats.frac_above_two_thirds == doctest::Approx(0.75));
  CHECK(stats.max_percent == doctest::Approx(100.0));
  CHECK(stats.count_at_max == 2);
}

TEST_CASE("overlap_stats handles the all-zero report and rejects other metrics") {
  SimilarityReport zeros;
  zeros.metric = MetricKind::kWordOverlap;
  zeros.per_example_max = {{"g-0", "r-0", 0.0, 0.0}, {"g-1", "r-0", 0.0, 0.0}};
  const auto stats = similarity::overlap_stats(zeros);
  CHECK(stats.frac_above_two_thirds == 0.0);
  CHECK(stats.max_percent == 0.0);
  CHECK(stats.count_at_max == 2);

  SimilarityReport wrong;
  wrong.metric = MetricKind::kTfIdfCosine;
  wrong.per_example_max = zeros.per_example_max;
  CHECK_THROWS_AS(similarity::overlap_stats(wrong), Error);
}

TEST_CASE("threshold is strictly greater than two thirds") {
  SimilarityReport report;
  report.metric = MetricKind::kWordOverlap;
  report.per_example_max = {{"g-0", "r", 2.0 / 3.0, 2.0 / 3.0},
                            {"g-1", "r", 2.0 / 3.0 + 1e-6, 2.0 / 3.0 + 1e-6}};
  const auto stats = similarity::overlap_stats(report);
  CHECK(stats.frac_above_two_thirds == doctest::Approx(0.5));
}

namespace {

DatasetBundle audit_bundle(const std::vector<std::string>& train,
                           const std::vector<std::string>& test) {
  DatasetBundle b;
  b.task_name = "micro";
  b.labels = {"x"};
  b.train = to_examples(train, "train");
  b.test = to_examples(test, "test");
  return b;
}

SimilarityResources full_resources(const providers::HashEmbedder& embedder) {
  SimilarityResources r;
  r.stoplist = &kStop;
  r.embedder = [&embedder](const std::vector<std::string>& texts) {
    return embedder(texts);
  };
  return r;
}

const std::vector<MetricKind> kAllMetrics = {MetricKind::kEmbeddingCosine,
                                             MetricKind::kTfIdfCosine,
                                             MetricKind::kWordOverlap};

}  // namespace

TEST_CASE("audit produces one report per pair and metric") {
  const auto bundle = audit_bundle({"wolf bear", "lynx deer"},
                                   {"hawk crane", "wolf lynx"});
  const auto generated = to_examples({"wolf hawk", "bear deer"}, "gen");
  providers::HashEmbedder embedder(kStop);
  const auto reports =
      similarity::audit(bundle, generated, kAllMetrics, full_resources(embedder));
  REQUIRE(reports.size() == 9);

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : reports) {
    seen.insert({r.pair_name, similarity::metric_name(r.metric)});
  }
  CHECK(seen.size() == 9);
  CHECK(seen.count({"generated-to-train", "word_overlap"}));
  CHECK(seen.count({"generated-to-test", "tfidf_cosine"}));
  CHECK(seen.count({"train-to-test", "embedding_cosine"}));
}

TEST_CASE("audit with no generated data reports only train-to-test") {
  const auto bundle = audit_bundle({"wolf bear"}, {"wolf lynx"});
  providers::HashEmbedder embedder(kStop);
  const auto reports =
      similarity::audit(bundle, {}, kAllMetrics, full_resources(embedder));
  REQUIRE(reports.size() == 3);
  for (const auto& r : reports) CHECK(r.pair_name == "train-to-test");
}

TEST_CASE("audit of generated identical to train scores one everywhere") {
  const auto bundle = audit_bundle({"wolf bear", "lynx deer"}, {"hawk"});
  auto generated = bundle.train;
  for (auto& e : generated) e.id = "gen-" + e.id;
  providers::HashEmbedder embedder(kStop);
  const auto reports =
      similarity::audit(bundle, generated, kAllMetrics, full_resources(embedder));
  for (const auto& r : reports) {
    if (r.pair_name != "generated-to-train") continue;
    CHECK(r.dataset_mean == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("audit matches the brute-force reference on a fixed micro corpus") {
  const std::vector<std::string> train = {"wolf bear lynx", "deer hawk",
                                          "crane wolf", "bear bear deer"};
  const std::vector<std::string> test = {"wolf lynx", "hawk crane deer",
                                         "lynx lynx", "bear"};
  const std::vector<std::string> gen = {"wolf bear", "deer crane hawk",
                                        "lynx wolf bear", "hawk"};
  auto bundle = audit_bundle(train, test);
  const auto generated = to_examples(gen, "gen");
  providers::HashEmbedder embedder(kStop);
  const auto reports =
      similarity::audit(bundle, generated, kAllMetrics, full_resources(embedder));

  const std::set<std::string> stop(kStop.begin(), kStop.end());

  // Joint TF-IDF corpus across all three sides, as the audit fits it.
  std::vector<std::vector<std::string>> dense_docs;
  for (const auto& t : train) dense_docs.push_back(oracle::words(t));
  for (const auto& t : test) dense_docs.push_back(oracle::words(t));
  for (const auto& t : gen) dense_docs.push_back(oracle::words(t));
  const auto dense = oracle::DenseTfIdf::fit(dense_docs);

  const auto tfidf_score = [&](const std::string& a, const std::string& b) {
    return oracle::dense_cosine(dense.vectorize(oracle::words(a)),
                                dense.vectorize(oracle::words(b)));
  };
  const auto overlap_score = [&](const std::string& a, const std::string& b) {
    return oracle::word_overlap(a, b, stop);
  };
  const auto embed_score = [&](const std::string& a, const std::string& b) {
    const auto vecs = embedder({a, b});
    return oracle::dense_cosine(vecs[0], vecs[1]);
  };

  for (const auto& report : reports) {
    const std::vector<std::string>* gen_side = nullptr;
    const std::vector<std::string>* ref_side = nullptr;
    if (report.pair_name == "generated-to-train") {
      gen_side = &gen;
      ref_side = &train;
    } else if (report.pair_name == "generated-to-test") {
      gen_side = &gen;
      ref_side = &test;
    } else {
      gen_side = &train;
      ref_side = &test;
    }
    std::vector<double> want;
    if (report.metric == MetricKind::kWordOverlap) {
      want = oracle::pairwise_maxima(*gen_side, *ref_side, overlap_score);
    } else if (report.metric == MetricKind::kTfIdfCosine) {
      want = oracle::pairwise_maxima(*gen_side, *ref_side, tfidf_score);
    } else {
      want = oracle::pairwise_maxima(*gen_side, *ref_side, embed_score);
    }
    REQUIRE(report.per_example_max.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(report.per_example_max[i].score ==
            doctest::Approx(want[i]).epsilon(1e-9));
    }
    CHECK(report.dataset_mean ==
          doctest::Approx(oracle::mean(want)).epsilon(1e-9));
  }
}

TEST_CASE("report writers emit the documented shapes") {
  testsupport::TempDir tmp;
  const auto bundle = audit_bundle({"wolf bear", "lynx deer"}, {"wolf lynx"});
  const auto generated = to_examples({"wolf bear deer"}, "gen");
  providers::HashEmbedder embedder(kStop);
  const auto reports =
      similarity::audit(bundle, generated, kAllMetrics, full_resources(embedder));

  similarity::write_audit_csv(reports, tmp / "audit.csv");
  similarity::write_audit_json(reports, tmp / "audit.json");
  similarity::write_audit_markdown(reports, tmp / "audit.md");

  const auto csv = testsupport::read_file(tmp / "audit.csv");
  CHECK(csv.rfind("pair,metric,mean,n\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);  // header + 9 rows

  const auto json_text = testsupport::read_file(tmp / "audit.json");
  CHECK(json_text.find("generated-to-train") != std::string::npos);
  CHECK(json_text.find("per_example_max") != std::string::npos);

  const auto md = testsupport::read_file(tmp / "audit.md");
  CHECK(md.find("| pair |") != std::string::npos);
  CHECK(md.find("train-to-test") != std::string::npos);
}

TEST_CASE("metric names parse and print consistently") {
  for (const auto metric : kAllMetrics) {
    CHECK(similarity::parse_metric(similarity::metric_name(metric)) == metric);
  }
  CHECK_THROWS_AS(similarity::parse_metric("levenshtein"), Error);
}
