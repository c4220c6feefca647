#ifndef TEXTAUG_TEXTKIT_HPP
#define TEXTAUG_TEXTKIT_HPP

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace textaug::textkit {

using TokenList = std::vector<std::string>;
using Stoplist = std::unordered_set<std::string>;

// Lowercases and splits on maximal runs of non-alphanumeric characters.
// ASCII letters/digits and non-ASCII word codepoints survive; punctuation
// (including common Unicode punctuation blocks) separates tokens. Digits are
// retained. No stemming.
TokenList tokenize(std::string_view text);

// One word per line, UTF-8, '#' starts a comment line.
Stoplist load_stoplist(const std::filesystem::path& path);

// Unique tokens not in the stoplist (punctuation already removed upstream).
std::set<std::string> content_words(const TokenList& tokens,
                                    const Stoplist& stoplist);

// Like content_words but keeps duplicates and order (feeds term counts).
TokenList remove_stopwords(const TokenList& tokens, const Stoplist& stoplist);

// TF-IDF vector with L2-normalized weights. Entries are (column, weight)
// sorted by column, zero weights never stored; `norm` caches the Euclidean
// norm of the stored entries (1 after normalization, 0 for empty vectors).
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  double norm = 0.0;
};

struct TfIdfModel {
  std::unordered_map<std::string, std::uint32_t> vocabulary;
  std::vector<double> idf;
  std::size_t doc_count = 0;

  std::string to_json() const;
  static TfIdfModel from_json(const std::string& text);
};

// Fits vocabulary (all distinct tokens, lexicographic column order) and
// smoothed idf: idf(w) = ln((1 + N) / (1 + df(w))) + 1. Errors on an empty
// corpus or a corpus of all-empty documents.
TfIdfModel fit_tfidf(const std::vector<TokenList>& corpus);

// weight(w) = raw count x idf(w) for in-vocabulary words, then L2-normalize.
// Out-of-vocabulary words are dropped; all-OOV input yields the zero vector.
SparseVector transform(const TfIdfModel& model, const TokenList& tokens);

// dot(u,v) / (|u||v|), 0 when either norm is 0, clamped to [0, 1].
double cosine(const SparseVector& u, const SparseVector& v);

}  // namespace textaug::textkit

#endif  // TEXTAUG_TEXTKIT_HPP
