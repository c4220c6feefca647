#include "textaug/textkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "textaug/error.hpp"
#include "textaug/strings.hpp"

namespace textaug::textkit {

using nlohmann::json;

namespace {

// Unicode blocks treated as punctuation/symbols even though they are
// non-ASCII: general punctuation (curly quotes, dashes, ellipsis), currency,
// letterlike/arrows/math/misc symbols, CJK punctuation, fullwidth forms.
bool is_punct_codepoint(char32_t cp) {
  if ((cp >= 0x00A0 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7)
    return true;
  if (cp >= 0x2000 && cp <= 0x206F) return true;
  if (cp >= 0x20A0 && cp <= 0x20CF) return true;
  if (cp >= 0x2100 && cp <= 0x2BFF) return true;
  if (cp >= 0x3000 && cp <= 0x303F) return true;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return true;
  if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
      (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65))
    return true;
  return false;
}

bool is_word_codepoint(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  return !is_punct_codepoint(cp);
}

// ASCII plus Latin-1 letter lowercasing; other codepoints pass through.
char32_t lower_codepoint(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes the codepoint at `i`, advancing `i`. Invalid bytes decode to
// U+FFFD so they act as separators.
char32_t next_codepoint(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) {
    return static_cast<unsigned char>(s[k]);
  };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const unsigned char bk = byte(i + static_cast<std::size_t>(k));
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

}  // namespace

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = next_codepoint(text, i);
    if (is_word_codepoint(cp) && cp != 0xFFFD) {
      append_utf8(current, lower_codepoint(cp));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Stoplist load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stop-word list " + path.string());
  Stoplist stoplist;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string word = strings::trim(line);
    if (word.empty() || word[0] == '#') continue;
    stoplist.insert(strings::to_lower_ascii(word));
  }
  return stoplist;
}

std::set<std::string> content_words(const TokenList& tokens,
                                    const Stoplist& stoplist) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    if (!stoplist.count(t)) out.insert(t);
  }
  return out;
}

TokenList remove_stopwords(const TokenList& tokens, const Stoplist& stoplist) {
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stoplist.count(t)) out.push_back(t);
  }
  return out;
}

TfIdfModel fit_tfidf(const std::vector<TokenList>& corpus) {
  if (corpus.empty()) throw Error("cannot fit TF-IDF on an empty corpus");

  std::map<std::string, std::size_t> df;  // ordered: column order by word
  for (const auto& doc : corpus) {
    std::set<std::string> seen(doc.begin(), doc.end());
    for (const auto& w : seen) ++df[w];
  }
  if (df.empty()) {
    throw Error("cannot fit TF-IDF: every document in the corpus is empty");
  }

  TfIdfModel model;
  model.doc_count = corpus.size();
  model.idf.reserve(df.size());
  const double n = static_cast<double>(corpus.size());
  std::uint32_t column = 0;
  for (const auto& [word, count] : df) {
    model.vocabulary.emplace(word, column++);
    model.idf.push_back(
        std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return model;
}

SparseVector transform(const TfIdfModel& model, const TokenList& tokens) {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens) {
    const auto it = model.vocabulary.find(t);
    if (it != model.vocabulary.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(counts.size());
  double sum_sq = 0.0;
  for (const auto& [column, count] : counts) {
    const double w = count * model.idf[column];
    v.entries.emplace_back(column, w);
    sum_sq += w * w;
  }
  const double norm = std::sqrt(sum_sq);
  if (norm > 0.0) {
    for (auto& [column, w] : v.entries) w /= norm;
    v.norm = 1.0;
  }
  return v;
}

double cosine(const SparseVector& u, const SparseVector& v) {
  if (u.norm == 0.0 || v.norm == 0.0) return 0.0;
  double dot = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < u.entries.size() && j < v.entries.size()) {
    if (u.entries[i].first == v.entries[j].first) {
      dot += u.entries[i].second * v.entries[j].second;
      ++i;
      ++j;
    } else if (u.entries[i].first < v.entries[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return std::clamp(dot / (u.norm * v.norm), 0.0, 1.0);
}

std::string TfIdfModel::to_json() const {
  std::vector<std::string> words(vocabulary.size());
  for (const auto& [word, column] : vocabulary) words[column] = word;
  json j;
  j["doc_count"] = doc_count;
  j["vocabulary"] = words;  // index order
  j["idf"] = idf;
  return j.dump();
}

TfIdfModel TfIdfModel::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed TF-IDF model JSON: ") + e.what());
  }
  TfIdfModel model;
  model.doc_count = j.at("doc_count").get<std::size_t>();
  const auto words = j.at("vocabulary").get<std::vector<std::string>>();
  model.idf = j.at("idf").get<std::vector<double>>();
  if (words.size() != model.idf.size()) {
    throw Error("TF-IDF model JSON: vocabulary/idf size mismatch");
  }
  for (std::uint32_t i = 0; i < words.size(); ++i) {
    model.vocabulary.emplace(words[i], i);
  }
  return model;
}

}  // namespace textaug::textkit
