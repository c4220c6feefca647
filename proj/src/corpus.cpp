#include "textaug/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "textaug/error.hpp"
#include "textaug/rng.hpp"
#include "textaug/strings.hpp"

namespace textaug::corpus {

using nlohmann::json;

namespace {

std::string escape_tsv(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_tsv(const std::string& s, std::size_t line_no) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (i + 1 >= s.size()) {
      throw Error("line " + std::to_string(line_no) +
                  ": dangling backslash escape");
    }
    switch (s[++i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default:
        throw Error("line " + std::to_string(line_no) +
                    ": unknown escape \\" + std::string(1, s[i]));
    }
  }
  return out;
}

json provenance_to_json(const Provenance& p) {
  json j;
  j["origin"] = p.kind == ProvenanceKind::kOriginal ? "original" : "generated";
  if (p.kind == ProvenanceKind::kGenerated) {
    j["method"] = p.method;
    j["gen_seed"] = p.seed;
    j["prompt_id"] = p.prompt_id;
  }
  return j;
}

Provenance provenance_from_json(const json& record, std::size_t line_no) {
  Provenance p;
  const std::string origin = record.value("origin", "original");
  if (origin == "original") return p;
  if (origin != "generated") {
    throw Error("line " + std::to_string(line_no) + ": unknown origin '" +
                origin + "'");
  }
  p.kind = ProvenanceKind::kGenerated;
  p.method = record.value("method", "");
  p.seed = record.value("gen_seed", std::uint64_t{0});
  p.prompt_id = record.value("prompt_id", "");
  return p;
}

LabeledExample parse_jsonl_record(const std::string& line, std::size_t line_no) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::exception& e) {
    throw Error("line " + std::to_string(line_no) +
                ": malformed JSON record: " + e.what());
  }
  if (!record.is_object() || !record.contains("text") ||
      !record.contains("label") || !record["text"].is_string() ||
      !record["label"].is_string()) {
    throw Error("line " + std::to_string(line_no) +
                ": record must be an object with string `text` and `label`");
  }
  LabeledExample ex;
  ex.text = record["text"].get<std::string>();
  ex.label = record["label"].get<std::string>();
  if (record.contains("id")) {
    if (!record["id"].is_string()) {
      throw Error("line " + std::to_string(line_no) + ": `id` must be a string");
    }
    ex.id = record["id"].get<std::string>();
  }
  ex.provenance = provenance_from_json(record, line_no);
  if (record.contains("flags")) {
    for (const auto& f : record["flags"]) {
      ex.flags.push_back(f.get<std::string>());
    }
  }
  if (strings::trim(ex.text).empty()) {
    throw Error("line " + std::to_string(line_no) + ": empty `text`");
  }
  return ex;
}

LabeledExample parse_tsv_record(const std::string& line, std::size_t line_no) {
  const auto cols = strings::split(line, '\t');
  if (cols.size() < 2) {
    throw Error("line " + std::to_string(line_no) +
                ": expected at least 2 tab-separated columns, got " +
                std::to_string(cols.size()));
  }
  if (cols.size() > 6) {
    throw Error("line " + std::to_string(line_no) +
                ": too many columns (" + std::to_string(cols.size()) + ")");
  }
  LabeledExample ex;
  ex.text = unescape_tsv(cols[0], line_no);
  ex.label = unescape_tsv(cols[1], line_no);
  const std::string method = cols.size() > 2 ? cols[2] : "";
  if (!method.empty()) {
    std::uint64_t seed = 0;
    if (cols.size() > 3 && !cols[3].empty()) {
      try {
        seed = std::stoull(cols[3]);
      } catch (const std::exception&) {
        throw Error("line " + std::to_string(line_no) +
                    ": column 4 (gen_seed) is not an integer");
      }
    }
    ex.provenance = Provenance::generated(
        method, seed, cols.size() > 4 ? unescape_tsv(cols[4], line_no) : "");
  }
  if (cols.size() > 5 && !cols[5].empty()) {
    ex.flags = strings::split(unescape_tsv(cols[5], line_no), ';');
  }
  if (strings::trim(ex.text).empty()) {
    throw Error("line " + std::to_string(line_no) + ": empty text column");
  }
  return ex;
}

std::string jsonl_record(const LabeledExample& ex) {
  json j;
  j["id"] = ex.id;
  j["text"] = ex.text;
  j["label"] = ex.label;
  const json prov = provenance_to_json(ex.provenance);
  for (auto it = prov.begin(); it != prov.end(); ++it) j[it.key()] = it.value();
  if (!ex.flags.empty()) j["flags"] = ex.flags;
  return j.dump();
}

std::string tsv_record(const LabeledExample& ex) {
  std::string line = escape_tsv(ex.text) + "\t" + escape_tsv(ex.label);
  const bool generated = ex.provenance.kind == ProvenanceKind::kGenerated;
  if (generated || !ex.flags.empty()) {
    line += "\t" + (generated ? ex.provenance.method : std::string());
    line += "\t" + (generated ? std::to_string(ex.provenance.seed)
                              : std::string());
    line += "\t" + (generated ? escape_tsv(ex.provenance.prompt_id)
                              : std::string());
  }
  if (!ex.flags.empty()) {
    line += "\t" + escape_tsv(strings::join(ex.flags, ";"));
  }
  return line;
}

// TSV header is optional; recognize the conventional one and skip it.
bool is_tsv_header(const std::string& line) {
  const auto cols = strings::split(line, '\t');
  return cols.size() >= 2 && cols[0] == "text" && cols[1] == "label";
}

}  // namespace

void DatasetBundle::validate() const {
  std::unordered_set<std::string> label_set;
  for (const auto& label : labels) {
    if (!label_set.insert(label).second) {
      throw Error("duplicate label '" + label + "' in bundle inventory");
    }
  }
  std::unordered_set<std::string> all_ids;
  const std::pair<const char*, const std::vector<LabeledExample>*> splits[] = {
      {"train", &train}, {"dev", &dev}, {"test", &test}};
  for (const auto& [name, split] : splits) {
    std::unordered_set<std::string> split_ids;
    for (const auto& ex : *split) {
      if (!label_set.count(ex.label)) {
        throw Error("example '" + ex.id + "' in " + name + " has label '" +
                    ex.label + "' outside the bundle inventory");
      }
      if (!split_ids.insert(ex.id).second) {
        throw Error("duplicate id '" + ex.id + "' in " + name);
      }
      if (!all_ids.insert(ex.id).second) {
        throw Error("id '" + ex.id + "' appears in more than one split");
      }
    }
  }
}

std::map<std::string, std::size_t> DatasetBundle::class_counts(
    const std::vector<LabeledExample>& split) const {
  std::map<std::string, std::size_t> counts;
  for (const auto& label : labels) counts[label] = 0;
  for (const auto& ex : split) ++counts[ex.label];
  return counts;
}

FileFormat parse_format(const std::string& name) {
  if (name == "jsonl") return FileFormat::kJsonl;
  if (name == "tsv") return FileFormat::kTsv;
  throw Error("unknown dataset format '" + name + "' (expected jsonl or tsv)");
}

std::vector<LabeledExample> load_examples(const std::filesystem::path& path,
                                          FileFormat format,
                                          const std::string& id_prefix) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());

  std::vector<LabeledExample> examples;
  std::unordered_set<std::string> explicit_ids;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strings::trim(line).empty()) continue;
    if (format == FileFormat::kTsv && first_content_line &&
        is_tsv_header(line)) {
      first_content_line = false;
      continue;
    }
    first_content_line = false;
    LabeledExample ex = format == FileFormat::kJsonl
                            ? parse_jsonl_record(line, line_no)
                            : parse_tsv_record(line, line_no);
    if (ex.id.empty()) {
      ex.id = id_prefix + "-" + std::to_string(examples.size());
    } else if (!explicit_ids.insert(ex.id).second) {
      throw Error("line " + std::to_string(line_no) + ": duplicate id '" +
                  ex.id + "'");
    }
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) {
    throw Error("no records in " + path.string());
  }
  return examples;
}

void save_examples(const std::vector<LabeledExample>& examples,
                   const std::filesystem::path& path, FileFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& ex : examples) {
    out << (format == FileFormat::kJsonl ? jsonl_record(ex) : tsv_record(ex))
        << '\n';
  }
  if (!out) throw Error("I/O failure writing " + path.string());
}

DatasetBundle load_dataset(const std::filesystem::path& path,
                           FileFormat format) {
  DatasetBundle bundle;
  bundle.task_name = path.stem().string();
  bundle.train = load_examples(path, format, "train");
  std::set<std::string> labels;
  for (const auto& ex : bundle.train) labels.insert(ex.label);
  bundle.labels.assign(labels.begin(), labels.end());
  bundle.validate();
  return bundle;
}

void save_dataset(const DatasetBundle& bundle,
                  const std::filesystem::path& path, FileFormat format) {
  save_examples(bundle.train, path, format);
}

namespace {

std::vector<LabeledExample> subsample_split(
    const std::vector<LabeledExample>& split, const std::string& split_name,
    const std::vector<std::string>& labels, std::size_t per_class,
    Pcg32& rng) {
  std::vector<std::size_t> picked;
  for (const auto& label : labels) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (split[i].label == label) candidates.push_back(i);
    }
    if (candidates.empty()) {
      throw Error("label '" + label + "' absent from " + split_name +
                  " split");
    }
    rng.shuffle(candidates);
    const std::size_t take = std::min(per_class, candidates.size());
    picked.insert(picked.end(), candidates.begin(),
                  candidates.begin() + static_cast<std::ptrdiff_t>(take));
  }
  // Keep original split order in the output.
  std::sort(picked.begin(), picked.end());
  std::vector<LabeledExample> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(split[i]);
  return out;
}

}  // namespace

DatasetBundle subsample(const DatasetBundle& bundle, const SubsampleSpec& spec) {
  if (spec.per_class < 1) throw Error("per_class must be >= 1");
  bundle.validate();

  DatasetBundle out;
  out.task_name = bundle.task_name;
  out.labels = bundle.labels;
  // One seed stream: train draws first, then dev, so the two selections
  // never alias even for identical splits.
  Pcg32 rng(spec.seed);
  out.train = subsample_split(bundle.train, "train", bundle.labels,
                              spec.per_class, rng);
  if (!bundle.dev.empty()) {
    out.dev = subsample_split(bundle.dev, "dev", bundle.labels, spec.per_class,
                              rng);
  }
  out.test = bundle.test;
  return out;
}

}  // namespace textaug::corpus
