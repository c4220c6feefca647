#include "textaug/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "textaug/error.hpp"
#include "textaug/strings.hpp"

namespace textaug::providers {

using nlohmann::json;

std::string replay_mode_name(ReplayMode mode) {
  switch (mode) {
    case ReplayMode::kRecord: return "record";
    case ReplayMode::kReplay: return "replay";
    case ReplayMode::kPassthrough: return "passthrough";
  }
  throw Error("unknown replay mode");
}

ReplayMode parse_replay_mode(const std::string& name) {
  if (name == "record") return ReplayMode::kRecord;
  if (name == "replay") return ReplayMode::kReplay;
  if (name == "passthrough") return ReplayMode::kPassthrough;
  throw ConfigError("unknown replay mode '" + name +
                    "' (expected record, replay, or passthrough)");
}

namespace {

std::string provider_kind_name(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kChat: return "chat";
    case ProviderKind::kTranslate: return "translate";
    case ProviderKind::kEmbed: return "embed";
  }
  throw Error("unknown provider kind");
}

ProviderKind parse_provider_kind(const std::string& name) {
  if (name == "chat") return ProviderKind::kChat;
  if (name == "translate") return ProviderKind::kTranslate;
  if (name == "embed") return ProviderKind::kEmbed;
  throw Error("unknown provider kind '" + name + "'");
}

std::string iso_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string canonical_chat_request(const ChatRequest& req) {
  if (req.prompt.empty()) throw ConfigError("chat request prompt is empty");
  json j;
  j["kind"] = "chat";
  j["max_output_tokens"] = req.max_output_tokens;
  j["model"] = req.model_id;
  j["prompt"] = req.prompt;
  j["temperature"] = req.temperature;
  return j.dump();
}

std::string canonical_translate_request(const std::string& text,
                                        const std::string& source_lang,
                                        const std::string& target_lang) {
  json j;
  j["kind"] = "translate";
  j["q"] = text;
  j["source"] = source_lang;
  j["target"] = target_lang;
  return j.dump();
}

std::string canonical_embed_request(const std::vector<std::string>& texts,
                                    const std::string& model_id) {
  json j;
  j["input"] = texts;
  j["kind"] = "embed";
  j["model"] = model_id;
  return j.dump();
}

std::string fingerprint(const std::string& canonical_request) {
  return strings::fnv1a64_hex(canonical_request);
}

Cassette::Cassette(Cassette&& other) noexcept {
  std::lock_guard<std::mutex> lock(other.mutex_);
  path_ = std::move(other.path_);
  records_ = std::move(other.records_);
  by_fingerprint_ = std::move(other.by_fingerprint_);
  cursors_ = std::move(other.cursors_);
}

Cassette& Cassette::operator=(Cassette&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    path_ = std::move(other.path_);
    records_ = std::move(other.records_);
    by_fingerprint_ = std::move(other.by_fingerprint_);
    cursors_ = std::move(other.cursors_);
  }
  return *this;
}

Cassette Cassette::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open cassette " + path.string());
  Cassette cassette;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strings::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("cassette " + path.string() + " line " +
                  std::to_string(line_no) + ": " + e.what());
    }
    try {
      ProviderCallRecord record;
      record.fingerprint = j.at("fingerprint").get<std::string>();
      record.kind = parse_provider_kind(j.at("kind").get<std::string>());
      record.request = j.at("request").get<std::string>();
      record.response = j.at("response").get<std::string>();
      record.timestamp = j.value("timestamp", std::string{});
      cassette.records_.push_back(std::move(record));
      cassette.index_record(cassette.records_.size() - 1);
    } catch (const json::exception& e) {
      throw Error("cassette " + path.string() + " line " +
                  std::to_string(line_no) + ": " + e.what());
    }
  }
  return cassette;
}

Cassette Cassette::open(const std::filesystem::path& path) {
  Cassette cassette;
  if (std::filesystem::exists(path)) {
    cassette = load(path);
  } else if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  cassette.path_ = path;
  return cassette;
}

void Cassette::index_record(std::size_t i) {
  by_fingerprint_[records_[i].fingerprint].push_back(i);
}

void Cassette::append(const ProviderCallRecord& record) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (path_) {
    std::ofstream out(*path_, std::ios::app);
    if (!out) throw Error("cannot append to cassette " + path_->string());
    json j;
    j["fingerprint"] = record.fingerprint;
    j["kind"] = provider_kind_name(record.kind);
    j["request"] = record.request;
    j["response"] = record.response;
    j["timestamp"] = record.timestamp;
    out << j.dump() << '\n';
  }
  records_.push_back(record);
  index_record(records_.size() - 1);
}

std::optional<std::string> Cassette::next_response(const std::string& fp) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = by_fingerprint_.find(fp);
  if (it == by_fingerprint_.end()) return std::nullopt;
  std::size_t& cursor = cursors_[fp];
  if (cursor >= it->second.size()) return std::nullopt;
  return records_[it->second[cursor++]].response;
}

bool Cassette::contains(const std::string& fp) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return by_fingerprint_.count(fp) > 0;
}

void Cassette::reset_cursors() {
  std::lock_guard<std::mutex> lock(mutex_);
  cursors_.clear();
}

ProviderConfig ProviderConfig::from_env() {
  ProviderConfig config;
  if (const char* v = std::getenv("AUG_API_BASE_URL")) config.base_url = v;
  if (const char* v = std::getenv("AUG_API_KEY")) config.api_key = v;
  return config;
}

ServiceClient::ServiceClient(ProviderConfig config, ReplayMode mode,
                             Cassette* cassette)
    : config_(std::move(config)), mode_(mode), cassette_(cassette) {
  if (mode_ != ReplayMode::kPassthrough && !cassette_) {
    throw ConfigError(replay_mode_name(mode_) + " mode requires a cassette");
  }
  if (!config_.sleep) {
    config_.sleep = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
  if (!config_.timestamp) config_.timestamp = iso_utc_now;
}

void ServiceClient::require_api_key() const {
  if (config_.base_url.empty()) {
    throw ConfigError("provider base URL missing; set AUG_API_BASE_URL");
  }
  if (config_.api_key.empty()) {
    throw ConfigError("provider API key missing; set AUG_API_KEY");
  }
}

void ServiceClient::rate_limit() {
  if (config_.requests_per_second <= 0.0) return;
  const auto interval = std::chrono::milliseconds(
      static_cast<long>(std::lround(1000.0 / config_.requests_per_second)));
  const auto now = std::chrono::steady_clock::now();
  if (!any_network_call_) {
    any_network_call_ = true;
    last_network_call_ = now;
    return;
  }
  auto logical = std::max(now, last_network_call_);
  const auto next_allowed = last_network_call_ + interval;
  if (logical < next_allowed) {
    config_.sleep(std::chrono::duration_cast<std::chrono::milliseconds>(
        next_allowed - logical));
    logical = next_allowed;
  }
  last_network_call_ = logical;
}

std::string ServiceClient::http_post_json(const std::string& path,
                                          const std::string& body,
                                          bool with_auth) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (with_auth) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    rate_limit();
    ++network_calls_;
    auto res = client.Post(path, headers, body, "application/json");
    if (res) {
      if (res->status == 200) return res->body;
      if (res->status != 429 && res->status < 500) {
        throw ProviderError("HTTP " + std::to_string(res->status) + " from " +
                            path + ": " + res->body);
      }
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      last_error =
          std::string("connection error: ") + httplib::to_string(res.error());
    }
    if (attempt < config_.max_attempts) {
      config_.sleep(config_.backoff_base * (1LL << (attempt - 1)));
    }
  }
  throw ProviderError("request to " + path + " failed after " +
                      std::to_string(config_.max_attempts) +
                      " attempts; last error: " + last_error);
}

std::string ServiceClient::complete_call(
    ProviderKind kind, const std::string& canonical,
    const std::function<std::string()>& perform) {
  const std::string fp = fingerprint(canonical);
  if (mode_ == ReplayMode::kReplay) {
    auto response = cassette_->next_response(fp);
    if (!response) {
      throw ProviderError("cassette miss: no unconsumed " +
                          provider_kind_name(kind) +
                          " record for fingerprint " + fp);
    }
    return *response;
  }

  require_api_key();
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string response = perform();
  if (mode_ == ReplayMode::kRecord) {
    ProviderCallRecord record;
    record.fingerprint = fp;
    record.kind = kind;
    record.request = canonical;
    record.response = response;
    record.timestamp = config_.timestamp();
    cassette_->append(record);
  }
  return response;
}

std::string ServiceClient::chat_complete(const ChatRequest& req) {
  const std::string canonical = canonical_chat_request(req);
  return complete_call(ProviderKind::kChat, canonical, [&] {
    json body;
    body["model"] = req.model_id;
    body["messages"] = json::array(
        {json{{"role", "user"}, {"content", req.prompt}}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_output_tokens;
    const std::string raw =
        http_post_json(config_.chat_path, body.dump(), /*with_auth=*/true);
    try {
      const json j = json::parse(raw);
      return j.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const json::exception& e) {
      throw ProviderError(std::string("malformed chat response: ") + e.what());
    }
  });
}

std::string ServiceClient::translate(const std::string& text,
                                     const std::string& source_lang,
                                     const std::string& target_lang) {
  if (target_lang == source_lang) return text;
  const std::string canonical =
      canonical_translate_request(text, source_lang, target_lang);
  return complete_call(ProviderKind::kTranslate, canonical, [&] {
    json body;
    body["q"] = text;
    body["source"] = source_lang;
    body["target"] = target_lang;
    body["format"] = "text";
    if (!config_.api_key.empty()) body["api_key"] = config_.api_key;
    const std::string raw =
        http_post_json(config_.translate_path, body.dump(), /*with_auth=*/false);
    try {
      return json::parse(raw).at("translatedText").get<std::string>();
    } catch (const json::exception& e) {
      throw ProviderError(std::string("malformed translate response: ") +
                          e.what());
    }
  });
}

std::vector<std::vector<double>> ServiceClient::embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) throw ConfigError("embed requires a non-empty text list");
  const std::string canonical =
      canonical_embed_request(texts, config_.embed_model);
  // Cassettes store embeddings as a JSON array of arrays, so record and
  // replay share one parse path.
  const std::string stored =
      complete_call(ProviderKind::kEmbed, canonical, [&] {
        json body;
        body["model"] = config_.embed_model;
        body["input"] = texts;
        const std::string raw =
            http_post_json(config_.embed_path, body.dump(), /*with_auth=*/true);
        try {
          const json j = json::parse(raw);
          std::vector<std::pair<std::size_t, json>> rows;
          for (const auto& item : j.at("data")) {
            rows.emplace_back(item.at("index").get<std::size_t>(),
                              item.at("embedding"));
          }
          std::sort(rows.begin(), rows.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });
          json arrays = json::array();
          for (auto& [index, embedding] : rows) arrays.push_back(std::move(embedding));
          return arrays.dump();
        } catch (const json::exception& e) {
          throw ProviderError(std::string("malformed embedding response: ") +
                              e.what());
        }
      });

  std::vector<std::vector<double>> vectors;
  try {
    vectors = json::parse(stored).get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed embedding record: ") + e.what());
  }
  if (vectors.size() != texts.size()) {
    throw ProviderError("embedding count mismatch: got " +
                        std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) {
      throw ProviderError("embedding dimension mismatch within batch");
    }
  }
  return vectors;
}

HashEmbedder::HashEmbedder(textkit::Stoplist stoplist, std::size_t dims)
    : stoplist_(std::move(stoplist)), dims_(dims) {
  if (dims_ == 0) throw ConfigError("hash embedder dimension must be positive");
}

std::vector<std::vector<double>> HashEmbedder::operator()(
    const std::vector<std::string>& texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> v(dims_, 0.0);
    for (const auto& token :
         textkit::remove_stopwords(textkit::tokenize(text), stoplist_)) {
      v[strings::fnv1a64(token) % dims_] += 1.0;
    }
    double sum_sq = 0.0;
    for (double x : v) sum_sq += x * x;
    if (sum_sq > 0.0) {
      const double norm = std::sqrt(sum_sq);
      for (double& x : v) x /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace textaug::providers
