#ifndef TEXTAUG_PROVIDERS_HPP
#define TEXTAUG_PROVIDERS_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "textaug/textkit.hpp"

namespace textaug::providers {

enum class ProviderKind { kChat, kTranslate, kEmbed };
enum class ReplayMode { kRecord, kReplay, kPassthrough };

std::string replay_mode_name(ReplayMode mode);
ReplayMode parse_replay_mode(const std::string& name);

struct ChatRequest {
  std::string prompt;
  double temperature = 1.0;
  int max_output_tokens = 1024;
  std::string model_id = "gpt-3.5-turbo";
};

// Canonical request payloads: key-sorted, compact JSON. The fingerprint is
// FNV-1a 64 over that serialization, so semantically equal requests map to
// equal fingerprints on every platform.
std::string canonical_chat_request(const ChatRequest& req);
std::string canonical_translate_request(const std::string& text,
                                        const std::string& source_lang,
                                        const std::string& target_lang);
std::string canonical_embed_request(const std::vector<std::string>& texts,
                                    const std::string& model_id);
std::string fingerprint(const std::string& canonical_request);

struct ProviderCallRecord {
  std::string fingerprint;
  ProviderKind kind = ProviderKind::kChat;
  std::string request;   // canonical request JSON
  std::string response;  // chat/translate: text; embed: JSON array of arrays
  std::string timestamp;
};

// Append-only JSONL log of provider calls. Replay consumes responses per
// fingerprint in recorded order; reads after load are cursor bumps only.
class Cassette {
 public:
  Cassette() = default;
  Cassette(Cassette&& other) noexcept;
  Cassette& operator=(Cassette&& other) noexcept;
  Cassette(const Cassette&) = delete;
  Cassette& operator=(const Cassette&) = delete;

  // Loads an existing cassette; missing file is an error.
  static Cassette load(const std::filesystem::path& path);
  // Opens for recording: loads existing records when present, creates
  // otherwise. Appends write through to disk.
  static Cassette open(const std::filesystem::path& path);

  void append(const ProviderCallRecord& record);
  // Next unconsumed response for this fingerprint, in recorded order.
  std::optional<std::string> next_response(const std::string& fp);
  bool contains(const std::string& fp) const;
  std::size_t size() const { return records_.size(); }
  const std::vector<ProviderCallRecord>& records() const { return records_; }
  void reset_cursors();

 private:
  void index_record(std::size_t i);

  std::optional<std::filesystem::path> path_;
  std::vector<ProviderCallRecord> records_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_fingerprint_;
  std::unordered_map<std::string, std::size_t> cursors_;
  mutable std::mutex mutex_;
};

struct ProviderConfig {
  std::string base_url;  // scheme://host[:port]
  std::string api_key;
  std::string chat_model = "gpt-3.5-turbo";
  std::string embed_model = "all-minilm-l6-v2";
  std::string chat_path = "/v1/chat/completions";
  std::string translate_path = "/translate";
  std::string embed_path = "/v1/embeddings";
  double requests_per_second = 1.0;  // token-bucket refill rate
  int max_attempts = 5;
  std::chrono::milliseconds backoff_base{1000};
  // Injection points so tests and the fixture generator stay fast and
  // deterministic.
  std::function<void(std::chrono::milliseconds)> sleep;
  std::function<std::string()> timestamp;

  static ProviderConfig from_env();
};

// One client per provider endpoint set. Replay mode never constructs an HTTP
// client or opens a connection. Record mode retries transient failures with
// exponential backoff (base 1s, factor 2, max 5 attempts) and rate-limits
// network calls with a token bucket.
class ServiceClient {
 public:
  ServiceClient(ProviderConfig config, ReplayMode mode, Cassette* cassette);

  std::string chat_complete(const ChatRequest& req);
  // Two-letter BCP-47-style codes; target == source returns the input
  // without touching network or cassette.
  std::string translate(const std::string& text, const std::string& source_lang,
                        const std::string& target_lang);
  // One vector per text, all the same dimension. Empty input is an error.
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);

  ReplayMode mode() const { return mode_; }
  // Number of network round-trips attempted; stays 0 in Replay mode.
  std::size_t network_calls() const { return network_calls_; }

 private:
  std::string complete_call(ProviderKind kind, const std::string& canonical,
                            const std::function<std::string()>& perform);
  std::string http_post_json(const std::string& path, const std::string& body,
                             bool with_auth);
  void rate_limit();
  void require_api_key() const;

  ProviderConfig config_;
  ReplayMode mode_;
  Cassette* cassette_;
  std::size_t network_calls_ = 0;
  std::chrono::steady_clock::time_point last_network_call_{};
  bool any_network_call_ = false;
  std::mutex mutex_;
};

// Offline stand-in embedder: 256-dim hashed bag of content words, L2
// normalized. Deterministic and order-invariant but NOT semantically
// meaningful; intended for pipeline tests and offline audits only.
class HashEmbedder {
 public:
  explicit HashEmbedder(textkit::Stoplist stoplist, std::size_t dims = 256);
  std::vector<std::vector<double>> operator()(
      const std::vector<std::string>& texts) const;
  std::size_t dims() const { return dims_; }

 private:
  textkit::Stoplist stoplist_;
  std::size_t dims_;
};

}  // namespace textaug::providers

#endif  // TEXTAUG_PROVIDERS_HPP
