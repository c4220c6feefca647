#ifndef TEXTAUG_MANIFEST_HPP
#define TEXTAUG_MANIFEST_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace textaug::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything needed to re-execute a CLI run byte-identically in replay mode:
// the original argv, the fully resolved configuration, the cassette content
// hash, and the FNV-1a 64 digest of every output file.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::string timestamp;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config;
  std::string cassette_path;
  std::string cassette_hash;
  std::map<std::string, std::string> output_hashes;

  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

std::string hash_file(const std::filesystem::path& path);

}  // namespace textaug::cli

#endif  // TEXTAUG_MANIFEST_HPP
