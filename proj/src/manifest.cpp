#include "textaug/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "textaug/error.hpp"
#include "textaug/strings.hpp"

namespace textaug::cli {

using nlohmann::json;

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for hashing");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return strings::fnv1a64_hex(buffer.str());
}

void RunManifest::write(const std::filesystem::path& path) const {
  json j;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["timestamp"] = timestamp;
  j["argv"] = argv;
  j["config"] = config;
  j["cassette_path"] = cassette_path;
  j["cassette_hash"] = cassette_hash;
  j["output_hashes"] = output_hashes;
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed manifest " + path.string() + ": " + e.what());
  }
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.timestamp = j.value("timestamp", std::string{});
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.value("config", std::map<std::string, std::string>{});
    m.cassette_path = j.value("cassette_path", std::string{});
    m.cassette_hash = j.value("cassette_hash", std::string{});
    m.output_hashes =
        j.value("output_hashes", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    throw Error("malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace textaug::cli
