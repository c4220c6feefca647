#ifndef TEXTAUG_STRINGS_HPP
#define TEXTAUG_STRINGS_HPP

#include <string>
#include <string_view>
#include <vector>

namespace textaug::strings {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower_ascii(std::string_view s);
std::string replace_all(std::string_view s, std::string_view from,
                        std::string_view to);
// Collapses runs of spaces/tabs to a single space.
std::string collapse_spaces(std::string_view s);

// FNV-1a 64-bit hash, the stable content hash used for request fingerprints
// and manifest output digests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace textaug::strings

#endif  // TEXTAUG_STRINGS_HPP
