#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sb {

/// Shortest round-trip text for a double (17 significant digits).
std::string fmt17(double v);

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ull);
std::string hex64(std::uint64_t h);

/// Write via a sibling temp file and rename, so readers never see partial output.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace sb
