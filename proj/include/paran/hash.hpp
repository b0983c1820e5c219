#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace paran {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// First 8 bytes of SHA-256 as a big-endian integer; used to seed generators.
std::uint64_t sha256_prefix64(std::string_view data);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace paran
