#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sentinel {

std::string sha256_hex(std::string_view data);
std::string hmac_sha256_hex(std::string_view key, std::string_view data);

/// Constant-time comparison; lengths are compared first (length is not secret).
bool constant_time_equals(std::string_view a, std::string_view b);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

} // namespace sentinel
