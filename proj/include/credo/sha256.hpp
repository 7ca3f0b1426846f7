#pragma once

#include <string>
#include <string_view>

namespace credo {

// SHA-256 digest as a lowercase hex string. Used for manifest content hashes.
std::string sha256_hex(std::string_view data);

}  // namespace credo
