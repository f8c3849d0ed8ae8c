#pragma once

#include <string>
#include <string_view>

namespace aidx {

/// SHA-256 digest of `data`, lowercase hex. Used for manifest integrity
/// columns only.
std::string sha256_hex(std::string_view data);

}  // namespace aidx
