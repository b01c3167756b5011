#pragma once

#include <string>
#include <string_view>

namespace cpc {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes. Throws IoError when it cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace cpc
