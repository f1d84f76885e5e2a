#pragma once

#include <string>
#include <string_view>

namespace hypobench {

// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

// First 16 hex chars of sha256_hex; used for stable record ids.
std::string short_digest(std::string_view data);

// SHA-256 of a file's content. Throws DataError if the file cannot be read.
std::string sha256_file_hex(const std::string& path);

}  // namespace hypobench
