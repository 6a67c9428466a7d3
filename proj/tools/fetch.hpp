#pragma once

#include <string>

namespace semloss {

// GET `url` (http or https) into `path`, following redirects. Throws
// InputError on a bad URL, a transport failure or a non-200 status.
void download_file(const std::string& url, const std::string& path);

// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(const std::string& bytes);

}  // namespace semloss
