#include "fetch.hpp"

// Before the network headers: they define macros that collide with Eigen.
#include "semloss/data.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <openssl/evp.h>

#include <regex>

namespace semloss {

void download_file(const std::string& url, const std::string& path) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw InputError("unsupported URL '" + url + "'");
  httplib::Client client(m[1].str());
  client.set_follow_location(true);
  auto res = client.Get(m[2].matched ? m[2].str() : "/");
  if (!res) throw InputError("download of " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw InputError("download of " + url + " returned HTTP " + std::to_string(res->status));
  write_file(path, res->body);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw InputError("SHA-256 computation failed");
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

}  // namespace semloss
