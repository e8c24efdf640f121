#include "reversener/util.hpp"

#include <openssl/sha.h>

#include "json.hpp"

namespace reversener {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(),
         digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) {
    out.push_back(hex[b >> 4]);
    out.push_back(hex[b & 0xf]);
  }
  return out;
}

std::string strip_code_fences(const std::string& s) {
  auto first = s.find("```");
  if (first == std::string::npos) return s;
  auto nl = s.find('\n', first);
  if (nl == std::string::npos) return s;
  auto last = s.rfind("```");
  if (last <= nl) return s;
  return s.substr(nl + 1, last - nl - 1);
}

namespace {

// Scans from each occurrence of `open` for a balanced slice, honoring JSON
// string syntax, then confirms with the real parser.
std::optional<std::string> extract_balanced(const std::string& s, char open,
                                            char close) {
  for (size_t start = s.find(open); start != std::string::npos;
       start = s.find(open, start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < s.size(); ++i) {
      char c = s[i];
      if (in_string) {
        if (escaped)
          escaped = false;
        else if (c == '\\')
          escaped = true;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"')
        in_string = true;
      else if (c == '{' || c == '[')
        ++depth;
      else if (c == '}' || c == ']')
        --depth;
      if (depth == 0) {
        std::string slice = s.substr(start, i - start + 1);
        if (slice.front() == open && slice.back() == close &&
            nlohmann::json::accept(slice))
          return slice;
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> extract_json_array(const std::string& s) {
  return extract_balanced(strip_code_fences(s), '[', ']');
}

std::optional<std::string> extract_json_object(const std::string& s) {
  return extract_balanced(strip_code_fences(s), '{', '}');
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace reversener
