#pragma once

#include <optional>
#include <string>
#include <utility>

namespace reversener {

std::string sha256_hex(const std::string& data);

/// Strips surrounding markdown code fences (``` or ```json) if present.
std::string strip_code_fences(const std::string& s);

/// Returns the first well-formed JSON array found anywhere in `s`, or nullopt.
std::optional<std::string> extract_json_array(const std::string& s);

/// Returns the first well-formed JSON object found anywhere in `s`, or nullopt.
std::optional<std::string> extract_json_object(const std::string& s);

/// Splits "https://host:port/some/path" into ("https://host:port", "/some/path").
std::pair<std::string, std::string> split_url(const std::string& url);

}  // namespace reversener
