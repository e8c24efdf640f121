#include "reversener/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "reversener/util.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace reversener {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0)
    throw std::invalid_argument("cosine_similarity: zero-norm input");
  double sim = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(sim, -1.0, 1.0);
}

EmbeddingProvider::EmbeddingProvider(EmbeddingProviderConfig cfg)
    : cfg_(std::move(cfg)) {
  if (cfg_.dimension <= 0)
    throw std::invalid_argument("embedding dimension must be positive");
  if (cfg_.kind == EmbedderKind::RemoteHttp && cfg_.endpoint.empty())
    throw std::invalid_argument("remote-http embedder requires an endpoint");
  if (cfg_.kind == EmbedderKind::ReplayFile && cfg_.cache_path.empty())
    throw std::invalid_argument("replay-file embedder requires a cache path");
  if (!cfg_.cache_path.empty()) load_cache();
}

EmbeddingProvider::~EmbeddingProvider() = default;

std::string EmbeddingProvider::provider_id() const {
  switch (cfg_.kind) {
    case EmbedderKind::HashingFallback:
      return "hash:" + std::to_string(cfg_.dimension);
    case EmbedderKind::ReplayFile:
      return "replay:" + std::to_string(cfg_.dimension);
    case EmbedderKind::RemoteHttp:
      return "remote:" + cfg_.model_name + ":" + std::to_string(cfg_.dimension);
  }
  return "unknown";
}

namespace {
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(const char* data, size_t n) {
  std::uint64_t h = kFnvOffset;
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= kFnvPrime;
  }
  return h;
}
}  // namespace

// Character n-gram (1..3 bytes) feature hashing with +/-1 signs, L2
// normalized. Deterministic across runs and platforms.
EmbeddingVector EmbeddingProvider::hash_embed(const std::string& text) const {
  EmbeddingVector v(cfg_.dimension, 0.0);
  const size_t n = text.size();
  for (size_t len = 1; len <= 3; ++len) {
    if (n < len) break;
    for (size_t i = 0; i + len <= n; ++i) {
      std::uint64_t h = fnv1a(text.data() + i, len);
      size_t bucket = h % static_cast<std::uint64_t>(cfg_.dimension);
      double sign = ((h >> 63) & 1) ? -1.0 : 1.0;
      v[bucket] += sign;
    }
  }
  double norm = 0;
  for (double x : v) norm += x * x;
  if (norm == 0) {
    // degenerate text (all n-grams cancelled): fall back to a length feature
    v[n % cfg_.dimension] = 1.0;
    norm = 1.0;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

void EmbeddingProvider::load_cache() {
  std::ifstream in(cfg_.cache_path);
  if (!in) {
    if (cfg_.kind == EmbedderKind::ReplayFile)
      throw std::runtime_error("embedding replay cache not found: " +
                               cfg_.cache_path);
    return;  // remote: cache created lazily
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = nlohmann::json::parse(line);
    if (rec.at("provider_id").get<std::string>() != provider_id()) continue;
    cache_[rec.at("content_hash").get<std::string>()] =
        rec.at("vector").get<EmbeddingVector>();
  }
}

void EmbeddingProvider::append_cache(const std::string& content_hash,
                                     const EmbeddingVector& vec) {
  if (cfg_.cache_path.empty()) return;
  std::ofstream out(cfg_.cache_path, std::ios::app);
  nlohmann::ordered_json rec = {{"content_hash", content_hash},
                                {"provider_id", provider_id()},
                                {"vector", vec}};
  out << rec.dump() << "\n";
}

std::vector<EmbeddingVector> EmbeddingProvider::remote_embed(
    const std::vector<std::string>& texts) {
  nlohmann::json body = {{"model", cfg_.model_name}, {"input", texts}};
  auto [base, path] = split_url(cfg_.endpoint);
  httplib::Client client(base);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv("REVERSENER_EMBED_KEY"))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  const int retries = 3;
  std::string last_error;
  for (int attempt = 0; attempt < retries; ++attempt) {
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (res && res->status == 200) {
      auto doc = nlohmann::json::parse(res->body);
      std::vector<EmbeddingVector> out;
      for (const auto& item : doc.at("data"))
        out.push_back(item.at("embedding").get<EmbeddingVector>());
      if (out.size() != texts.size())
        throw std::runtime_error("embedding response count mismatch");
      for (const auto& v : out)
        if (static_cast<int>(v.size()) != cfg_.dimension)
          throw std::runtime_error("embedding dimension mismatch: got " +
                                   std::to_string(v.size()) + ", expected " +
                                   std::to_string(cfg_.dimension));
      return out;
    }
    last_error = res ? "status " + std::to_string(res->status)
                     : "transport error";
  }
  throw std::runtime_error("embedding request failed after retries: " +
                           last_error);
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  if (texts.empty())
    throw std::invalid_argument("embed_batch: empty text list");
  for (const auto& t : texts)
    if (t.empty()) throw std::invalid_argument("embed_batch: empty text");

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<size_t> missing;
  for (size_t i = 0; i < texts.size(); ++i) {
    if (cfg_.kind == EmbedderKind::HashingFallback) {
      out[i] = hash_embed(texts[i]);
      continue;
    }
    std::string h = sha256_hex(texts[i]);
    auto it = cache_.find(h);
    if (it != cache_.end())
      out[i] = it->second;
    else if (cfg_.kind == EmbedderKind::ReplayFile)
      throw std::runtime_error("embedding replay miss for hash " + h +
                               " text \"" + texts[i].substr(0, 80) + "\"");
    else
      missing.push_back(i);
  }
  if (!missing.empty()) {
    std::vector<std::string> batch;
    for (size_t i : missing) batch.push_back(texts[i]);
    auto fresh = remote_embed(batch);
    for (size_t j = 0; j < missing.size(); ++j) {
      std::string h = sha256_hex(texts[missing[j]]);
      out[missing[j]] = fresh[j];
      cache_[h] = fresh[j];
      append_cache(h, fresh[j]);
    }
  }
  return out;
}

EmbeddingVector EmbeddingProvider::embed(const std::string& text) {
  return embed_batch({text}).front();
}

}  // namespace reversener
