#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace reversener {

using EmbeddingVector = std::vector<double>;

enum class EmbedderKind { RemoteHttp, ReplayFile, HashingFallback };

struct EmbeddingProviderConfig {
  EmbedderKind kind = EmbedderKind::HashingFallback;
  std::string endpoint;    // remote-http only
  std::string model_name;  // remote-http only
  int dimension = 64;
  std::string cache_path;  // required for replay-file, optional for remote
  int max_in_flight = 4;
};

/// (a.b)/(|a||b|), clamped to [-1,1]. Throws on dimension mismatch or a
/// zero-norm input.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Sentence-embedding provider. The hashing-fallback kind (character n-gram
/// feature hashing, L2 normalized) exists so the whole pipeline runs with no
/// model and no network; remote results are cached on disk keyed by
/// (provider id, content hash), and replay-file answers from that cache only.
class EmbeddingProvider {
 public:
  explicit EmbeddingProvider(EmbeddingProviderConfig cfg);
  ~EmbeddingProvider();

  std::vector<EmbeddingVector> embed_batch(
      const std::vector<std::string>& texts);
  EmbeddingVector embed(const std::string& text);

  const EmbeddingProviderConfig& config() const { return cfg_; }
  std::string provider_id() const;

 private:
  EmbeddingVector hash_embed(const std::string& text) const;
  std::vector<EmbeddingVector> remote_embed(
      const std::vector<std::string>& texts);
  void load_cache();
  void append_cache(const std::string& content_hash,
                    const EmbeddingVector& vec);

  EmbeddingProviderConfig cfg_;
  std::map<std::string, EmbeddingVector> cache_;  // content hash -> vector
};

}  // namespace reversener
