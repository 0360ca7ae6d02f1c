#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfr/types.hpp"

namespace dfr {

/// Sentence embedding: either the zero vector (no tokens) or unit L2 norm.
using EmbeddingVector = Eigen::VectorXd;

/// Cosine similarity; 0 when either operand is the zero vector.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0 || a.size() != b.size()) return 0.0;
  return a.dot(b) / (na * nb);
}

/// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Stable 64-bit FNV-1a over the seed bytes followed by the token bytes.
std::uint64_t token_hash(std::string_view token, std::uint64_t seed);

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
  virtual std::string name() const = 0;
};

/// Hashed bag-of-words embedder: token counts hashed into `dim` buckets.
class HashedBagEmbedder final : public TextEmbedder {
 public:
  static constexpr std::size_t kDefaultDim = 256;
  static constexpr std::uint64_t kDefaultSeed = 0x5eed0fdf2025ull;

  explicit HashedBagEmbedder(std::size_t dim = kDefaultDim, std::uint64_t seed = kDefaultSeed);

  EmbeddingVector embed(std::string_view text) const override;
  std::string name() const override;

  std::size_t dim() const { return dim_; }
  std::size_t bucket(std::string_view token) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Failure of the remote embedding client.
class EmbeddingError : public Error {
 public:
  enum class Kind { Transport, MalformedPayload, CountMismatch, DimensionMismatch };
  EmbeddingError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// POSTs {"texts":[...]} to `endpoint` (http://host:port/path) and expects
/// {"embeddings":[[...],...]}. Each vector is re-normalized; order is kept.
/// `expected_dim` of 0 accepts any consistent dimension.
std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts,
                                          const std::string& endpoint,
                                          std::size_t expected_dim = 0,
                                          double timeout_seconds = 10.0);

/// Embedder backed by embed_remote, with an optional in-memory cache and an
/// optional fallback used when the service fails.
class RemoteEmbedder final : public TextEmbedder {
 public:
  RemoteEmbedder(std::string endpoint, std::size_t expected_dim = 0, bool cache = true,
                 std::shared_ptr<const TextEmbedder> fallback = nullptr);

  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::string name() const override;

 private:
  std::string endpoint_;
  std::size_t expected_dim_;
  bool cache_enabled_;
  std::shared_ptr<const TextEmbedder> fallback_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, EmbeddingVector, std::less<>> cache_;
};

}  // namespace dfr
