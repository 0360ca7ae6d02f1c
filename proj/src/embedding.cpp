#include "dfr/embedding.hpp"

#include <cctype>
#include <cstdio>

namespace dfr {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      current += static_cast<char>(std::tolower(u));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto step = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  for (int i = 0; i < 8; ++i) step(static_cast<unsigned char>(seed >> (8 * i)));
  for (unsigned char c : token) step(c);
  // FNV low bits are weak; fold the high half in before bucketing.
  return h ^ (h >> 29) ^ (h >> 47);
}

std::vector<EmbeddingVector> TextEmbedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashedBagEmbedder::HashedBagEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

std::size_t HashedBagEmbedder::bucket(std::string_view token) const {
  return static_cast<std::size_t>(token_hash(token, seed_) % dim_);
}

EmbeddingVector HashedBagEmbedder::embed(std::string_view text) const {
  EmbeddingVector v = EmbeddingVector::Zero(static_cast<Eigen::Index>(dim_));
  for (const auto& tok : tokenize(text)) v[static_cast<Eigen::Index>(bucket(tok))] += 1.0;
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

std::string HashedBagEmbedder::name() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "hashed-bag(dim=%zu,seed=%llx)", dim_,
                static_cast<unsigned long long>(seed_));
  return buf;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::size_t expected_dim, bool cache,
                               std::shared_ptr<const TextEmbedder> fallback)
    : endpoint_(std::move(endpoint)),
      expected_dim_(expected_dim),
      cache_enabled_(cache),
      fallback_(std::move(fallback)) {}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  std::string t(text);
  return embed_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> missing_at;
  {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto it = cache_enabled_ ? cache_.find(texts[i]) : cache_.end();
      if (it != cache_.end()) {
        out[i] = it->second;
      } else {
        missing.push_back(texts[i]);
        missing_at.push_back(i);
      }
    }
  }
  if (missing.empty()) return out;

  std::vector<EmbeddingVector> fetched;
  try {
    fetched = embed_remote(missing, endpoint_, expected_dim_);
  } catch (const EmbeddingError&) {
    if (!fallback_) throw;
    fetched = fallback_->embed_batch(missing);
  }

  std::lock_guard lock(mutex_);
  for (std::size_t k = 0; k < missing.size(); ++k) {
    out[missing_at[k]] = fetched[k];
    if (cache_enabled_) cache_.emplace(missing[k], fetched[k]);
  }
  return out;
}

std::string RemoteEmbedder::name() const { return "remote(" + endpoint_ + ")"; }

}  // namespace dfr
