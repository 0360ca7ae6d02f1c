// Eigen must precede httplib: <resolv.h> defines a _res macro that breaks
// Eigen's product kernels.
#include "dfr/embedding.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

namespace dfr {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw EmbeddingError(EmbeddingError::Kind::Transport, "endpoint '" + url + "' lacks a scheme");
  }
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts,
                                          const std::string& endpoint, std::size_t expected_dim,
                                          double timeout_seconds) {
  using Kind = EmbeddingError::Kind;
  if (texts.empty()) throw ValidationError("embed_remote: batch must be nonempty");

  auto [origin, path] = split_endpoint(endpoint);
  httplib::Client client(origin);
  auto timeout = std::chrono::duration<double>(timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  nlohmann::json request = {{"texts", nlohmann::json::array()}};
  for (const auto& t : texts) request["texts"].push_back(t);
  auto body = request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

  auto res = client.Post(path, body, "application/json");
  if (!res) {
    throw EmbeddingError(Kind::Transport,
                         "embedding service " + endpoint + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw EmbeddingError(Kind::Transport, "embedding service " + endpoint + " returned HTTP " +
                                              std::to_string(res->status));
  }

  auto doc = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("embeddings") ||
      !doc["embeddings"].is_array()) {
    throw EmbeddingError(Kind::MalformedPayload, "embedding reply lacks an 'embeddings' array");
  }
  const auto& rows = doc["embeddings"];
  if (rows.size() != texts.size()) {
    throw EmbeddingError(Kind::CountMismatch, "embedding reply has " + std::to_string(rows.size()) +
                                                  " vectors for " + std::to_string(texts.size()) +
                                                  " texts");
  }

  std::vector<EmbeddingVector> out;
  out.reserve(rows.size());
  std::size_t dim = expected_dim;
  for (const auto& row : rows) {
    if (!row.is_array()) throw EmbeddingError(Kind::MalformedPayload, "embedding is not an array");
    if (dim == 0) dim = row.size();
    if (row.size() != dim || dim == 0) {
      throw EmbeddingError(Kind::DimensionMismatch,
                           "embedding of dimension " + std::to_string(row.size()) +
                               ", expected " + std::to_string(dim));
    }
    EmbeddingVector v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      if (!row[i].is_number()) {
        throw EmbeddingError(Kind::MalformedPayload, "embedding entry is not a number");
      }
      v[static_cast<Eigen::Index>(i)] = row[i].get<double>();
    }
    if (!v.allFinite()) throw EmbeddingError(Kind::MalformedPayload, "non-finite embedding entry");
    const double n = v.norm();
    if (n > 0.0) v /= n;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace dfr
