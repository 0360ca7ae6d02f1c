#pragma once

// Pipelines behind the command-line tool: configuration, batch scoring, the
// line-delimited scoring sidecar, and report writers for the simulators.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dfr/dma_builder.hpp"
#include "dfr/embedding.hpp"
#include "dfr/fdm.hpp"
#include "dfr/grpo.hpp"
#include "dfr/lexicon.hpp"
#include "dfr/rewards.hpp"

namespace dfr {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2 };

struct EmbedderConfig {
  enum class Kind { Builtin, Remote } kind = Kind::Builtin;
  std::size_t dim = HashedBagEmbedder::kDefaultDim;
  std::string endpoint;
  bool cache = true;
  bool fallback = true;
};

struct RunConfig {
  RewardWeights weights;
  std::optional<std::filesystem::path> lexicon_path;
  EmbedderConfig embedder;
  std::optional<std::filesystem::path> landmarks_path;
  double pad = kDefaultPad;
  SimConfig sim;
  fdm::TrainConfig fdm;
  std::uint64_t seed = 7;

  /// Parses a JSON config; unknown keys and bad values raise ValidationError
  /// naming the field path (e.g. "rewards.beta_a").
  static RunConfig from_json(const nlohmann::json& j);
  /// Missing file is an IoError.
  static RunConfig load(const std::filesystem::path& path);

  /// Propagates the global seed into the simulator configs.
  void set_seed(std::uint64_t s);
  void validate() const;
  nlohmann::json provenance() const;
};

/// Reward scoring bound to one configuration.
class Scorer {
 public:
  explicit Scorer(const RunConfig& config);

  RewardVector score(std::string_view raw, const DmaRecord& record) const;
  /// Reply object with components, combined reward and parse diagnostics.
  nlohmann::json score_json(std::string_view raw, const DmaRecord& record) const;

  const RewardWeights& weights() const { return weights_; }
  const Lexicon& lexicon() const { return *lexicon_; }
  const TextEmbedder& embedder() const { return *embedder_; }
  nlohmann::json provenance() const;

 private:
  RewardWeights weights_;
  std::shared_ptr<const Lexicon> lexicon_;
  std::shared_ptr<const TextEmbedder> embedder_;
};

/// Scores a responses file (one {"record_id", "response", optional "id"} per
/// line) against a DMA file. Writes a header line and one line per response.
/// Returns the number of scored lines.
std::size_t score_responses(std::istream& responses, const std::vector<DmaRecord>& records,
                            const Scorer& scorer, std::ostream& out);

/// Sidecar loop: reads {"id", "raw_response", "record"} per line and writes
/// one reply per line until end of input. Malformed requests get an error
/// reply carrying the id when one could be read. Returns kExitOk.
int serve(std::istream& in, std::ostream& out, const Scorer& scorer);

/// Writes header, one line per iteration, and a summary line.
void write_simulation(const SimResult& result, const SimConfig& config, std::ostream& out);
nlohmann::json simulation_summary(const SimResult& result);

void write_fdm_report(const fdm::TrainResult& result, const fdm::TrainConfig& config, std::ostream& out);

}  // namespace dfr
