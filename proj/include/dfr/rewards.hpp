#pragma once

#include <string_view>
#include <vector>

#include "dfr/embedding.hpp"
#include "dfr/lexicon.hpp"
#include "dfr/response.hpp"
#include "dfr/types.hpp"

namespace dfr {

/// Weights of the combined reward. Defaults put 0.6 on label accuracy and
/// 0.1 on each of the other four components.
struct RewardWeights {
  double beta_format = 0.1;
  double beta_accuracy = 0.6;
  double beta_text = 0.1;
  double beta_roi = 0.1;
  double beta_align = 0.1;
  double align_epsilon = 1e-6;

  /// Throws ValidationError on a negative beta or non-positive epsilon.
  void validate() const;
  double sum() const { return beta_format + beta_accuracy + beta_text + beta_roi + beta_align; }
};

struct RewardVector {
  double format = 0.0;
  double accuracy = 0.0;
  double text = 0.0;
  double roi = 0.0;
  double align = 0.0;
  double combined = 0.0;
};

/// Intersection over union of two valid boxes; 0 when disjoint.
double iou(const Box& a, const Box& b);

double reward_format(const ParsedResponse& r);

/// Throws ValidationError when `gt` is Unknown.
double reward_accuracy(Label pred, Label gt);

/// max(0, cos) of the two embeddings; 0 if either is the zero vector.
double reward_text(std::string_view generated, std::string_view reference,
                   const TextEmbedder& embedder);

/// Mean IoU over regions present in both sequences, 0 if none are shared.
/// Throws ValidationError if either sequence repeats a region.
double reward_roi(const std::vector<RegionBox>& pred, const std::vector<RegionBox>& gt);

/// |A ∩ B| / (|A ∪ B| + eps). Throws ValidationError unless eps > 0.
double reward_align(RegionSet text_regions, RegionSet box_regions, double eps);

/// Weighted sum of the five components under `w`.
double combine(const RewardVector& v, const RewardWeights& w);

/// Scores one raw candidate against its record. Total: malformed responses
/// get format 0 and whatever the recoverable parts earn.
RewardVector score_parsed(const ParsedResponse& parsed, const DmaRecord& record,
                          const RewardWeights& weights, const TextEmbedder& embedder,
                          const Lexicon& lexicon);

RewardVector score_response(std::string_view raw, const DmaRecord& record,
                            const RewardWeights& weights, const TextEmbedder& embedder,
                            const Lexicon& lexicon);

}  // namespace dfr
