#include "dfr/rewards.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace dfr {

void RewardWeights::validate() const {
  const std::array<std::pair<const char*, double>, 5> betas = {{
      {"beta_f", beta_format},
      {"beta_a", beta_accuracy},
      {"beta_t", beta_text},
      {"beta_r", beta_roi},
      {"beta_align", beta_align},
  }};
  for (const auto& [name, value] : betas) {
    if (!(value >= 0.0)) throw ValidationError(std::string("rewards.") + name + ": must be >= 0");
  }
  if (!(align_epsilon > 0.0)) throw ValidationError("rewards.align_epsilon: must be > 0");
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double reward_format(const ParsedResponse& r) { return r.well_formed ? 1.0 : 0.0; }

double reward_accuracy(Label pred, Label gt) {
  if (gt == Label::Unknown) throw ValidationError("ground-truth label must not be unknown");
  return pred == gt ? 1.0 : 0.0;
}

double reward_text(std::string_view generated, std::string_view reference,
                   const TextEmbedder& embedder) {
  const auto a = embedder.embed(generated);
  const auto b = embedder.embed(reference);
  return std::clamp(cosine(a, b), 0.0, 1.0);
}

double reward_roi(const std::vector<RegionBox>& pred, const std::vector<RegionBox>& gt) {
  if (!regions_unique(pred) || !regions_unique(gt)) {
    throw ValidationError("duplicate region in box sequence");
  }
  std::array<std::optional<Box>, kRegionCount> gt_by_region;
  for (const auto& rb : gt) gt_by_region[index_of(rb.region)] = rb.box;

  double total = 0.0;
  std::size_t shared = 0;
  for (const auto& rb : pred) {
    if (const auto& g = gt_by_region[index_of(rb.region)]) {
      total += iou(rb.box, *g);
      ++shared;
    }
  }
  return shared == 0 ? 0.0 : total / static_cast<double>(shared);
}

double reward_align(RegionSet text_regions, RegionSet box_regions, double eps) {
  if (!(eps > 0.0)) throw ValidationError("alignment epsilon must be > 0");
  const auto inter = static_cast<double>((text_regions & box_regions).size());
  const auto uni = static_cast<double>((text_regions | box_regions).size());
  return inter / (uni + eps);
}

double combine(const RewardVector& v, const RewardWeights& w) {
  return w.beta_format * v.format + w.beta_accuracy * v.accuracy + w.beta_text * v.text +
         w.beta_roi * v.roi + w.beta_align * v.align;
}

RewardVector score_parsed(const ParsedResponse& parsed, const DmaRecord& record,
                          const RewardWeights& weights, const TextEmbedder& embedder,
                          const Lexicon& lexicon) {
  RewardVector v;
  v.format = reward_format(parsed);
  v.accuracy = reward_accuracy(parsed.pred_label, record.gt_label);
  v.text = parsed.explanation.empty() ? 0.0 : reward_text(parsed.explanation, record.gt_text, embedder);
  v.roi = reward_roi(parsed.boxes, record.gt_boxes);
  v.align = reward_align(extract_regions(parsed.explanation, lexicon), regions_of(parsed.boxes),
                         weights.align_epsilon);
  v.combined = combine(v, weights);
  return v;
}

RewardVector score_response(std::string_view raw, const DmaRecord& record,
                            const RewardWeights& weights, const TextEmbedder& embedder,
                            const Lexicon& lexicon) {
  return score_parsed(parse_response(raw), record, weights, embedder, lexicon);
}

}  // namespace dfr
