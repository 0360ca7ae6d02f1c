#include "dfr/records.hpp"

namespace dfr {

using nlohmann::json;

json to_json(const RegionBox& rb) {
  return {{"region", to_string(rb.region)}, {"box", {rb.box.x1, rb.box.y1, rb.box.x2, rb.box.y2}}};
}

json to_json(const DmaRecord& record) {
  json boxes = json::array();
  for (const auto& rb : record.gt_boxes) boxes.push_back(to_json(rb));
  return {{"image_ref", record.image_ref},
          {"question", record.question},
          {"gt_text", record.gt_text},
          {"gt_label", to_string(record.gt_label)},
          {"gt_boxes", std::move(boxes)}};
}

json to_json(const RewardVector& v) {
  return {{"format", v.format}, {"accuracy", v.accuracy}, {"text", v.text},
          {"roi", v.roi},       {"align", v.align}};
}

json to_json(const RewardWeights& w) {
  return {{"beta_f", w.beta_format}, {"beta_a", w.beta_accuracy}, {"beta_t", w.beta_text},
          {"beta_r", w.beta_roi},    {"beta_align", w.beta_align}, {"align_epsilon", w.align_epsilon}};
}

RegionBox region_box_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("box entry: expected an object");
  if (!j.contains("region") || !j["region"].is_string()) {
    throw ValidationError("box entry: missing string field 'region'");
  }
  const auto& box = j.contains("box") ? j["box"] : json();
  if (!box.is_array() || box.size() != 4) throw ValidationError("box entry: 'box' must be [x1,y1,x2,y2]");
  for (const auto& v : box) {
    if (!v.is_number()) throw ValidationError("box entry: coordinates must be numbers");
  }
  return {parse_region(j["region"].get<std::string>()),
          make_box(box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                   box[3].get<double>())};
}

namespace {

std::string required_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ValidationError(std::string("missing string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

}  // namespace

DmaRecord dma_record_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("record: expected a JSON object");
  DmaRecord r;
  r.image_ref = required_string(j, "image_ref");
  r.question = j.contains("question") && j["question"].is_string() ? j["question"].get<std::string>()
                                                                    : std::string();
  r.gt_text = required_string(j, "gt_text");
  auto label = label_from_string(required_string(j, "gt_label"));
  if (!label || *label == Label::Unknown) throw ValidationError("gt_label must be 'real' or 'fake'");
  r.gt_label = *label;
  if (j.contains("gt_boxes")) {
    if (!j["gt_boxes"].is_array()) throw ValidationError("gt_boxes must be an array");
    for (const auto& e : j["gt_boxes"]) r.gt_boxes.push_back(region_box_from_json(e));
  }
  r.validate();
  return r;
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace dfr
