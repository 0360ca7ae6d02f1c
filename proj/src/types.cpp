#include "dfr/types.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>

namespace dfr {
namespace {

constexpr std::array<std::string_view, kRegionCount> kRegionNames = {
    "skin",  "nose",           "mouth",          "teeth", "left_eye", "right_eye",
    "left_eyebrow", "right_eyebrow", "chin", "beard", "hairline", "ear",
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(RegionId r) { return kRegionNames[index_of(r)]; }

std::optional<RegionId> region_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kRegionCount; ++i) {
    if (kRegionNames[i] == name) return kAllRegions[i];
  }
  return std::nullopt;
}

RegionId parse_region(std::string_view name) {
  if (auto r = region_from_string(name)) return *r;
  throw ValidationError("unknown facial region '" + std::string(name) + "'");
}

std::size_t RegionSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<RegionId> RegionSet::to_vector() const {
  std::vector<RegionId> out;
  for (auto r : kAllRegions) {
    if (contains(r)) out.push_back(r);
  }
  return out;
}

bool Box::valid() const {
  auto finite = std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2);
  return finite && 0.0 <= x1 && x1 < x2 && x2 <= 1.0 && 0.0 <= y1 && y1 < y2 && y2 <= 1.0;
}

Box make_box(double x1, double y1, double x2, double y2) {
  Box b{x1, y1, x2, y2};
  if (!b.valid()) {
    throw ValidationError("box corners violate 0 <= x1 < x2 <= 1, 0 <= y1 < y2 <= 1");
  }
  return b;
}

bool regions_unique(const std::vector<RegionBox>& boxes) {
  RegionSet seen;
  for (const auto& rb : boxes) {
    if (seen.contains(rb.region)) return false;
    seen.insert(rb.region);
  }
  return true;
}

RegionSet regions_of(const std::vector<RegionBox>& boxes) {
  RegionSet s;
  for (const auto& rb : boxes) s.insert(rb.region);
  return s;
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Real: return "real";
    case Label::Fake: return "fake";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Label> label_from_string(std::string_view name) {
  if (iequals(name, "real")) return Label::Real;
  if (iequals(name, "fake")) return Label::Fake;
  if (iequals(name, "unknown")) return Label::Unknown;
  return std::nullopt;
}

void DmaRecord::validate() const {
  if (gt_label == Label::Unknown) {
    throw ValidationError("record '" + image_ref + "': ground-truth label must be real or fake");
  }
  if (gt_text.empty()) throw ValidationError("record '" + image_ref + "': gt_text is empty");
  if (!regions_unique(gt_boxes)) {
    throw ValidationError("record '" + image_ref + "': duplicate region in gt_boxes");
  }
  for (const auto& rb : gt_boxes) {
    if (!rb.box.valid()) {
      throw ValidationError("record '" + image_ref + "': invalid box for region " +
                            std::string(to_string(rb.region)));
    }
  }
}

}  // namespace dfr
