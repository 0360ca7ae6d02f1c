#include "dfr/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace dfr {
namespace {

// Pads one axis; zero-extent ranges get at least the 1e-3 minimum extent.
std::pair<double, double> pad_axis(double lo, double hi, double pad) {
  constexpr double kMinHalfExtent = 5e-4;
  const double grow = hi > lo ? pad : std::max(pad, kMinHalfExtent);
  return {std::max(0.0, lo - grow), std::min(1.0, hi + grow)};
}

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

LandmarkSet::LandmarkSet(std::map<RegionId, std::vector<Point2>> region_points)
    : points_(std::move(region_points)) {
  for (const auto& [region, pts] : points_) {
    if (pts.empty()) {
      throw ValidationError("landmarks for '" + std::string(to_string(region)) + "' are empty");
    }
    for (const auto& p : pts) {
      if (!in_unit(p.x) || !in_unit(p.y)) {
        throw ValidationError("landmark for '" + std::string(to_string(region)) +
                              "' lies outside the unit frame");
      }
    }
  }
}

const std::vector<Point2>& LandmarkSet::points(RegionId r) const {
  auto it = points_.find(r);
  if (it == points_.end()) throw MissingRegionError(r);
  return it->second;
}

RegionSet LandmarkSet::coverage() const {
  RegionSet s;
  for (const auto& [region, pts] : points_) s.insert(region);
  return s;
}

Box region_box_from_landmarks(const LandmarkSet& landmarks, RegionId region, double pad) {
  if (!(pad >= 0.0 && pad <= 0.5)) throw ValidationError("pad must lie in [0, 0.5]");
  const auto& pts = landmarks.points(region);

  double x_lo = pts.front().x, x_hi = x_lo, y_lo = pts.front().y, y_hi = y_lo;
  for (const auto& p : pts) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  auto [x1, x2] = pad_axis(x_lo, x_hi, pad);
  auto [y1, y2] = pad_axis(y_lo, y_hi, pad);
  return Box{x1, y1, x2, y2};
}

LandmarkFixture load_landmark_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landmark fixture " + path.string());

  LandmarkFixture fixture;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    auto doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) throw ValidationError(where + "not a JSON object");
    if (!doc.contains("image_ref") || !doc["image_ref"].is_string()) {
      throw ValidationError(where + "missing string field 'image_ref'");
    }
    if (!doc.contains("regions") || !doc["regions"].is_object()) {
      throw ValidationError(where + "missing object field 'regions'");
    }
    std::map<RegionId, std::vector<Point2>> regions;
    for (const auto& [name, pts] : doc["regions"].items()) {
      auto region = region_from_string(name);
      if (!region) throw ValidationError(where + "unknown region '" + name + "'");
      if (!pts.is_array()) throw ValidationError(where + "points for '" + name + "' not an array");
      auto& out = regions[*region];
      for (const auto& pt : pts) {
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
          throw ValidationError(where + "point for '" + name + "' is not [x, y]");
        }
        out.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
    }
    try {
      auto ref = doc["image_ref"].get<std::string>();
      if (!fixture.emplace(ref, LandmarkSet(std::move(regions))).second) {
        throw ValidationError("duplicate image_ref '" + ref + "'");
      }
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return fixture;
}

}  // namespace dfr
