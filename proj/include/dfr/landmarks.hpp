#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dfr/types.hpp"

namespace dfr {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Normalized landmark points grouped by facial region.
class LandmarkSet {
 public:
  LandmarkSet() = default;
  /// Throws ValidationError for empty point lists or points outside [0,1]^2.
  explicit LandmarkSet(std::map<RegionId, std::vector<Point2>> region_points);

  bool has(RegionId r) const { return points_.count(r) != 0; }
  const std::vector<Point2>& points(RegionId r) const;
  RegionSet coverage() const;

 private:
  std::map<RegionId, std::vector<Point2>> points_;
};

inline constexpr double kDefaultPad = 0.05;

class MissingRegionError : public Error {
 public:
  explicit MissingRegionError(RegionId r)
      : Error("no landmarks for region '" + std::string(to_string(r)) + "'"), region_(r) {}
  RegionId region() const { return region_; }

 private:
  RegionId region_;
};

/// Min/max box over a region's points, padded on each side and clamped to the
/// unit frame. A zero-extent axis grows by max(pad, 5e-4) per side so the
/// result is always a valid Box.
Box region_box_from_landmarks(const LandmarkSet& landmarks, RegionId region, double pad);

/// Landmark fixture: one JSON object per line,
/// {"image_ref": "...", "regions": {"mouth": [[x,y], ...], ...}}.
using LandmarkFixture = std::map<std::string, LandmarkSet, std::less<>>;
LandmarkFixture load_landmark_fixture(const std::filesystem::path& path);

}  // namespace dfr
