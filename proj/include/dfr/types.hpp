#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dfr {

/// Facial regions recognised by the lexicon and the box grammar.
enum class RegionId : std::uint8_t {
  Skin,
  Nose,
  Mouth,
  Teeth,
  LeftEye,
  RightEye,
  LeftEyebrow,
  RightEyebrow,
  Chin,
  Beard,
  Hairline,
  Ear,
};

inline constexpr std::size_t kRegionCount = 12;

inline constexpr std::array<RegionId, kRegionCount> kAllRegions = {
    RegionId::Skin,        RegionId::Nose,         RegionId::Mouth,
    RegionId::Teeth,       RegionId::LeftEye,      RegionId::RightEye,
    RegionId::LeftEyebrow, RegionId::RightEyebrow, RegionId::Chin,
    RegionId::Beard,       RegionId::Hairline,     RegionId::Ear,
};

std::string_view to_string(RegionId r);
std::optional<RegionId> region_from_string(std::string_view name);
/// Throws ValidationError for names outside the closed set.
RegionId parse_region(std::string_view name);

inline std::size_t index_of(RegionId r) { return static_cast<std::size_t>(r); }

/// Fixed-width bitset over the 12 regions. Iteration order is enum order.
class RegionSet {
 public:
  RegionSet() = default;
  RegionSet(std::initializer_list<RegionId> regions) {
    for (auto r : regions) insert(r);
  }
  static RegionSet from_bits(std::uint16_t bits) {
    RegionSet s;
    s.bits_ = bits & kMask;
    return s;
  }

  void insert(RegionId r) { bits_ |= bit(r); }
  void erase(RegionId r) { bits_ &= static_cast<std::uint16_t>(~bit(r)); }
  bool contains(RegionId r) const { return (bits_ & bit(r)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::uint16_t bits() const { return bits_; }
  std::vector<RegionId> to_vector() const;

  friend RegionSet operator&(RegionSet a, RegionSet b) { return from_bits(a.bits_ & b.bits_); }
  friend RegionSet operator|(RegionSet a, RegionSet b) { return from_bits(a.bits_ | b.bits_); }
  friend bool operator==(RegionSet, RegionSet) = default;

 private:
  static constexpr std::uint16_t kMask = (1u << kRegionCount) - 1;
  static std::uint16_t bit(RegionId r) { return static_cast<std::uint16_t>(1u << index_of(r)); }
  std::uint16_t bits_ = 0;
};

/// Axis-aligned box in normalized image coordinates, 0 <= x1 < x2 <= 1 and
/// likewise for y.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool valid() const;
  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Throws ValidationError if the corners violate the box invariants.
Box make_box(double x1, double y1, double x2, double y2);

struct RegionBox {
  RegionId region;
  Box box;

  friend bool operator==(const RegionBox&, const RegionBox&) = default;
};

/// True when no region identifier occurs twice.
bool regions_unique(const std::vector<RegionBox>& boxes);
RegionSet regions_of(const std::vector<RegionBox>& boxes);

enum class Label : std::uint8_t { Real, Fake, Unknown };

std::string_view to_string(Label l);
/// Case-insensitive "real" / "fake" / "unknown".
std::optional<Label> label_from_string(std::string_view name);

/// One text-spatially aligned sample.
struct DmaRecord {
  std::string image_ref;
  std::string question;
  std::string gt_text;
  Label gt_label = Label::Unknown;
  std::vector<RegionBox> gt_boxes;

  /// Throws ValidationError describing the first violated invariant.
  void validate() const;

  friend bool operator==(const DmaRecord&, const DmaRecord&) = default;
};

/// Base for every error this library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument, precondition or record content.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dfr
