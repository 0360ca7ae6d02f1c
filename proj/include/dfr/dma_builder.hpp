#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "dfr/landmarks.hpp"
#include "dfr/lexicon.hpp"
#include "dfr/types.hpp"

namespace dfr {

inline constexpr const char* kBuilderVersion = "dfr-dma/1";

/// An image-text record before localization.
struct SourceRecord {
  std::string image_ref;
  std::string question;
  std::string gt_text;
  Label gt_label = Label::Unknown;
};

SourceRecord source_record_from_json(const nlohmann::json& j);

class BuildError : public Error {
 public:
  enum class Kind { NoRegions, MissingLandmarks };
  BuildError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct BuiltRecord {
  DmaRecord record;
  /// Regions mentioned by the text but absent from the landmark set.
  RegionSet missing;
};

/// Keyword retrieval followed by landmark localization for one record.
/// Boxes are emitted in region-enum order.
BuiltRecord build_record(const SourceRecord& src, const Lexicon& lexicon,
                         const LandmarkSet& landmarks, double pad);

struct BuildReport {
  std::size_t total = 0;
  std::size_t succeeded = 0;
  std::size_t skipped_no_regions = 0;
  std::size_t skipped_missing_landmarks = 0;
  std::array<std::size_t, kRegionCount> region_frequency{};

  nlohmann::json to_json() const;
};

/// Streams source lines from `src` and writes a header line plus one DMA
/// record per success to `out`, in input order. Malformed lines throw
/// ValidationError carrying the line number.
BuildReport build_dataset(std::istream& src, const LandmarkFixture& landmarks, std::ostream& out,
                          const Lexicon& lexicon, double pad);

BuildReport build_dataset(const std::filesystem::path& src_path,
                          const std::filesystem::path& landmarks_path,
                          const std::filesystem::path& out_path, const Lexicon& lexicon, double pad);

/// Reads a DMA file, skipping the header line. Records are validated.
std::vector<DmaRecord> load_dma_file(const std::filesystem::path& path);

}  // namespace dfr
