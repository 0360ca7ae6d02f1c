#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dfr/types.hpp"

namespace dfr {

/// Region -> keyword phrases. Phrases are stored trimmed and lowercased;
/// every region has at least one phrase.
class Lexicon {
 public:
  /// Throws ValidationError if a region is missing or has no usable phrase.
  explicit Lexicon(const std::map<RegionId, std::vector<std::string>>& entries);

  const std::vector<std::string>& lookup(RegionId r) const { return entries_[index_of(r)]; }

  /// Stable 64-bit FNV-1a digest of the canonical contents, hex encoded.
  std::string hash() const;

  /// Every distinct phrase with the regions listing it, longest phrase first.
  struct Phrase {
    std::string text;
    RegionSet regions;
  };
  const std::vector<Phrase>& phrases() const { return phrases_; }

 private:
  std::array<std::vector<std::string>, kRegionCount> entries_;
  std::vector<Phrase> phrases_;
};

/// The 12-region facial keyword table.
const Lexicon& default_lexicon();

/// Reads a JSON object {region name: [phrase, ...]} covering all regions.
Lexicon load_lexicon(const std::filesystem::path& path);

/// Keyword retrieval: lowercase, word-boundary matching, longest phrase first
/// with span consumption; a phrase listed under several regions yields all of them.
RegionSet extract_regions(std::string_view text, const Lexicon& lexicon);

}  // namespace dfr
