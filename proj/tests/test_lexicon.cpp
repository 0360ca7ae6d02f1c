#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dfr/lexicon.hpp"

using namespace dfr;

namespace {

RegionSet regions(std::string_view text) { return extract_regions(text, default_lexicon()); }

}  // namespace

TEST_CASE("default lexicon matches the facial keyword table") {
  const auto& lex = default_lexicon();
  CHECK(lex.lookup(RegionId::Mouth) == std::vector<std::string>{"mouth", "lip", "lips"});
  CHECK(lex.lookup(RegionId::Chin) == std::vector<std::string>{"chin", "jaw", "jawline", "lower face"});
  CHECK(lex.lookup(RegionId::Nose) == std::vector<std::string>{"nose", "nostril", "nasal"});
  CHECK(lex.lookup(RegionId::Teeth) == std::vector<std::string>{"tooth", "teeth"});
  CHECK(lex.lookup(RegionId::LeftEye) ==
        std::vector<std::string>{"left eye", "left-eye", "l eye", "lefteye", "eye", "ocular"});
  for (auto r : kAllRegions) CHECK_FALSE(lex.lookup(r).empty());
}

TEST_CASE("phrases are ordered longest first") {
  const auto& ph = default_lexicon().phrases();
  for (std::size_t i = 1; i < ph.size(); ++i) CHECK(ph[i - 1].text.size() >= ph[i].text.size());
}

TEST_CASE("keyword retrieval") {
  CHECK(regions("blurry nose and nostril edges") == RegionSet{RegionId::Nose});
  CHECK(regions("the left eye is asymmetric") == RegionSet{RegionId::LeftEye});
  CHECK(regions("").empty());
  CHECK(regions("The MOUTH and Lips") == RegionSet{RegionId::Mouth});
  CHECK(regions("an eye looks glassy") == RegionSet{RegionId::LeftEye, RegionId::RightEye});
  CHECK(regions("the eyebrow is thin") == RegionSet{RegionId::LeftEyebrow, RegionId::RightEyebrow});
  CHECK(regions("the left eyebrow is thin") == RegionSet{RegionId::LeftEyebrow});
  CHECK(regions("lower face and chin") == RegionSet{RegionId::Chin});
  CHECK(regions("hairline artifacts").contains(RegionId::Hairline));
}

TEST_CASE("matching respects word boundaries") {
  CHECK(regions("earnest nosey lipstick").empty());
  CHECK(regions("heart").empty());
  CHECK(regions("(nose)") == RegionSet{RegionId::Nose});
  CHECK(regions("nose.") == RegionSet{RegionId::Nose});
  // The table lists "eye" but not the plural.
  CHECK(regions("the eyes are uneven").empty());
}

TEST_CASE("lexicon construction validates coverage") {
  std::map<RegionId, std::vector<std::string>> partial = {{RegionId::Mouth, {"mouth"}}};
  CHECK_THROWS_AS(Lexicon{partial}, ValidationError);

  std::map<RegionId, std::vector<std::string>> full;
  for (auto r : kAllRegions) full[r] = {std::string(to_string(r))};
  full[RegionId::Ear] = {"  "};
  CHECK_THROWS_AS(Lexicon{full}, ValidationError);
}

TEST_CASE("lexicon files override the table") {
  const auto lex = load_lexicon(std::filesystem::path(DFR_FIXTURES_DIR) / "lexicon_plural.json");
  CHECK(extract_regions("the eyes are uneven", lex) == RegionSet{RegionId::LeftEye, RegionId::RightEye});
  CHECK(lex.hash() != default_lexicon().hash());
  CHECK(lex.hash().size() == 16);
  CHECK_THROWS_AS(load_lexicon("/nonexistent/lexicon.json"), IoError);

  const auto bad = std::filesystem::temp_directory_path() / "dfr_bad_lexicon.json";
  std::ofstream(bad) << R"({"mouth": ["mouth"], "snout": ["snout"]})";
  CHECK_THROWS_AS(load_lexicon(bad), ValidationError);
  std::filesystem::remove(bad);
}

TEST_CASE("lexicon hash is stable") {
  std::map<RegionId, std::vector<std::string>> entries;
  for (auto r : kAllRegions) entries[r] = default_lexicon().lookup(r);
  CHECK(Lexicon(entries).hash() == default_lexicon().hash());
}
