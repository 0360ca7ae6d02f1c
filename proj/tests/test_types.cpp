#include <doctest.h>

#include "dfr/records.hpp"
#include "dfr/types.hpp"

using namespace dfr;

TEST_CASE("region names round-trip through the closed set") {
  for (auto r : kAllRegions) {
    CHECK(region_from_string(to_string(r)) == r);
    CHECK(parse_region(to_string(r)) == r);
  }
  CHECK_FALSE(region_from_string("eyes"));
  CHECK_THROWS_AS(parse_region("forehead"), ValidationError);
}

TEST_CASE("region sets behave like sets") {
  RegionSet a{RegionId::Mouth, RegionId::Nose};
  RegionSet b{RegionId::Nose, RegionId::Ear};
  CHECK((a & b) == RegionSet{RegionId::Nose});
  CHECK((a | b).size() == 3);
  CHECK(a.to_vector() == std::vector<RegionId>{RegionId::Nose, RegionId::Mouth});
  CHECK(RegionSet::from_bits(0xffff).size() == kRegionCount);
  a.erase(RegionId::Mouth);
  CHECK(a == RegionSet{RegionId::Nose});
}

TEST_CASE("box invariants") {
  CHECK(make_box(0.1, 0.2, 0.3, 0.4).area() == doctest::Approx(0.04));
  CHECK_THROWS_AS(make_box(0.6, 0.6, 0.4, 0.7), ValidationError);
  CHECK_THROWS_AS(make_box(0.2, 0.2, 0.2, 0.7), ValidationError);
  CHECK_THROWS_AS(make_box(-0.1, 0.0, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(make_box(0.0, 0.0, 1.5, 0.5), ValidationError);
  CHECK_FALSE(Box{0.0, 0.0, std::nan(""), 0.5}.valid());
  CHECK(make_box(0.0, 0.0, 1.0, 1.0).valid());
}

TEST_CASE("labels parse case-insensitively") {
  CHECK(label_from_string("FAKE") == Label::Fake);
  CHECK(label_from_string("Real") == Label::Real);
  CHECK_FALSE(label_from_string("maybe"));
}

TEST_CASE("record validation") {
  DmaRecord r{"a.png", "q", "the mouth is fake", Label::Fake, {{RegionId::Mouth, {0.1, 0.1, 0.2, 0.2}}}};
  CHECK_NOTHROW(r.validate());

  auto dup = r;
  dup.gt_boxes.push_back(dup.gt_boxes.front());
  CHECK_THROWS_AS(dup.validate(), ValidationError);

  auto unknown = r;
  unknown.gt_label = Label::Unknown;
  CHECK_THROWS_AS(unknown.validate(), ValidationError);

  auto bad_box = r;
  bad_box.gt_boxes[0].box = {0.3, 0.1, 0.2, 0.2};
  CHECK_THROWS_AS(bad_box.validate(), ValidationError);
}

TEST_CASE("record JSON round-trip") {
  DmaRecord r{"a.png", "q", "nose and mouth", Label::Real,
              {{RegionId::Nose, {0.4, 0.4, 0.6, 0.6}}, {RegionId::Mouth, {0.3, 0.6, 0.7, 0.8}}}};
  CHECK(dma_record_from_json(to_json(r)) == r);
  CHECK(dma_record_from_json(nlohmann::json::parse(dump_line(to_json(r)))) == r);

  auto j = to_json(r);
  j["gt_boxes"][0]["region"] = "eyes";
  CHECK_THROWS_AS(dma_record_from_json(j), ValidationError);
  j = to_json(r);
  j["gt_label"] = "unknown";
  CHECK_THROWS_AS(dma_record_from_json(j), ValidationError);
}
