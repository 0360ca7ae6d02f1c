#include <doctest.h>

#include <random>

#include "dfr/response.hpp"

using namespace dfr;

namespace {

const char* kGood =
    R"(<think>edges blur</think><answer>{"explanation":"The image is fake: the mouth is blurred.","bboxes":[{"region":"mouth","box":[0.4,0.6,0.6,0.75]}]}</answer>)";

std::string with_answer(const std::string& body) { return "<think>t</think><answer>" + body + "</answer>"; }

}  // namespace

TEST_CASE("well-formed response parses") {
  const auto p = parse_response(kGood);
  CHECK(p.well_formed);
  CHECK(p.diagnostic == ParseDiagnostic::Ok);
  CHECK(p.pred_label == Label::Fake);
  CHECK(p.think_text == "edges blur");
  CHECK(p.explanation == "The image is fake: the mouth is blurred.");
  REQUIRE(p.boxes.size() == 1);
  CHECK(p.boxes[0].region == RegionId::Mouth);
  CHECK(p.boxes[0].box == Box{0.4, 0.6, 0.6, 0.75});
}

TEST_CASE("whitespace around the blocks is tolerated") {
  CHECK(parse_response(std::string("\n  ") + kGood + "\n").well_formed);
}

TEST_CASE("grammar violations carry diagnostics") {
  using D = ParseDiagnostic;
  struct Case {
    std::string raw;
    D diag;
  };
  const std::vector<Case> cases = {
      {"", D::MissingThink},
      {R"(<answer>{"explanation":"fake","bboxes":[]}</answer>)", D::MissingThink},
      {"<think>x</think>", D::MissingAnswer},
      {"<think>x</think><answer>{}", D::MissingAnswer},
      {"<think>a</think><think>b</think><answer>{}</answer>", D::DuplicateBlock},
      {R"(<answer>{"explanation":"fake","bboxes":[]}</answer><think>x</think>)", D::MisorderedBlocks},
      {R"(hello <think>x</think><answer>{"explanation":"fake","bboxes":[]}</answer>)", D::TextOutsideBlocks},
      {with_answer("not json"), D::MalformedAnswer},
      {with_answer("[1,2]"), D::MalformedAnswer},
      {with_answer(R"({"bboxes":[]})"), D::MissingExplanation},
      {with_answer(R"({"explanation":"  ","bboxes":[]})"), D::EmptyExplanation},
      {with_answer(R"({"explanation":"fake"})"), D::MissingBboxes},
      {with_answer(R"({"explanation":"fake","bboxes":[{"region":"mouth","box":[0.1,0.2,0.3]}]})"), D::MalformedBbox},
      {with_answer(R"({"explanation":"fake","bboxes":[{"region":"mouth","box":["a",0.2,0.3,0.4]}]})"), D::MalformedBbox},
      {with_answer(R"({"explanation":"fake","bboxes":[{"region":"eyes","box":[0.1,0.2,0.3,0.4]}]})"), D::UnknownRegion},
      {with_answer(R"({"explanation":"fake","bboxes":[{"region":"mouth","box":[0.6,0.6,0.4,0.7]}]})"), D::InvalidBox},
      {with_answer(R"({"explanation":"fake","bboxes":[{"region":"mouth","box":[0.1,0.1,0.2,0.2]},{"region":"mouth","box":[0.3,0.3,0.4,0.4]}]})"), D::DuplicateRegion},
  };
  for (const auto& c : cases) {
    CAPTURE(c.raw);
    const auto p = parse_response(c.raw);
    CHECK_FALSE(p.well_formed);
    CHECK(to_string(p.diagnostic) == to_string(c.diag));
  }
}

TEST_CASE("malformed responses keep what was recoverable") {
  const auto p = parse_response(with_answer(
      R"({"explanation":"fake mouth","bboxes":[{"region":"mouth","box":[0.1,0.1,0.2,0.2]},{"region":"nose","box":[0.5,0.1,0.2,0.2]}]})"));
  CHECK(p.diagnostic == ParseDiagnostic::InvalidBox);
  CHECK(p.explanation == "fake mouth");
  CHECK(p.pred_label == Label::Fake);
  REQUIRE(p.boxes.size() == 1);
  CHECK(p.boxes[0].region == RegionId::Mouth);

  const auto dup = parse_response(std::string("<think>x</think>") + kGood);
  CHECK(dup.diagnostic == ParseDiagnostic::DuplicateBlock);
}

TEST_CASE("extract_label is whole-word and case-insensitive") {
  CHECK(extract_label("This face is fake.") == Label::Fake);
  CHECK(extract_label("It looks Real and natural.") == Label::Real);
  CHECK(extract_label("freaky texture") == Label::Unknown);
  CHECK(extract_label("fakeness and realism") == Label::Unknown);
  CHECK(extract_label("REAL, not fake") == Label::Real);
  CHECK(extract_label("") == Label::Unknown);
}

TEST_CASE("format_response round-trips through parse_response") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> texts = {
      "The image is fake: lips </answer> look pasted",
      "real <think> skin with \"quotes\" and \\ backslashes",
      "fake\nmulti-line\texplanation with unicode \xc3\xa9",
      "Real.",
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RegionBox> boxes;
    for (auto r : kAllRegions) {
      if (u(rng) < 0.3) {
        double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        if (a == b || c == d) continue;
        boxes.push_back({r, {std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)}});
      }
    }
    const auto& text = texts[trial % texts.size()];
    const auto p = parse_response(format_response("reasoning", text, boxes));
    CAPTURE(trial);
    CHECK(p.well_formed);
    CHECK(p.explanation == text);
    CHECK(p.boxes == boxes);
    CHECK(p.pred_label == extract_label(text));
  }
}
