#include "dfr/response.hpp"

#include <cctype>
#include <nlohmann/json.hpp>

namespace dfr {
namespace {

using nlohmann::json;

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

struct TagHits {
  std::size_t count = 0;
  std::size_t first = std::string_view::npos;
};

TagHits find_tag(std::string_view raw, std::string_view tag) {
  TagHits hits;
  for (auto pos = raw.find(tag); pos != std::string_view::npos; pos = raw.find(tag, pos + 1)) {
    if (hits.count++ == 0) hits.first = pos;
  }
  return hits;
}

bool is_blank(std::string_view s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Fills explanation/boxes from the answer body. Returns the first problem found
// or Ok; valid boxes are kept even when a later entry is rejected.
ParseDiagnostic read_answer_body(std::string_view body, ParsedResponse& out) {
  json doc = json::parse(body.begin(), body.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return ParseDiagnostic::MalformedAnswer;

  auto diag = ParseDiagnostic::Ok;
  auto note = [&diag](ParseDiagnostic d) {
    if (diag == ParseDiagnostic::Ok) diag = d;
  };

  auto expl = doc.find("explanation");
  if (expl == doc.end() || !expl->is_string()) {
    note(ParseDiagnostic::MissingExplanation);
  } else {
    out.explanation = expl->get<std::string>();
    if (is_blank(out.explanation)) note(ParseDiagnostic::EmptyExplanation);
  }

  auto bboxes = doc.find("bboxes");
  if (bboxes == doc.end() || !bboxes->is_array()) {
    note(ParseDiagnostic::MissingBboxes);
    return diag;
  }

  RegionSet seen;
  for (const auto& entry : *bboxes) {
    if (!entry.is_object()) {
      note(ParseDiagnostic::MalformedBbox);
      continue;
    }
    auto region = entry.find("region");
    auto box = entry.find("box");
    if (region == entry.end() || !region->is_string() || box == entry.end() ||
        !box->is_array() || box->size() != 4) {
      note(ParseDiagnostic::MalformedBbox);
      continue;
    }
    bool numeric = true;
    for (const auto& v : *box) numeric = numeric && v.is_number();
    if (!numeric) {
      note(ParseDiagnostic::MalformedBbox);
      continue;
    }
    auto id = region_from_string(region->get_ref<const std::string&>());
    if (!id) {
      note(ParseDiagnostic::UnknownRegion);
      continue;
    }
    Box b{(*box)[0].get<double>(), (*box)[1].get<double>(), (*box)[2].get<double>(),
          (*box)[3].get<double>()};
    if (!b.valid()) {
      note(ParseDiagnostic::InvalidBox);
      continue;
    }
    if (seen.contains(*id)) {
      note(ParseDiagnostic::DuplicateRegion);
      continue;
    }
    seen.insert(*id);
    out.boxes.push_back({*id, b});
  }
  return diag;
}

}  // namespace

std::string_view to_string(ParseDiagnostic d) {
  switch (d) {
    case ParseDiagnostic::Ok: return "ok";
    case ParseDiagnostic::MissingThink: return "missing_think";
    case ParseDiagnostic::MissingAnswer: return "missing_answer";
    case ParseDiagnostic::DuplicateBlock: return "duplicate_block";
    case ParseDiagnostic::MisorderedBlocks: return "misordered_blocks";
    case ParseDiagnostic::TextOutsideBlocks: return "text_outside_blocks";
    case ParseDiagnostic::MalformedAnswer: return "malformed_answer";
    case ParseDiagnostic::MissingExplanation: return "missing_explanation";
    case ParseDiagnostic::EmptyExplanation: return "empty_explanation";
    case ParseDiagnostic::MissingBboxes: return "missing_bboxes";
    case ParseDiagnostic::MalformedBbox: return "malformed_bbox";
    case ParseDiagnostic::UnknownRegion: return "unknown_region";
    case ParseDiagnostic::InvalidBox: return "invalid_box";
    case ParseDiagnostic::DuplicateRegion: return "duplicate_region";
  }
  return "unknown";
}

Label extract_label(std::string_view text) {
  for (std::size_t i = 0; i + 4 <= text.size(); ++i) {
    if (i > 0 && is_word_char(text[i - 1])) continue;
    if (i + 4 < text.size() && is_word_char(text[i + 4])) continue;
    char word[4];
    for (std::size_t k = 0; k < 4; ++k) {
      word[k] = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i + k])));
    }
    std::string_view w(word, 4);
    if (w == "fake") return Label::Fake;
    if (w == "real") return Label::Real;
  }
  return Label::Unknown;
}

ParsedResponse parse_response(std::string_view raw) {
  ParsedResponse out;
  auto diag = ParseDiagnostic::Ok;
  auto note = [&diag](ParseDiagnostic d) {
    if (diag == ParseDiagnostic::Ok) diag = d;
  };

  const auto to = find_tag(raw, kThinkOpen);
  const auto tc = find_tag(raw, kThinkClose);
  const auto ao = find_tag(raw, kAnswerOpen);
  const auto ac = find_tag(raw, kAnswerClose);

  if (to.count == 0 || tc.count == 0) note(ParseDiagnostic::MissingThink);
  if (ao.count == 0 || ac.count == 0) note(ParseDiagnostic::MissingAnswer);
  if (to.count > 1 || tc.count > 1 || ao.count > 1 || ac.count > 1) {
    note(ParseDiagnostic::DuplicateBlock);
  }

  const bool think_ok = to.count == 1 && tc.count == 1 && to.first < tc.first;
  const bool answer_ok = ao.count == 1 && ac.count == 1 && ao.first < ac.first;

  if (think_ok) {
    auto begin = to.first + kThinkOpen.size();
    out.think_text = std::string(raw.substr(begin, tc.first - begin));
  }
  if (think_ok && answer_ok) {
    if (tc.first > ao.first) {
      note(ParseDiagnostic::MisorderedBlocks);
    } else {
      auto before = raw.substr(0, to.first);
      auto between = raw.substr(tc.first + kThinkClose.size(),
                                ao.first - tc.first - kThinkClose.size());
      auto after = raw.substr(ac.first + kAnswerClose.size());
      if (!is_blank(before) || !is_blank(between) || !is_blank(after)) {
        note(ParseDiagnostic::TextOutsideBlocks);
      }
    }
  } else if (to.count == 1 && tc.count == 1 && ao.count == 1 && ac.count == 1) {
    note(ParseDiagnostic::MisorderedBlocks);
  }

  if (answer_ok) {
    auto begin = ao.first + kAnswerOpen.size();
    note(read_answer_body(raw.substr(begin, ac.first - begin), out));
  }

  out.pred_label = extract_label(out.explanation);
  out.diagnostic = diag;
  out.well_formed = diag == ParseDiagnostic::Ok;
  return out;
}

std::string format_answer(std::string_view explanation, const std::vector<RegionBox>& boxes) {
  json doc;
  doc["explanation"] = std::string(explanation);
  doc["bboxes"] = json::array();
  for (const auto& rb : boxes) {
    doc["bboxes"].push_back(
        {{"region", to_string(rb.region)}, {"box", {rb.box.x1, rb.box.y1, rb.box.x2, rb.box.y2}}});
  }
  // '<' only occurs inside JSON strings; escaping it keeps the body from
  // ever closing the surrounding tag.
  std::string text = doc.dump(-1, ' ', false, json::error_handler_t::replace);
  std::string escaped;
  escaped.reserve(text.size());
  for (char c : text) {
    if (c == '<') {
      escaped += "\\u003c";
    } else {
      escaped += c;
    }
  }
  return escaped;
}

std::string format_response(std::string_view think, std::string_view explanation,
                            const std::vector<RegionBox>& boxes) {
  std::string out;
  out += kThinkOpen;
  out += think;
  out += kThinkClose;
  out += kAnswerOpen;
  out += format_answer(explanation, boxes);
  out += kAnswerClose;
  return out;
}

}  // namespace dfr
