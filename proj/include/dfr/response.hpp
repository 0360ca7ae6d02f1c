#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dfr/types.hpp"

namespace dfr {

/// Why a candidate response failed the structured-output grammar.
enum class ParseDiagnostic {
  Ok,
  MissingThink,       // no complete <think>...</think> block
  MissingAnswer,      // no complete <answer>...</answer> block
  DuplicateBlock,     // a tag appears more than once
  MisorderedBlocks,   // tags present but not think-then-answer
  TextOutsideBlocks,  // non-whitespace outside the two blocks
  MalformedAnswer,    // answer body is not a JSON object
  MissingExplanation, // "explanation" absent or not a string
  EmptyExplanation,
  MissingBboxes,      // "bboxes" absent or not an array
  MalformedBbox,      // entry is not {region, box:[4 numbers]}
  UnknownRegion,
  InvalidBox,
  DuplicateRegion,
};

std::string_view to_string(ParseDiagnostic d);

/// A candidate response decomposed into its parts.
///
/// When `well_formed` is false the remaining fields hold whatever could be
/// recovered: the explanation if the answer body parsed, and the boxes that
/// were individually valid (first occurrence per region).
struct ParsedResponse {
  std::string think_text;
  std::string explanation;
  std::vector<RegionBox> boxes;
  Label pred_label = Label::Unknown;
  bool well_formed = false;
  ParseDiagnostic diagnostic = ParseDiagnostic::MissingThink;

  friend bool operator==(const ParsedResponse&, const ParsedResponse&) = default;
};

/// Total parser for `<think>...</think><answer>{json}</answer>` outputs.
ParsedResponse parse_response(std::string_view raw);

/// First whole-word, case-insensitive occurrence of "fake" or "real".
Label extract_label(std::string_view text);

/// Serializes the answer body as the JSON object the parser accepts.
std::string format_answer(std::string_view explanation, const std::vector<RegionBox>& boxes);

/// Builds a complete response in the grammar accepted by parse_response.
std::string format_response(std::string_view think, std::string_view explanation,
                            const std::vector<RegionBox>& boxes);

}  // namespace dfr
