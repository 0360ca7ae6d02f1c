#include "dfr/dma_builder.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "dfr/records.hpp"

namespace dfr {

using nlohmann::json;

SourceRecord source_record_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("source record: expected a JSON object");
  auto str = [&j](const char* key, bool required) {
    if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
    if (required) throw ValidationError(std::string("missing string field '") + key + "'");
    return std::string();
  };
  SourceRecord s;
  s.image_ref = str("image_ref", true);
  s.question = str("question", false);
  s.gt_text = str("gt_text", true);
  if (s.gt_text.empty()) throw ValidationError("gt_text is empty");
  auto label = label_from_string(str("gt_label", true));
  if (!label || *label == Label::Unknown) throw ValidationError("gt_label must be 'real' or 'fake'");
  s.gt_label = *label;
  return s;
}

BuiltRecord build_record(const SourceRecord& src, const Lexicon& lexicon,
                         const LandmarkSet& landmarks, double pad) {
  if (!(pad >= 0.0 && pad <= 0.5)) throw ValidationError("pad must lie in [0, 0.5]");
  const RegionSet mentioned = extract_regions(src.gt_text, lexicon);
  if (mentioned.empty()) {
    throw BuildError(BuildError::Kind::NoRegions,
                     "record '" + src.image_ref + "': text mentions no facial region");
  }

  BuiltRecord out;
  out.record.image_ref = src.image_ref;
  out.record.question = src.question;
  out.record.gt_text = src.gt_text;
  out.record.gt_label = src.gt_label;
  for (auto r : mentioned.to_vector()) {
    if (landmarks.has(r)) {
      out.record.gt_boxes.push_back({r, region_box_from_landmarks(landmarks, r, pad)});
    } else {
      out.missing.insert(r);
    }
  }
  if (out.record.gt_boxes.empty()) {
    throw BuildError(BuildError::Kind::MissingLandmarks,
                     "record '" + src.image_ref + "': no mentioned region has landmarks");
  }
  return out;
}

json BuildReport::to_json() const {
  json freq = json::object();
  for (auto r : kAllRegions) freq[std::string(to_string(r))] = region_frequency[index_of(r)];
  return {{"total", total},
          {"succeeded", succeeded},
          {"skipped_no_regions", skipped_no_regions},
          {"skipped_missing_landmarks", skipped_missing_landmarks},
          {"region_frequency", std::move(freq)}};
}

BuildReport build_dataset(std::istream& src, const LandmarkFixture& landmarks, std::ostream& out,
                          const Lexicon& lexicon, double pad) {
  if (!(pad >= 0.0 && pad <= 0.5)) throw ValidationError("pad must lie in [0, 0.5]");
  out << dump_line({{"dma_header",
                     {{"builder_version", kBuilderVersion},
                      {"lexicon_hash", lexicon.hash()},
                      {"pad", pad}}}})
      << '\n';

  BuildReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(src, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SourceRecord rec;
    try {
      auto doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (doc.is_discarded()) throw ValidationError("not valid JSON");
      rec = source_record_from_json(doc);
    } catch (const ValidationError& e) {
      throw ValidationError("source line " + std::to_string(line_no) + ": " + e.what());
    }

    ++report.total;
    auto lm = landmarks.find(rec.image_ref);
    if (lm == landmarks.end()) {
      ++report.skipped_missing_landmarks;
      continue;
    }
    try {
      auto built = build_record(rec, lexicon, lm->second, pad);
      json j = to_json(built.record);
      json missing = json::array();
      for (auto r : built.missing.to_vector()) missing.push_back(to_string(r));
      j["missing_regions"] = std::move(missing);
      out << dump_line(j) << '\n';
      ++report.succeeded;
      for (const auto& rb : built.record.gt_boxes) ++report.region_frequency[index_of(rb.region)];
    } catch (const BuildError& e) {
      if (e.kind() == BuildError::Kind::NoRegions) {
        ++report.skipped_no_regions;
      } else {
        ++report.skipped_missing_landmarks;
      }
    }
  }
  if (src.bad()) throw IoError("error reading source records");
  return report;
}

BuildReport build_dataset(const std::filesystem::path& src_path,
                          const std::filesystem::path& landmarks_path,
                          const std::filesystem::path& out_path, const Lexicon& lexicon, double pad) {
  std::ifstream src(src_path);
  if (!src) throw IoError("cannot open source file " + src_path.string());
  auto landmarks = load_landmark_fixture(landmarks_path);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + out_path.string());
  auto report = build_dataset(src, landmarks, out, lexicon, pad);
  out.flush();
  if (!out) throw IoError("error writing " + out_path.string());
  return report;
}

std::vector<DmaRecord> load_dma_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open DMA file " + path.string());
  std::vector<DmaRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (doc.is_discarded()) throw ValidationError(where + "not valid JSON");
    if (doc.is_object() && doc.contains("dma_header")) continue;
    try {
      records.push_back(dma_record_from_json(doc));
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return records;
}

}  // namespace dfr
