#include "dfr/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

namespace dfr {
namespace {

std::string normalize_phrase(std::string_view raw) {
  auto begin = raw.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = raw.find_last_not_of(" \t\r\n");
  std::string out(raw.substr(begin, end - begin + 1));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

Lexicon::Lexicon(const std::map<RegionId, std::vector<std::string>>& entries) {
  for (auto r : kAllRegions) {
    auto it = entries.find(r);
    if (it == entries.end()) {
      throw ValidationError("lexicon: region '" + std::string(to_string(r)) + "' has no entry");
    }
    auto& list = entries_[index_of(r)];
    for (const auto& p : it->second) {
      auto norm = normalize_phrase(p);
      if (norm.empty()) continue;
      if (std::find(list.begin(), list.end(), norm) == list.end()) list.push_back(std::move(norm));
    }
    if (list.empty()) {
      throw ValidationError("lexicon: region '" + std::string(to_string(r)) +
                            "' has no keyword phrases");
    }
  }

  std::map<std::string, RegionSet> by_phrase;
  for (auto r : kAllRegions) {
    for (const auto& p : entries_[index_of(r)]) by_phrase[p].insert(r);
  }
  for (auto& [text, regions] : by_phrase) phrases_.push_back({text, regions});
  std::stable_sort(phrases_.begin(), phrases_.end(), [](const Phrase& a, const Phrase& b) {
    return a.text.size() > b.text.size();
  });
}

std::string Lexicon::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (auto r : kAllRegions) {
    mix(to_string(r));
    mix(":");
    for (const auto& p : entries_[index_of(r)]) {
      mix(p);
      mix(",");
    }
    mix(";");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const Lexicon& default_lexicon() {
  static const Lexicon lexicon({
      {RegionId::Skin, {"skin", "cheek", "forehead", "complexion", "dermal", "face"}},
      {RegionId::Nose, {"nose", "nostril", "nasal"}},
      {RegionId::Mouth, {"mouth", "lip", "lips"}},
      {RegionId::Teeth, {"tooth", "teeth"}},
      {RegionId::LeftEye, {"left eye", "left-eye", "l eye", "lefteye", "eye", "ocular"}},
      {RegionId::RightEye, {"right eye", "right-eye", "r eye", "righteye", "eye", "ocular"}},
      {RegionId::LeftEyebrow,
       {"left eyebrow", "left brow", "left-eyebrow", "eyebrow", "brow"}},
      {RegionId::RightEyebrow,
       {"right eyebrow", "right brow", "right-eyebrow", "eyebrow", "brow"}},
      {RegionId::Chin, {"chin", "jaw", "jawline", "lower face"}},
      {RegionId::Beard, {"beard", "mustache", "moustache", "goatee"}},
      {RegionId::Hairline, {"hairline", "hair line", "hair"}},
      {RegionId::Ear, {"ear", "ears"}},
  });
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file " + path.string());
  auto doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ValidationError("lexicon file " + path.string() + ": expected a JSON object");
  }
  std::map<RegionId, std::vector<std::string>> entries;
  for (const auto& [name, phrases] : doc.items()) {
    auto region = region_from_string(name);
    if (!region) throw ValidationError("lexicon." + name + ": unknown region");
    if (!phrases.is_array()) throw ValidationError("lexicon." + name + ": expected an array");
    auto& list = entries[*region];
    for (const auto& p : phrases) {
      if (!p.is_string()) throw ValidationError("lexicon." + name + ": phrases must be strings");
      list.push_back(p.get<std::string>());
    }
  }
  return Lexicon(entries);
}

RegionSet extract_regions(std::string_view text, const Lexicon& lexicon) {
  std::string lower(text);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::vector<bool> consumed(lower.size(), false);

  RegionSet found;
  for (const auto& phrase : lexicon.phrases()) {
    const auto& p = phrase.text;
    for (auto pos = lower.find(p); pos != std::string::npos; pos = lower.find(p, pos + 1)) {
      auto end = pos + p.size();
      if (pos > 0 && is_word_char(lower[pos - 1])) continue;
      if (end < lower.size() && is_word_char(lower[end])) continue;
      if (std::any_of(consumed.begin() + pos, consumed.begin() + end, [](bool b) { return b; })) {
        continue;
      }
      std::fill(consumed.begin() + pos, consumed.begin() + end, true);
      found = found | phrase.regions;
    }
  }
  return found;
}

}  // namespace dfr
