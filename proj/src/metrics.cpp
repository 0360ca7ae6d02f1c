#include "dfr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include "dfr/response.hpp"

namespace dfr {

namespace {

void check_ground_truth(std::span<const EvalPair> pairs) {
  for (const auto& p : pairs) {
    if (p.gt == Label::Unknown) throw ValidationError("evaluation ground truth must be real or fake");
  }
}

}  // namespace

double accuracy(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw ValidationError("accuracy of an empty evaluation set");
  check_ground_truth(pairs);
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    if (p.pred != Label::Unknown && p.pred == p.gt) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double f1(std::span<const EvalPair> pairs, Label positive) {
  if (pairs.empty()) throw ValidationError("F1 of an empty evaluation set");
  check_ground_truth(pairs);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& p : pairs) {
    const bool pred_pos = p.pred == positive;
    const bool gt_pos = p.gt == positive;
    if (pred_pos && gt_pos) ++tp;
    if (pred_pos && !gt_pos) ++fp;
    if (!pred_pos && gt_pos) ++fn;
  }
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

double auc(std::span<const double> scores, std::span<const Label> labels, Label positive_class) {
  if (scores.size() != labels.size()) throw ValidationError("auc: scores and labels differ in length");
  const auto n = scores.size();
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("auc: scores must be finite");
  }
  std::vector<char> positive(n);
  for (std::size_t i = 0; i < n; ++i) positive[i] = labels[i] == positive_class;
  const auto n_pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), 1));
  const auto n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("auc needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mid-ranks, doubled to stay integral: tied block [i, j) gets i + j + 1.
  std::uint64_t doubled_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) doubled_rank_sum += i + j + 1;
    }
    i = j;
  }
  // U = rank_sum - n_pos (n_pos + 1) / 2, all doubled.
  const auto doubled_u = static_cast<double>(doubled_rank_sum) -
                         static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return doubled_u / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j = {{"count", count}};
  j["accuracy"] = accuracy ? nlohmann::json(*accuracy) : nlohmann::json(nullptr);
  j["f1"] = f1 ? nlohmann::json(*f1) : nlohmann::json(nullptr);
  j["auc"] = auc ? nlohmann::json(*auc) : nlohmann::json(nullptr);
  return j;
}

MetricsReport evaluate_predictions(std::istream& in) {
  std::vector<EvalPair> text_pairs;
  std::vector<double> scores;
  std::vector<Label> score_labels;
  std::size_t count = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "prediction line " + std::to_string(line_no) + ": ";
    auto doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) throw ValidationError(where + "not a JSON object");

    Label gt = Label::Unknown;
    if (doc.contains("label") && doc["label"].is_string()) {
      gt = label_from_string(doc["label"].get<std::string>()).value_or(Label::Unknown);
    } else if (doc.contains("label") && doc["label"].is_number_integer()) {
      const auto v = doc["label"].get<int>();
      gt = v == 1 ? Label::Fake : v == 0 ? Label::Real : Label::Unknown;
    }
    if (gt == Label::Unknown) throw ValidationError(where + "'label' must be real/fake or 0/1");

    const bool has_text = doc.contains("text") && doc["text"].is_string();
    const bool has_score = doc.contains("score") && doc["score"].is_number();
    if (!has_text && !has_score) throw ValidationError(where + "needs 'text' or 'score'");
    ++count;
    if (has_text) text_pairs.push_back({extract_label(doc["text"].get<std::string>()), gt, std::nullopt});
    if (has_score) {
      scores.push_back(doc["score"].get<double>());
      score_labels.push_back(gt);
    }
  }
  if (in.bad()) throw IoError("error reading predictions");

  MetricsReport report;
  report.count = count;
  if (!text_pairs.empty()) {
    report.accuracy = accuracy(text_pairs);
    report.f1 = f1(text_pairs);
  }
  if (!scores.empty()) {
    const auto pos = std::count(score_labels.begin(), score_labels.end(), Label::Fake);
    if (pos > 0 && static_cast<std::size_t>(pos) < score_labels.size()) {
      report.auc = auc(scores, score_labels);
    }
  }
  return report;
}

MetricsReport evaluate_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prediction file " + path.string());
  return evaluate_predictions(in);
}

}  // namespace dfr
