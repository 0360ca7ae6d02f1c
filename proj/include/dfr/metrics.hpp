#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfr/types.hpp"

namespace dfr {

/// One evaluated prediction. `gt` is never Unknown.
struct EvalPair {
  Label pred = Label::Unknown;
  Label gt = Label::Fake;
  std::optional<double> score;
};

/// Fraction of pairs with pred == gt. Throws ValidationError when empty.
double accuracy(std::span<const EvalPair> pairs);

/// F1 over the positive class (Fake by default). Unknown predictions count as
/// negatives; zero denominators give 0. Throws ValidationError when empty.
double f1(std::span<const EvalPair> pairs, Label positive = Label::Fake);

/// Mann-Whitney AUC, ties counted as one half; higher scores should indicate
/// `positive_class`. Throws ValidationError unless both classes are present.
double auc(std::span<const double> scores, std::span<const Label> labels,
           Label positive_class = Label::Fake);

struct MetricsReport {
  std::size_t count = 0;
  std::optional<double> accuracy;
  std::optional<double> f1;
  std::optional<double> auc;

  nlohmann::json to_json() const;
};

/// Prediction file: one JSON object per line with "label" ("real"/"fake" or
/// 0/1 with 1 = fake) and "text" (generated answer, label read by keyword)
/// and/or "score" (higher means fake).
MetricsReport evaluate_predictions(std::istream& in);
MetricsReport evaluate_predictions(const std::filesystem::path& path);

}  // namespace dfr
