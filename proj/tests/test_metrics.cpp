#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "dfr/metrics.hpp"
#include "oracles.hpp"

using namespace dfr;

namespace {

std::vector<EvalPair> pairs(std::initializer_list<std::pair<Label, Label>> pg) {
  std::vector<EvalPair> out;
  for (auto [p, g] : pg) out.push_back({p, g, std::nullopt});
  return out;
}

constexpr Label F = Label::Fake, R = Label::Real, U = Label::Unknown;

}  // namespace

TEST_CASE("accuracy") {
  CHECK(accuracy(pairs({{F, F}, {R, R}})) == 1.0);
  CHECK(accuracy(pairs({{F, F}, {R, R}, {F, F}, {F, R}})) == 0.75);
  CHECK(accuracy(pairs({{U, F}, {U, R}})) == 0.0);
  CHECK_THROWS_AS(accuracy(std::vector<EvalPair>{}), ValidationError);
  CHECK_THROWS_AS(accuracy(pairs({{F, U}})), ValidationError);
}

TEST_CASE("f1") {
  CHECK(f1(pairs({{F, F}, {R, R}})) == 1.0);
  CHECK(f1(pairs({{F, F}, {F, F}, {F, R}, {R, F}, {R, R}})) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(f1(pairs({{R, F}, {U, F}, {R, R}})) == 0.0);
  CHECK(f1(pairs({{R, R}})) == 0.0);
  CHECK(f1(pairs({{R, R}, {F, F}}), Label::Real) == 1.0);
}

TEST_CASE("auc") {
  const std::vector<double> sep = {0.1, 0.2, 0.8, 0.9};
  const std::vector<Label> y = {R, R, F, F};
  CHECK(auc(sep, y) == 1.0);
  const std::vector<double> tied = {0.5, 0.5, 0.5, 0.5};
  CHECK(auc(tied, y) == 0.5);
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
  CHECK(auc(s, y) == 0.75);

  const std::vector<Label> one_class = {F, F};
  const std::vector<double> two = {0.1, 0.2};
  CHECK_THROWS_AS(auc(two, one_class), ValidationError);
  const std::vector<double> nan = {0.1, std::nan(""), 0.3, 0.4};
  CHECK_THROWS_AS(auc(nan, y), ValidationError);
}

TEST_CASE("metrics agree with brute-force oracles") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng() % 12;
    std::vector<Label> pred(n), gt(n);
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<Label>(rng() % 3);
      gt[i] = static_cast<Label>(rng() % 2);
      score[i] = static_cast<double>(rng() % 5) / 4.0;  // coarse grid forces ties
    }
    std::vector<EvalPair> ev;
    for (std::size_t i = 0; i < n; ++i) ev.push_back({pred[i], gt[i], score[i]});
    const auto c = oracle::confusion(pred, gt);
    CHECK(accuracy(ev) == double(c.correct) / double(c.n));
    CHECK(f1(ev) == oracle::f1_from(c));

    const bool both = std::count(gt.begin(), gt.end(), F) > 0 && std::count(gt.begin(), gt.end(), R) > 0;
    if (!both) continue;
    const double a = auc(score, gt);
    CHECK(a == oracle::pairwise_auc(score, gt).value());

    std::vector<double> warped(n);
    for (std::size_t i = 0; i < n; ++i) warped[i] = std::exp(3.0 * score[i]) - 7.0;
    CHECK(auc(warped, gt) == a);
  }
}

TEST_CASE("swapping classes maps auc to 1 - auc") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(20);
  std::vector<Label> y(20);
  for (int i = 0; i < 20; ++i) {
    s[i] = u(rng);
    y[i] = i % 3 == 0 ? F : R;
  }
  CHECK(auc(s, y, Label::Real) == doctest::Approx(1.0 - auc(s, y)).epsilon(1e-15));
}

TEST_CASE("prediction files") {
  const auto r = evaluate_predictions(std::filesystem::path(DFR_FIXTURES_DIR) / "predictions_hand.jsonl");
  CHECK(r.count == 8);
  CHECK(*r.accuracy == 0.75);
  CHECK(*r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(*r.auc == doctest::Approx(13.0 / 15.0).epsilon(1e-15));

  std::istringstream numeric("{\"label\":1,\"score\":0.9}\n{\"label\":0,\"score\":0.1}\n");
  const auto n = evaluate_predictions(numeric);
  CHECK_FALSE(n.accuracy);
  CHECK(*n.auc == 1.0);

  std::istringstream bad("{\"label\":\"maybe\",\"text\":\"fake\"}\n");
  CHECK_THROWS_WITH_AS(evaluate_predictions(bad), doctest::Contains("line 1"), ValidationError);
  CHECK_THROWS_AS(evaluate_predictions(std::filesystem::path("/nonexistent.jsonl")), IoError);
}
