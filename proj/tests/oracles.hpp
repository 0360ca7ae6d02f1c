#pragma once

// Independent reference computations for the test suites. None of these call
// into the library code they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dfr/types.hpp"

namespace oracle {

inline constexpr int kGrid = 1000;

/// Box with corners on the 1e-3 lattice, stored as integer cell edges.
struct GridBox {
  int x1, y1, x2, y2;
  dfr::Box box() const { return {x1 / double(kGrid), y1 / double(kGrid), x2 / double(kGrid), y2 / double(kGrid)}; }
};

inline GridBox random_grid_box(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, kGrid);
  int a = d(rng), b = d(rng), c = d(rng), e = d(rng);
  while (a == b) b = d(rng);
  while (c == e) e = d(rng);
  return {std::min(a, b), std::min(c, e), std::max(a, b), std::max(c, e)};
}

/// IoU by visiting every cell of a 1000x1000 raster and testing its center.
inline double pixel_iou(const GridBox& a, const GridBox& b) {
  static const std::vector<double> centers = [] {
    std::vector<double> c(kGrid);
    for (int i = 0; i < kGrid; ++i) c[i] = (i + 0.5) / kGrid;
    return c;
  }();
  const dfr::Box ba = a.box(), bb = b.box();
  long inter = 0, uni = 0;
  for (int i = 0; i < kGrid; ++i) {
    const double cx = centers[i];
    const bool in_a_x = cx > ba.x1 && cx < ba.x2;
    const bool in_b_x = cx > bb.x1 && cx < bb.x2;
    if (!in_a_x && !in_b_x) continue;
    for (int j = 0; j < kGrid; ++j) {
      const double cy = centers[j];
      const bool in_a = in_a_x && cy > ba.y1 && cy < ba.y2;
      const bool in_b = in_b_x && cy > bb.y1 && cy < bb.y2;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

/// Alignment reward by enumerating region names into ordered sets.
inline double align_by_enumeration(std::uint16_t text_bits, std::uint16_t box_bits, double eps) {
  std::set<std::string> text, boxes;
  for (std::size_t i = 0; i < dfr::kRegionCount; ++i) {
    const auto name = std::string(dfr::to_string(dfr::kAllRegions[i]));
    if (text_bits >> i & 1u) text.insert(name);
    if (box_bits >> i & 1u) boxes.insert(name);
  }
  std::vector<std::string> inter, uni;
  std::set_intersection(text.begin(), text.end(), boxes.begin(), boxes.end(), std::back_inserter(inter));
  std::set_union(text.begin(), text.end(), boxes.begin(), boxes.end(), std::back_inserter(uni));
  return static_cast<double>(inter.size()) / (static_cast<double>(uni.size()) + eps);
}

/// (r - mean) / (population std + eps) in long double, textbook two-pass.
inline std::vector<double> advantages(const std::vector<double>& r, double eps) {
  long double mean = 0;
  for (double x : r) mean += x;
  mean /= r.size();
  long double var = 0;
  for (double x : r) var += (x - mean) * (x - mean);
  var /= r.size();
  const long double sd = std::sqrt(var);
  std::vector<double> out;
  for (double x : r) out.push_back(static_cast<double>((x - mean) / (sd + eps)));
  return out;
}

struct Confusion {
  int tp = 0, fp = 0, fn = 0, tn = 0, correct = 0, n = 0;
};

/// Confusion counts with Fake as the positive class; Unknown predictions are
/// never positive and never correct.
inline Confusion confusion(const std::vector<dfr::Label>& pred, const std::vector<dfr::Label>& gt) {
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == dfr::Label::Fake;
    const bool g = gt[i] == dfr::Label::Fake;
    c.tp += p && g;
    c.fp += p && !g;
    c.fn += !p && g;
    c.tn += !p && !g && pred[i] == dfr::Label::Real;
    c.correct += pred[i] == gt[i];
    ++c.n;
  }
  return c;
}

inline double f1_from(const Confusion& c) {
  const double p = c.tp + c.fp == 0 ? 0.0 : double(c.tp) / (c.tp + c.fp);
  const double r = c.tp + c.fn == 0 ? 0.0 : double(c.tp) / (c.tp + c.fn);
  return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
}

/// Fraction of (positive, negative) pairs ranked correctly, ties worth 1/2.
/// Returned as an exact rational: wins2 / (2 * pairs).
struct PairwiseAuc {
  long wins2 = 0;
  long pairs = 0;
  double value() const { return double(wins2) / double(2 * pairs); }
};

inline PairwiseAuc pairwise_auc(const std::vector<double>& s, const std::vector<dfr::Label>& y) {
  PairwiseAuc a;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != dfr::Label::Fake) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != dfr::Label::Real) continue;
      ++a.pairs;
      a.wins2 += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    }
  }
  return a;
}

}  // namespace oracle
