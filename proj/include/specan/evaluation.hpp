#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "specan/dataset.hpp"
#include "specan/errors.hpp"

namespace specan {

struct RocPoint {
  double threshold = 0;  // classify abnormal when score >= threshold
  double fpr = 0;
  double tpr = 0;
};

// Ordered operating points from (0,0) to (1,1); auc is the trapezoidal
// integral of exactly these points.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0;
};

namespace detail {
inline void check_roc_input(const std::vector<double>& scores, const std::vector<Label>& labels,
                            std::size_t& n_pos, std::size_t& n_neg) {
  require(scores.size() == labels.size(), "roc: scores/labels size mismatch");
  require(!scores.empty(), "roc: empty input");
  n_pos = n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(std::isfinite(scores[i]), "roc: non-finite score");
    if (labels[i] == Label::abnormal)
      ++n_pos;
    else if (labels[i] == Label::normal)
      ++n_neg;
    else
      throw std::invalid_argument("roc: unlabeled sample");
  }
  require(n_pos > 0 && n_neg > 0, "roc: both classes must be present");
}
}  // namespace detail

// Threshold sweep over every distinct score value (higher score = more
// abnormal). Tied scores collapse into a single threshold, which yields the
// diagonal segments that make the trapezoidal area equal the Mann-Whitney
// statistic.
inline RocCurve roc_curve(const std::vector<double>& scores, const std::vector<Label>& labels) {
  std::size_t n_pos = 0, n_neg = 0;
  detail::check_roc_input(scores, labels, n_pos, n_neg);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double thr = scores[order[i]];
    while (i < order.size() && scores[order[i]] == thr) {
      if (labels[order[i]] == Label::abnormal)
        ++tp;
      else
        ++fp;
      ++i;
    }
    curve.points.push_back({thr, static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos)});
  }

  double auc = 0;
  for (std::size_t p = 1; p < curve.points.size(); ++p) {
    const auto& a = curve.points[p - 1];
    const auto& b = curve.points[p];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  curve.auc = auc;
  return curve;
}

// Independent AUC oracle: the Mann-Whitney pair count,
// (#correctly ordered pairs + 0.5 * #ties) / (#abnormal * #normal).
inline double auc_mann_whitney(const std::vector<double>& scores,
                               const std::vector<Label>& labels) {
  std::size_t n_pos = 0, n_neg = 0;
  detail::check_roc_input(scores, labels, n_pos, n_neg);
  double credit = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != Label::abnormal) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != Label::normal) continue;
      if (scores[i] > scores[j])
        credit += 1.0;
      else if (scores[i] == scores[j])
        credit += 0.5;
    }
  }
  return credit / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace specan
