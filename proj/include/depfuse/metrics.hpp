#pragma once

#include <cstddef>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/io.hpp"

namespace depfuse {

// Binary metrics with "depressed" as the positive class. Any ratio whose
// denominator is zero is reported as 0.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const MetricsReport&) const = default;
};

inline MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  MetricsReport m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  const auto n = tp + fp + fn + tn;
  m.accuracy = n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

inline MetricsReport compute_metrics(const std::vector<ClassLabel>& predictions,
                                     const std::vector<ClassLabel>& labels) {
  if (predictions.size() != labels.size()) {
    throw Error("predictions/labels length mismatch (" + std::to_string(predictions.size()) + " vs " +
                std::to_string(labels.size()) + ")");
  }
  if (labels.empty()) throw Error("cannot compute metrics on an empty set");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predictions[i] == ClassLabel::depressed;
    const bool gold = labels[i] == ClassLabel::depressed;
    if (pred && gold) ++tp;
    else if (pred) ++fp;
    else if (gold) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

inline Json to_json(const MetricsReport& m) {
  return Json{{"acc", m.accuracy}, {"p", m.precision}, {"r", m.recall}, {"f1", m.f1},
              {"tp", m.tp},        {"fp", m.fp},        {"fn", m.fn},     {"tn", m.tn}};
}

}  // namespace depfuse
