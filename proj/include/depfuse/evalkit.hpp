#pragma once

// Stratified k-fold splitting, cross-validation and the feature ablation
// harness.

#include <cstdio>
#include <string>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/metrics.hpp"
#include "depfuse/trainer.hpp"

namespace depfuse {

using Fold = std::vector<std::size_t>;

// Stratified, seed-deterministic partition into k folds. Each class is
// shuffled and dealt round-robin, continuing where the previous class
// stopped, so fold sizes differ by at most one.
inline std::vector<Fold> kfold_split(const std::vector<ClassLabel>& labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error("k must be at least 2");
  if (k > labels.size()) {
    throw Error("k = " + std::to_string(k) + " exceeds dataset size " + std::to_string(labels.size()));
  }
  Rng rng(seed);
  std::vector<Fold> folds(k);
  std::size_t next = 0;
  for (auto label : kAllLabels) {
    Fold members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) members.push_back(i);
    }
    rng.shuffle(members);
    for (auto i : members) {
      folds[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

inline std::vector<Fold> kfold_split(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  return kfold_split(dataset.labels(), k, seed);
}

struct CvReport {
  MetricsReport mean;  // ratios averaged over folds; counts summed
  std::vector<MetricsReport> folds;
};

inline MetricsReport average(const std::vector<MetricsReport>& reports) {
  MetricsReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.accuracy += r.accuracy;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.tp += r.tp;
    m.fp += r.fp;
    m.fn += r.fn;
    m.tn += r.tn;
  }
  const double n = static_cast<double>(reports.size());
  m.accuracy /= n;
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

inline std::vector<std::size_t> complement(const Fold& fold, std::size_t n) {
  std::vector<bool> held(n, false);
  for (auto i : fold) held[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!held[i]) out.push_back(i);
  }
  return out;
}

// Trains one model per fold on the other folds and scores it on the fold.
inline CvReport run_cv(const Dataset& dataset, const PipelineSpec& spec, const TrainConfig& cfg,
                       const std::vector<Fold>& folds) {
  CvReport report;
  for (const auto& fold : folds) {
    const auto trained = train(dataset.subset(complement(fold, dataset.size())), spec, cfg);
    const auto test = dataset.subset(fold);
    report.folds.push_back(compute_metrics(trained.pipeline.predict_labels(test), test.labels()));
  }
  report.mean = average(report.folds);
  return report;
}

inline CvReport run_cv(const Dataset& dataset, const PipelineSpec& spec, const TrainConfig& cfg, std::size_t k) {
  if (dataset.granularity() != Granularity::post_level) {
    throw Error("cross-validation expects a post-level dataset");
  }
  return run_cv(dataset, spec, cfg, kfold_split(dataset, k, cfg.seed));
}

struct AblationRow {
  FeatureSet features;
  CvReport report;
};

// Every variant sees the same folds and the same seed.
inline std::vector<AblationRow> ablation_run(const Dataset& dataset, const std::vector<FeatureSet>& variants,
                                             const PipelineSpec& spec, const TrainConfig& cfg, std::size_t k) {
  if (variants.empty()) throw Error("no ablation variants given");
  const auto folds = kfold_split(dataset, k, cfg.seed);
  std::vector<AblationRow> rows;
  for (const auto& fs : variants) {
    PipelineSpec s = spec;
    s.model.features = fs;
    if (!fs.emotion) s.resources.emotion.reset();
    rows.push_back({fs, run_cv(dataset, s, cfg, folds)});
  }
  return rows;
}

inline Json to_json(const CvReport& r) {
  Json folds = Json::array();
  for (const auto& f : r.folds) folds.push_back(to_json(f));
  Json out = to_json(r.mean);
  out["folds"] = std::move(folds);
  return out;
}

inline Json ablation_json(const std::vector<AblationRow>& rows) {
  Json out = Json::object();
  for (const auto& row : rows) out[row.features.variant_name()] = to_json(row.report);
  return out;
}

// Percentages with two decimals.
inline std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %8s %8s %8s %8s\n", "Model", "Acc", "F1", "Pr", "Re");
  out += buf;
  for (const auto& row : rows) {
    const auto& m = row.report.mean;
    std::snprintf(buf, sizeof buf, "%-12s %8.2f %8.2f %8.2f %8.2f\n", row.features.variant_name().c_str(),
                  100.0 * m.accuracy, 100.0 * m.f1, 100.0 * m.precision, 100.0 * m.recall);
    out += buf;
  }
  return out;
}

}  // namespace depfuse
