#pragma once

// Training loops for post- and user-level models with class-weighted cross
// entropy and Adam.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/metrics.hpp"
#include "depfuse/nn.hpp"
#include "depfuse/pipeline.hpp"
#include "depfuse/seqmodel.hpp"

namespace depfuse {

inline constexpr double kProbabilityFloor = 1e-12;

struct TrainConfig {
  std::size_t epochs = 10;
  double learning_rate = 1e-3;
  ClassWeights class_weights{1.0, 1.0};
  std::size_t posts_per_user = 600;
  SamplingPolicy sampling = SamplingPolicy::chrono_head;
  std::size_t batch_size = 16;
  std::uint64_t seed = 42;

  void validate() const {
    if (epochs == 0) throw Error("epochs must be at least 1");
    if (!(learning_rate >= 0.0)) throw Error("learning rate must be non-negative");
    if (batch_size == 0) throw Error("batch size must be positive");
    if (!(class_weights.control > 0.0 && class_weights.depressed > 0.0)) {
      throw Error("class weights must be positive");
    }
    if (posts_per_user == 0) throw Error("posts_per_user must be positive");
  }

  // Defaults for user-level and post-level runs.
  static TrainConfig user_level_defaults() {
    TrainConfig c;
    c.epochs = 10;
    c.learning_rate = 1e-3;
    c.class_weights = {1.0, 7.0};
    c.batch_size = 4;
    return c;
  }

  static TrainConfig post_level_defaults() {
    TrainConfig c;
    c.epochs = 5;
    c.learning_rate = 5e-5;
    c.class_weights = {1.0, 1.0};
    c.batch_size = 16;
    return c;
  }
};

// -w_label * log(p_label), with p_label floored at 1e-12.
inline double weighted_cross_entropy(const Vector& probabilities, ClassLabel label, const ClassWeights& weights) {
  if (probabilities.size() != 2) throw Error("expected two class probabilities");
  const double p = std::max(probabilities(static_cast<Eigen::Index>(label_index(label))), kProbabilityFloor);
  return -weights[label] * std::log(p);
}

// Gradient of weighted_cross_entropy with respect to the logits that
// produced `probabilities` through a softmax. Zero inside the floored region.
inline Vector weighted_cross_entropy_grad(const Vector& probabilities, ClassLabel label,
                                          const ClassWeights& weights) {
  const auto y = static_cast<Eigen::Index>(label_index(label));
  if (probabilities(y) < kProbabilityFloor) return Vector::Zero(2);
  Vector g = probabilities;
  g(y) -= 1.0;
  return weights[label] * g;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;  // sum_i w_i l_i / sum_i w_i over the epoch's batches
  MetricsReport train;

  bool operator==(const EpochRecord&) const = default;
};

inline Json to_json(const EpochRecord& r) {
  return Json{{"epoch", r.epoch}, {"loss", r.loss}, {"train", to_json(r.train)}};
}

inline std::vector<ClassLabel> predict_all(const DepressionModel& model, const std::vector<ModelInput>& inputs) {
  std::vector<ClassLabel> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(predicted_label(model.predict(in)));
  return out;
}

// Core loop on already featurized (and normalized) inputs. Each batch loss is
// the weight-normalized mean, as in a weighted cross-entropy with mean
// reduction.
inline std::vector<EpochRecord> fit(DepressionModel& model, const std::vector<ModelInput>& inputs,
                                    const std::vector<ClassLabel>& labels, const TrainConfig& cfg) {
  cfg.validate();
  if (inputs.size() != labels.size()) throw Error("inputs/labels length mismatch");
  if (inputs.empty()) throw Error("cannot train on an empty set");
  auto params = model.params();
  nn::Adam adam({cfg.learning_rate});
  Rng order_rng(cfg.seed);
  Rng dropout_rng(cfg.seed ^ 0xD509u);
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<EpochRecord> history;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0, weight_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      double batch_weight = 0.0;
      for (std::size_t k = start; k < end; ++k) batch_weight += cfg.class_weights[labels[order[k]]];
      nn::zero_grads(params);
      for (std::size_t k = start; k < end; ++k) {
        const auto i = order[k];
        const auto tr = model.run(inputs[i], &dropout_rng);
        loss_sum += weighted_cross_entropy(tr.probs, labels[i], cfg.class_weights);
        model.backward(tr, weighted_cross_entropy_grad(tr.probs, labels[i], cfg.class_weights) / batch_weight);
      }
      weight_sum += batch_weight;
      adam.step(params);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / weight_sum;
    rec.train = compute_metrics(predict_all(model, inputs), labels);
    history.push_back(rec);
  }
  return history;
}

// How to build a fresh pipeline around a dataset.
struct PipelineSpec {
  ModelConfig model;
  EncoderConfig encoder;
  Resources resources;
  std::shared_ptr<const Encoder> built_encoder;  // optional, reused when set
};

struct TrainResult {
  Pipeline pipeline;
  std::vector<EpochRecord> history;
};

inline SamplingConfig sampling_of(const TrainConfig& cfg) {
  return SamplingConfig{cfg.posts_per_user, cfg.sampling, cfg.seed};
}

// Featurizes `dataset`, fits the feature normalizer on it, and trains a new
// model. Deterministic for a fixed spec and seed.
inline TrainResult train(const Dataset& dataset, const PipelineSpec& spec, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.granularity() != spec.model.granularity) {
    throw Error("granularity mismatch: dataset is " + std::string(to_string(dataset.granularity())) +
                "-level, model is " + std::string(to_string(spec.model.granularity)) + "-level");
  }
  ModelConfig mcfg = spec.model;
  mcfg.class_weights = cfg.class_weights;
  auto encoder = spec.built_encoder ? spec.built_encoder
                                    : std::make_shared<const Encoder>(Encoder::from_config(spec.encoder));
  Featurizer featurizer(mcfg, encoder, spec.resources, sampling_of(cfg));
  auto inputs = featurizer.inputs(dataset);
  FeatureNormalizer norm;
  if (mcfg.normalize_features && mcfg.features.any_handcrafted()) {
    norm = FeatureNormalizer::fit(feature_rows(inputs));
    normalize_inputs(inputs, norm);
  }
  DepressionModel model(mcfg);
  auto history = fit(model, inputs, dataset.labels(), cfg);
  Resources kept = spec.resources;
  if (!mcfg.features.emotion) kept.emotion.reset();
  return {Pipeline(spec.encoder, sampling_of(cfg), std::move(norm), std::move(model), std::move(kept), encoder),
          std::move(history)};
}

}  // namespace depfuse
