#pragma once

// Key-value experiment configuration. One `key = value` per line, `#`
// starts a comment. Unknown keys are rejected. See README for the schema.

#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/emonet.hpp"
#include "depfuse/encoder.hpp"
#include "depfuse/trainer.hpp"

namespace depfuse {

struct RunConfig {
  ModelConfig model;
  EncoderConfig encoder;
  TrainConfig train = TrainConfig::post_level_defaults();
  EmotionConfig emotion;
  EmotionTrainOptions emotion_train;
  std::string lexicon_path;
  std::string profanity_path;
  std::string emotion_path;
  std::size_t folds = 10;
  bool allow_empty = false;

  // Applies `entries` in order on top of the defaults of the granularity they
  // select (explicit keys always win over those defaults).
  static RunConfig from_entries(const std::vector<std::pair<std::string, std::string>>& entries) {
    RunConfig cfg;
    for (const auto& [k, v] : entries) {
      if (k == "granularity") cfg.model.granularity = parse_granularity(v);
    }
    if (cfg.model.granularity == Granularity::user_level) cfg.train = TrainConfig::user_level_defaults();
    for (const auto& [k, v] : entries) cfg.set(k, v);
    return cfg;
  }

  static std::vector<std::pair<std::string, std::string>> parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      try {
        out.push_back(split_assignment(line));
      } catch (const Error& e) {
        throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return out;
  }

  static std::pair<std::string, std::string> split_assignment(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw Error("expected key=value, got \"" + text + "\"");
    auto key = trim(text.substr(0, eq));
    if (key.empty()) throw Error("empty key in \"" + text + "\"");
    return {key, trim(text.substr(eq + 1))};
  }

  void set(const std::string& key, const std::string& value) {
    try {
      set_unchecked(key, value);
    } catch (const std::invalid_argument&) {
      throw Error("bad value \"" + value + "\" for " + key);
    } catch (const std::out_of_range&) {
      throw Error("bad value \"" + value + "\" for " + key);
    }
  }

  void validate() const {
    model.validate();
    train.validate();
    if (encoder.dim != model.encoder_dim) throw Error("encoder.dim and model encoder dim disagree");
    if (folds < 2) throw Error("cv.folds must be at least 2");
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(v);
  }

  static std::size_t to_size(const std::string& v) {
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used != v.size() || v.starts_with('-')) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  }

  static double to_double(const std::string& v) {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  }

  void set_unchecked(const std::string& key, const std::string& v) {
    if (key == "seed") {
      const auto s = to_size(v);
      model.seed = s;
      train.seed = s;
      emotion_train.seed = s;
    } else if (key == "granularity") {
      model.granularity = parse_granularity(v);
    } else if (key == "features") {
      model.features = FeatureSet::parse(v);
    } else if (key == "model.hidden_size") {
      model.hidden_size = to_size(v);
    } else if (key == "model.dropout") {
      model.dropout = to_double(v);
    } else if (key == "model.max_words") {
      model.max_words = to_size(v);
    } else if (key == "model.emotion_dim") {
      model.emotion_dim = to_size(v);
      emotion.emotion_dim = model.emotion_dim;
    } else if (key == "model.normalize_features") {
      model.normalize_features = to_bool(v);
    } else if (key == "attention.sum_projected") {
      model.attention_sum_projected = to_bool(v);
    } else if (key == "encoder.kind") {
      encoder.kind = parse_encoder_kind(v);
    } else if (key == "encoder.dim") {
      encoder.dim = to_size(v);
      model.encoder_dim = encoder.dim;
    } else if (key == "encoder.seed") {
      encoder.seed = to_size(v);
    } else if (key == "encoder.buckets") {
      encoder.buckets = to_size(v);
    } else if (key == "encoder.model") {
      encoder.model_name = v;
    } else if (key == "train.epochs") {
      train.epochs = to_size(v);
    } else if (key == "train.learning_rate") {
      train.learning_rate = to_double(v);
    } else if (key == "train.batch_size") {
      train.batch_size = to_size(v);
    } else if (key == "train.class_weights") {
      const auto comma = v.find(',');
      if (comma == std::string::npos) throw std::invalid_argument(v);
      train.class_weights = {to_double(trim(v.substr(0, comma))), to_double(trim(v.substr(comma + 1)))};
      model.class_weights = train.class_weights;
    } else if (key == "train.posts_per_user") {
      train.posts_per_user = to_size(v);
    } else if (key == "train.sampling") {
      train.sampling = parse_sampling_policy(v);
    } else if (key == "emotion.embed_dim") {
      emotion.embed_dim = to_size(v);
    } else if (key == "emotion.filters") {
      emotion.filters = to_size(v);
    } else if (key == "emotion.epochs") {
      emotion_train.epochs = to_size(v);
    } else if (key == "emotion.learning_rate") {
      emotion_train.learning_rate = to_double(v);
    } else if (key == "emotion.batch_size") {
      emotion_train.batch_size = to_size(v);
    } else if (key == "emotion.weight_decay") {
      emotion_train.weight_decay = to_double(v);
    } else if (key == "emotion.val_fraction") {
      emotion_train.val_fraction = to_double(v);
    } else if (key == "resources.lexicon") {
      lexicon_path = v;
    } else if (key == "resources.profanity") {
      profanity_path = v;
    } else if (key == "resources.emotion") {
      emotion_path = v;
    } else if (key == "cv.folds") {
      folds = to_size(v);
    } else if (key == "data.allow_empty") {
      allow_empty = to_bool(v);
    } else {
      throw Error("unknown config key \"" + key + "\"");
    }
  }
};

}  // namespace depfuse
