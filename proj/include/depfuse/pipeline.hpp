#pragma once

// First-level featurization (encoder + emotion branches + hand-crafted x)
// and the self-contained inference pipeline that a checkpoint restores.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/emonet.hpp"
#include "depfuse/encoder.hpp"
#include "depfuse/io.hpp"
#include "depfuse/lexfeat.hpp"
#include "depfuse/seqmodel.hpp"
#include "depfuse/text.hpp"

namespace depfuse {

enum class SamplingPolicy : std::uint8_t { chrono_head = 0, random = 1 };

inline std::string_view to_string(SamplingPolicy p) {
  return p == SamplingPolicy::chrono_head ? "chrono_head" : "random";
}

inline SamplingPolicy parse_sampling_policy(std::string_view s) {
  if (s == "chrono_head") return SamplingPolicy::chrono_head;
  if (s == "random") return SamplingPolicy::random;
  throw Error("unknown sampling policy \"" + std::string(s) + "\"");
}

struct SamplingConfig {
  std::size_t posts_per_user = 600;
  SamplingPolicy policy = SamplingPolicy::chrono_head;
  std::uint64_t seed = 0;

  bool operator==(const SamplingConfig&) const = default;
};

// chrono_head keeps the first `limit` posts; random draws `limit` distinct
// posts with a seeded shuffle and keeps them in their original order.
inline std::vector<Post> sample_user_posts(const UserBundle& bundle, std::size_t limit,
                                           SamplingPolicy policy, std::uint64_t seed = 0) {
  if (limit == 0) throw Error("post limit must be at least 1");
  if (bundle.posts.size() <= limit) return bundle.posts;
  if (policy == SamplingPolicy::chrono_head) {
    return {bundle.posts.begin(), bundle.posts.begin() + static_cast<std::ptrdiff_t>(limit)};
  }
  std::vector<std::size_t> idx(bundle.posts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed ^ fnv1a64(bundle.user_id));
  rng.shuffle(idx);
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  std::vector<Post> out;
  out.reserve(limit);
  for (auto i : idx) out.push_back(bundle.posts[i]);
  return out;
}

// Frozen first-level models and lexical resources. Any member may be null
// when the feature set does not need it.
struct Resources {
  std::shared_ptr<const EmotionModel> emotion;
  std::shared_ptr<const ProfanityModel> profanity;
  std::shared_ptr<const MoralLexicon> lexicon;

  void require(const FeatureSet& fs) const {
    if (fs.emotion && !emotion) throw Error("emotion model required by feature set " + fs.variant_name());
    if (fs.profanity && !profanity) throw Error("profanity model required by feature set " + fs.variant_name());
    if (fs.morality && !lexicon) throw Error("moral lexicon required by feature set " + fs.variant_name());
  }
};

class Featurizer {
 public:
  Featurizer(ModelConfig cfg, std::shared_ptr<const Encoder> encoder, Resources resources,
             SamplingConfig sampling)
      : cfg_(std::move(cfg)), encoder_(std::move(encoder)), res_(std::move(resources)), sampling_(sampling) {
    if (!encoder_) throw Error("featurizer needs an encoder");
    if (encoder_->dim() != cfg_.encoder_dim) {
      throw Error("encoder dim " + std::to_string(encoder_->dim()) + " != model encoder_dim " +
                  std::to_string(cfg_.encoder_dim));
    }
    res_.require(cfg_.features);
    if (cfg_.features.emotion && res_.emotion->emotion_dim() != cfg_.emotion_dim) {
      throw Error("emotion model dim " + std::to_string(res_.emotion->emotion_dim()) +
                  " != model emotion_dim " + std::to_string(cfg_.emotion_dim));
    }
  }

  const ModelConfig& config() const { return cfg_; }

  // Un-normalized hand-crafted features of one post / one user.
  std::vector<double> raw_features(const Post& post) const {
    std::optional<double> prof;
    std::optional<MoralityFeatures> mor;
    if (cfg_.features.profanity) prof = profanity_score(post.text, *res_.profanity);
    if (cfg_.features.morality) mor = post_morality_features(post.text, *res_.lexicon);
    if (!prof && !mor) return {};
    return build_feature_vector(prof, mor).values;
  }

  std::vector<double> raw_features(const UserBundle& user) const {
    const auto texts = texts_of(sample_user_posts(user, sampling_.posts_per_user, sampling_.policy, sampling_.seed));
    std::optional<double> prof;
    std::optional<MoralityFeatures> mor;
    if (cfg_.features.profanity) prof = user_profanity(texts, *res_.profanity);
    if (cfg_.features.morality) mor = user_morality_features(texts, *res_.lexicon);
    if (!prof && !mor) return {};
    return build_feature_vector(prof, mor).values;
  }

  ModelInput input_for(const Post& post) const {
    WordCache cache;
    return input_for(post, cache);
  }

  ModelInput input_for(const UserBundle& user) const {
    ModelInput in;
    const auto posts = sample_user_posts(user, sampling_.posts_per_user, sampling_.policy, sampling_.seed);
    const auto n = static_cast<Eigen::Index>(posts.size());
    in.encoder.resize(static_cast<Eigen::Index>(cfg_.encoder_dim), n);
    if (cfg_.features.emotion) in.emotion.resize(static_cast<Eigen::Index>(cfg_.emotion_dim), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto tokens = split_words(posts[static_cast<std::size_t>(i)].text, cfg_.max_words);
      if (tokens.empty()) {
        in.encoder.col(i).setZero();
        if (cfg_.features.emotion) in.emotion.col(i) = res_.emotion->features({});
        continue;
      }
      in.encoder.col(i) = pool_post(encode_words(tokens, *encoder_));
      if (cfg_.features.emotion) in.emotion.col(i) = emotion_post_features(tokens, *res_.emotion);
    }
    in.x = raw_features(user);
    return in;
  }

  // Inputs for every item, x left un-normalized.
  std::vector<ModelInput> inputs(const Dataset& dataset) const {
    if (dataset.granularity() != cfg_.granularity) {
      throw Error("dataset is " + std::string(to_string(dataset.granularity())) + "-level but model is " +
                  std::string(to_string(cfg_.granularity)) + "-level");
    }
    std::vector<ModelInput> out;
    out.reserve(dataset.size());
    if (dataset.granularity() == Granularity::post_level) {
      WordCache cache;
      for (const auto& p : dataset.posts()) out.push_back(input_for(p, cache));
    } else {
      for (const auto& u : dataset.users()) out.push_back(input_for(u));
    }
    return out;
  }

 private:
  using WordCache = std::unordered_map<std::string, Vector>;

  static std::vector<std::string> texts_of(const std::vector<Post>& posts) {
    std::vector<std::string> out;
    out.reserve(posts.size());
    for (const auto& p : posts) out.push_back(p.text);
    return out;
  }

  ModelInput input_for(const Post& post, WordCache& cache) const {
    ModelInput in;
    auto tokens = split_words(post.text, cfg_.max_words);
    if (tokens.empty()) {
      // kept-empty post: one neutral position
      in.encoder = Matrix::Zero(static_cast<Eigen::Index>(cfg_.encoder_dim), 1);
      if (cfg_.features.emotion) in.emotion = res_.emotion->features({});
    } else {
      in.encoder = encode_words(tokens, *encoder_).vectors;
      if (cfg_.features.emotion) {
        in.emotion.resize(static_cast<Eigen::Index>(cfg_.emotion_dim), static_cast<Eigen::Index>(tokens.size()));
        for (std::size_t j = 0; j < tokens.size(); ++j) {
          auto it = cache.find(tokens[j]);
          if (it == cache.end()) it = cache.emplace(tokens[j], emotion_word_features(tokens[j], *res_.emotion)).first;
          in.emotion.col(static_cast<Eigen::Index>(j)) = it->second;
        }
      }
    }
    in.x = raw_features(post);
    return in;
  }

  ModelConfig cfg_;
  std::shared_ptr<const Encoder> encoder_;
  Resources res_;
  SamplingConfig sampling_;
};

inline std::vector<std::vector<double>> feature_rows(const std::vector<ModelInput>& inputs) {
  std::vector<std::vector<double>> rows;
  rows.reserve(inputs.size());
  for (const auto& in : inputs) rows.push_back(in.x);
  return rows;
}

inline void normalize_inputs(std::vector<ModelInput>& inputs, const FeatureNormalizer& norm) {
  if (norm.empty()) return;
  for (auto& in : inputs) norm.apply(in.x);
}

struct Prediction {
  ClassLabel label = ClassLabel::control;
  double p_depressed = 0.0;
  FeatureVector features;  // raw (pre-normalization) x
};

// Everything needed to score new posts or users. The emotion model travels
// inside the checkpoint; the profanity model and lexicon are attached from
// their own files.
class Pipeline {
 public:
  static constexpr std::uint32_t kVersion = 1;

  Pipeline() = default;
  Pipeline(EncoderConfig encoder, SamplingConfig sampling, FeatureNormalizer normalizer, DepressionModel model,
           Resources resources, std::shared_ptr<const Encoder> built_encoder = nullptr)
      : encoder_cfg_(std::move(encoder)),
        sampling_(sampling),
        normalizer_(std::move(normalizer)),
        model_(std::move(model)),
        res_(std::move(resources)),
        encoder_(built_encoder ? std::move(built_encoder)
                               : std::make_shared<const Encoder>(Encoder::from_config(encoder_cfg_))) {}

  const DepressionModel& model() const { return model_; }
  DepressionModel& model() { return model_; }
  const ModelConfig& config() const { return model_.config(); }
  const EncoderConfig& encoder_config() const { return encoder_cfg_; }
  const SamplingConfig& sampling() const { return sampling_; }
  const FeatureNormalizer& normalizer() const { return normalizer_; }
  const Resources& resources() const { return res_; }

  void attach(std::shared_ptr<const ProfanityModel> profanity, std::shared_ptr<const MoralLexicon> lexicon) {
    res_.profanity = std::move(profanity);
    res_.lexicon = std::move(lexicon);
  }

  Featurizer featurizer() const {
    return Featurizer(model_.config(), encoder_, res_, sampling_);
  }

  template <typename Item>
  ModelInput prepare(const Item& item) const {
    auto in = featurizer().input_for(item);
    if (!normalizer_.empty()) normalizer_.apply(in.x);
    return in;
  }

  std::vector<ModelInput> prepare(const Dataset& dataset) const {
    auto inputs = featurizer().inputs(dataset);
    normalize_inputs(inputs, normalizer_);
    return inputs;
  }

  template <typename Item>
  Prediction predict(const Item& item) const {
    const auto f = featurizer();
    auto in = f.input_for(item);
    Prediction out;
    out.features.layout = feature_layout(model_.features());
    out.features.values = in.x;
    if (!normalizer_.empty()) normalizer_.apply(in.x);
    const Vector probs = forward(in, model_, model_.features());
    out.p_depressed = probs(1);
    out.label = predicted_label(probs);
    return out;
  }

  std::vector<ClassLabel> predict_labels(const Dataset& dataset) const {
    std::vector<ClassLabel> out;
    for (const auto& in : prepare(dataset)) out.push_back(predicted_label(model_.predict(in)));
    return out;
  }

  void write(std::ostream& out) const {
    BinaryWriter w(out);
    write_header(w, "pipeline", kVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(encoder_cfg_.kind));
    w.put<std::uint64_t>(encoder_cfg_.dim);
    w.put<std::uint64_t>(encoder_cfg_.seed);
    w.put<std::uint64_t>(encoder_cfg_.buckets);
    w.put(encoder_cfg_.model_name);
    w.put<std::uint64_t>(sampling_.posts_per_user);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(sampling_.policy));
    w.put<std::uint64_t>(sampling_.seed);
    w.put(normalizer_.mean());
    w.put(normalizer_.stddev());
    model_.write(w);
    w.put<std::uint8_t>(res_.emotion ? 1 : 0);
    if (res_.emotion) res_.emotion->write(out);
  }

  // `requested` (when given) must equal the stored feature set.
  static Pipeline read(std::istream& in, std::optional<FeatureSet> requested = {}) {
    BinaryReader r(in);
    const auto version = read_header(r, "pipeline");
    if (version != kVersion) throw Error("unsupported pipeline version " + std::to_string(version));
    Pipeline p;
    p.encoder_cfg_.kind = static_cast<EncoderKind>(r.get<std::uint8_t>());
    p.encoder_cfg_.dim = r.get<std::uint64_t>();
    p.encoder_cfg_.seed = r.get<std::uint64_t>();
    p.encoder_cfg_.buckets = r.get<std::uint64_t>();
    p.encoder_cfg_.model_name = r.get_string();
    p.sampling_.posts_per_user = r.get<std::uint64_t>();
    p.sampling_.policy = static_cast<SamplingPolicy>(r.get<std::uint8_t>());
    p.sampling_.seed = r.get<std::uint64_t>();
    auto mean = r.get_doubles();
    auto sd = r.get_doubles();
    p.normalizer_ = FeatureNormalizer(std::move(mean), std::move(sd));
    p.model_ = DepressionModel::read(r);
    if (requested && !(*requested == p.model_.features())) {
      throw Error("feature layout mismatch: checkpoint has " + p.model_.features().variant_name() +
                  ", requested " + requested->variant_name());
    }
    if (!p.normalizer_.empty() && p.normalizer_.dim() != p.model_.features().handcrafted_dim()) {
      throw Error("checkpoint normalizer does not match the feature layout");
    }
    if (r.get<std::uint8_t>() != 0) {
      p.res_.emotion = std::make_shared<const EmotionModel>(EmotionModel::read(in, p.model_.config().emotion_dim));
    }
    if (p.model_.features().emotion && !p.res_.emotion) throw Error("checkpoint lacks its emotion model");
    p.encoder_ = std::make_shared<const Encoder>(Encoder::from_config(p.encoder_cfg_));
    return p;
  }

  void save(const std::string& path) const {
    auto out = detail::open_output(path);
    write(out);
  }

  static Pipeline load(const std::string& path, std::optional<FeatureSet> requested = {}) {
    auto in = detail::open_input(path);
    return read(in, requested);
  }

 private:
  EncoderConfig encoder_cfg_;
  SamplingConfig sampling_;
  FeatureNormalizer normalizer_;
  DepressionModel model_;
  Resources res_;
  std::shared_ptr<const Encoder> encoder_;
};

}  // namespace depfuse
