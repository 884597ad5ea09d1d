#pragma once

// Emotion branch: a small convolutional valence/arousal/dominance regressor.
// Its penultimate dense activation is the per-word / per-post emotion
// representation consumed by the sequence model.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/io.hpp"
#include "depfuse/nn.hpp"
#include "depfuse/text.hpp"

namespace depfuse {

inline constexpr double kVadMin = 1.0;
inline constexpr double kVadMax = 5.0;
inline constexpr double kVadNeutral = 3.0;

struct Vad {
  double valence = kVadNeutral;
  double arousal = kVadNeutral;
  double dominance = kVadNeutral;

  bool operator==(const Vad&) const = default;
};

struct VadExample {
  std::string text;
  Vad target;
};

inline std::vector<VadExample> read_vad_jsonl(std::istream& in) {
  std::vector<VadExample> out;
  detail::for_each_json_line(in, [&](const Json& obj, std::size_t line_no) {
    VadExample ex;
    ex.text = detail::require_string(obj, "text", line_no);
    auto num = [&](const char* key) {
      const auto& v = detail::require(obj, key, line_no);
      if (!v.is_number()) throw Error(detail::line_error(line_no, std::string("\"") + key + "\" must be a number"));
      const double x = v.get<double>();
      if (!(x >= kVadMin && x <= kVadMax)) {
        throw Error(detail::line_error(line_no, std::string("\"") + key + "\" outside [1,5]"));
      }
      return x;
    };
    ex.target = Vad{num("V"), num("A"), num("D")};
    out.push_back(std::move(ex));
  });
  return out;
}

inline std::vector<VadExample> load_vad_jsonl(const std::string& path) {
  auto in = detail::open_input(path);
  return read_vad_jsonl(in);
}

struct EmotionConfig {
  std::size_t embed_dim = 32;
  std::size_t filters = 16;  // per width
  std::vector<std::size_t> widths{2, 3, 4};
  std::size_t emotion_dim = 32;
  std::size_t max_words = 128;

  std::size_t min_length() const { return *std::max_element(widths.begin(), widths.end()); }
  bool operator==(const EmotionConfig&) const = default;
};

struct EmotionTrainOptions {
  std::size_t epochs = 40;
  double learning_rate = 3e-3;
  std::size_t batch_size = 16;
  double val_fraction = 0.2;  // 0 trains on everything
  double weight_decay = 0.3;
  std::uint64_t seed = 13;
};

struct EmotionEpoch {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;  // NaN when no validation split
};

class EmotionModel {
 public:
  static constexpr std::uint32_t kVersion = 1;

  // Forward intermediates for one input.
  struct Trace {
    std::vector<std::size_t> ids;  // vocabulary ids, 0 = unknown
    nn::Matrix x;                  // embed_dim x padded length
    std::vector<nn::Matrix> act;   // per width: filters x positions (post-tanh)
    std::vector<std::vector<Eigen::Index>> argmax;
    nn::Vector pooled;
    nn::Vector hidden;
    nn::Vector out;
  };

  EmotionModel() = default;

  EmotionModel(EmotionConfig cfg, std::vector<std::string> vocab, std::uint64_t seed)
      : cfg_(std::move(cfg)) {
    if (cfg_.widths.empty() || cfg_.filters == 0 || cfg_.embed_dim == 0 || cfg_.emotion_dim == 0) {
      throw Error("emotion model dimensions must be positive");
    }
    vocab_.emplace("<unk>", 0);
    words_.push_back("<unk>");
    for (auto& w : vocab) {
      if (vocab_.emplace(w, words_.size()).second) words_.push_back(w);
    }
    allocate();
    Rng rng(seed);
    nn::uniform_fill(embed_, rng, 0.5);
    embed_.value.col(0).setZero();
    for (auto& w : conv_w_) nn::glorot(w, rng);
    nn::glorot(dense_w_, rng);
    nn::glorot(head_w_, rng);
    head_b_.value.setConstant(kVadNeutral);
  }

  const EmotionConfig& config() const { return cfg_; }
  std::size_t emotion_dim() const { return cfg_.emotion_dim; }
  std::size_t vocab_size() const { return words_.size(); }

  std::size_t word_id(const std::string& w) const {
    auto it = vocab_.find(w);
    return it == vocab_.end() ? 0 : it->second;
  }

  nn::ParamList params() {
    nn::ParamList out{&embed_};
    for (std::size_t k = 0; k < cfg_.widths.size(); ++k) {
      out.push_back(&conv_w_[k]);
      out.push_back(&conv_b_[k]);
    }
    for (auto* p : {&dense_w_, &dense_b_, &head_w_, &head_b_}) out.push_back(p);
    return out;
  }

  Trace run(const std::vector<std::string>& tokens) const {
    Trace tr;
    for (const auto& t : tokens) tr.ids.push_back(word_id(t));
    const auto len = static_cast<Eigen::Index>(std::max(tokens.size(), cfg_.min_length()));
    const auto e = static_cast<Eigen::Index>(cfg_.embed_dim);
    tr.x = nn::Matrix::Zero(e, len);
    for (std::size_t j = 0; j < tr.ids.size(); ++j) {
      tr.x.col(static_cast<Eigen::Index>(j)) = embed_.value.col(static_cast<Eigen::Index>(tr.ids[j]));
    }
    const auto nf = static_cast<Eigen::Index>(cfg_.filters);
    tr.pooled.resize(nf * static_cast<Eigen::Index>(cfg_.widths.size()));
    for (std::size_t k = 0; k < cfg_.widths.size(); ++k) {
      const auto w = static_cast<Eigen::Index>(cfg_.widths[k]);
      const Eigen::Index positions = len - w + 1;
      nn::Matrix act(nf, positions);
      for (Eigen::Index t = 0; t < positions; ++t) {
        Eigen::Map<const nn::Vector> window(tr.x.col(t).data(), e * w);
        act.col(t) = (conv_w_[k].value * window + conv_b_[k].value).array().tanh().matrix();
      }
      std::vector<Eigen::Index> arg(static_cast<std::size_t>(nf));
      for (Eigen::Index f = 0; f < nf; ++f) {
        Eigen::Index best = 0;
        act.row(f).maxCoeff(&best);
        arg[static_cast<std::size_t>(f)] = best;
        tr.pooled(static_cast<Eigen::Index>(k) * nf + f) = act(f, best);
      }
      tr.act.push_back(std::move(act));
      tr.argmax.push_back(std::move(arg));
    }
    tr.hidden = (dense_w_.value * tr.pooled + dense_b_.value).array().tanh().matrix();
    tr.out = head_w_.value * tr.hidden + head_b_.value;
    return tr;
  }

  // Accumulates parameter gradients for d(loss)/d(out) = d_out.
  void backward(const Trace& tr, const nn::Vector& d_out) {
    head_w_.grad += d_out * tr.hidden.transpose();
    head_b_.grad += d_out;
    const nn::Vector d_pre = (head_w_.value.transpose() * d_out).cwiseProduct(
        (1.0 - tr.hidden.array().square()).matrix());
    dense_w_.grad += d_pre * tr.pooled.transpose();
    dense_b_.grad += d_pre;
    const nn::Vector d_pooled = dense_w_.value.transpose() * d_pre;

    const auto e = static_cast<Eigen::Index>(cfg_.embed_dim);
    const auto nf = static_cast<Eigen::Index>(cfg_.filters);
    nn::Matrix dx = nn::Matrix::Zero(tr.x.rows(), tr.x.cols());
    for (std::size_t k = 0; k < cfg_.widths.size(); ++k) {
      const auto w = static_cast<Eigen::Index>(cfg_.widths[k]);
      for (Eigen::Index f = 0; f < nf; ++f) {
        const Eigen::Index t = tr.argmax[k][static_cast<std::size_t>(f)];
        const double a = tr.act[k](f, t);
        const double g = d_pooled(static_cast<Eigen::Index>(k) * nf + f) * (1.0 - a * a);
        if (g == 0.0) continue;
        Eigen::Map<const nn::Vector> window(tr.x.col(t).data(), e * w);
        conv_w_[k].grad.row(f) += g * window.transpose();
        conv_b_[k].grad(f, 0) += g;
        Eigen::Map<nn::Vector> dwin(dx.col(t).data(), e * w);
        dwin += g * conv_w_[k].value.row(f).transpose();
      }
    }
    for (std::size_t j = 0; j < tr.ids.size(); ++j) {
      if (tr.ids[j] == 0) continue;  // unknown words stay at the zero vector
      embed_.grad.col(static_cast<Eigen::Index>(tr.ids[j])) += dx.col(static_cast<Eigen::Index>(j));
    }
  }

  // Penultimate activation for a token sequence; shorter inputs are
  // zero-padded up to the widest filter.
  nn::Vector features(const std::vector<std::string>& tokens) const { return run(tokens).hidden; }

  nn::Vector raw_vad(const std::vector<std::string>& tokens) const { return run(tokens).out; }

  static double squared_error(const nn::Vector& out, const Vad& y) {
    const double dv = out(0) - y.valence, da = out(1) - y.arousal, dd = out(2) - y.dominance;
    return (dv * dv + da * da + dd * dd) / 3.0;
  }

  // Mean over examples of the per-example mean squared VAD error (unclamped).
  double mse(const std::vector<VadExample>& data) const {
    if (data.empty()) return std::nan("");
    double sum = 0.0;
    for (const auto& ex : data) sum += squared_error(raw_vad(split_words(ex.text, cfg_.max_words)), ex.target);
    return sum / static_cast<double>(data.size());
  }

  // Adds the gradient of mse(batch) into the parameter gradient slots.
  void accumulate_mse_gradient(const std::vector<VadExample>& batch) {
    const double scale = 2.0 / (3.0 * static_cast<double>(batch.size()));
    for (const auto& ex : batch) {
      auto tr = run(split_words(ex.text, cfg_.max_words));
      nn::Vector d(3);
      d << tr.out(0) - ex.target.valence, tr.out(1) - ex.target.arousal, tr.out(2) - ex.target.dominance;
      backward(tr, scale * d);
    }
  }

  void write(std::ostream& out) const {
    BinaryWriter w(out);
    write_header(w, "emotion", kVersion);
    w.put<std::uint64_t>(cfg_.embed_dim);
    w.put<std::uint64_t>(cfg_.filters);
    w.put<std::uint64_t>(cfg_.widths.size());
    for (auto width : cfg_.widths) w.put<std::uint64_t>(width);
    w.put<std::uint64_t>(cfg_.emotion_dim);
    w.put<std::uint64_t>(cfg_.max_words);
    w.put<std::uint64_t>(words_.size());
    for (const auto& word : words_) w.put(word);
    nn::write_params(w, const_cast<EmotionModel*>(this)->params());
  }

  // Fails when `expected_emotion_dim` is given and differs from the stored one.
  static EmotionModel read(std::istream& in, std::optional<std::size_t> expected_emotion_dim = {}) {
    BinaryReader r(in);
    const auto version = read_header(r, "emotion");
    if (version != kVersion) throw Error("unsupported emotion model version " + std::to_string(version));
    EmotionConfig cfg;
    cfg.embed_dim = r.get<std::uint64_t>();
    cfg.filters = r.get<std::uint64_t>();
    cfg.widths.resize(r.get<std::uint64_t>());
    for (auto& width : cfg.widths) width = r.get<std::uint64_t>();
    cfg.emotion_dim = r.get<std::uint64_t>();
    cfg.max_words = r.get<std::uint64_t>();
    if (expected_emotion_dim && *expected_emotion_dim != cfg.emotion_dim) {
      throw Error("emotion model has emotion_dim " + std::to_string(cfg.emotion_dim) +
                  ", expected " + std::to_string(*expected_emotion_dim));
    }
    const auto n = r.get<std::uint64_t>();
    if (n == 0) throw Error("emotion model: empty vocabulary");
    std::vector<std::string> words;
    for (std::uint64_t i = 0; i < n; ++i) words.push_back(r.get_string());
    EmotionModel m;
    m.cfg_ = cfg;
    for (std::size_t i = 0; i < words.size(); ++i) m.vocab_.emplace(words[i], i);
    m.words_ = std::move(words);
    m.allocate();
    nn::read_params(r, m.params());
    return m;
  }

  void save(const std::string& path) const {
    auto out = detail::open_output(path);
    write(out);
  }

  static EmotionModel load(const std::string& path, std::optional<std::size_t> expected_emotion_dim = {}) {
    auto in = detail::open_input(path);
    return read(in, expected_emotion_dim);
  }

 private:
  void allocate() {
    const auto e = static_cast<Eigen::Index>(cfg_.embed_dim);
    const auto nf = static_cast<Eigen::Index>(cfg_.filters);
    embed_ = nn::Param("embed", e, static_cast<Eigen::Index>(words_.size()));
    conv_w_.clear();
    conv_b_.clear();
    for (auto width : cfg_.widths) {
      conv_w_.emplace_back("conv" + std::to_string(width) + ".w", nf, e * static_cast<Eigen::Index>(width));
      conv_b_.emplace_back("conv" + std::to_string(width) + ".b", nf, 1);
    }
    const auto pooled = nf * static_cast<Eigen::Index>(cfg_.widths.size());
    dense_w_ = nn::Param("dense.w", static_cast<Eigen::Index>(cfg_.emotion_dim), pooled);
    dense_b_ = nn::Param("dense.b", static_cast<Eigen::Index>(cfg_.emotion_dim), 1);
    head_w_ = nn::Param("head.w", 3, static_cast<Eigen::Index>(cfg_.emotion_dim));
    head_b_ = nn::Param("head.b", 3, 1);
  }

  EmotionConfig cfg_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<std::string> words_;
  nn::Param embed_;
  std::vector<nn::Param> conv_w_;
  std::vector<nn::Param> conv_b_;
  nn::Param dense_w_, dense_b_, head_w_, head_b_;
};

struct EmotionTrainResult {
  EmotionModel model;
  std::vector<EmotionEpoch> history;
  std::vector<VadExample> validation;
};

inline EmotionTrainResult train_emotion_regressor(const std::vector<VadExample>& corpus,
                                                  const EmotionConfig& cfg,
                                                  const EmotionTrainOptions& opts = {}) {
  if (corpus.empty()) throw Error("empty emotion corpus");
  if (opts.epochs == 0 || opts.batch_size == 0) throw Error("epochs and batch size must be positive");
  if (!(opts.val_fraction >= 0.0 && opts.val_fraction < 1.0)) throw Error("val_fraction must lie in [0,1)");

  Rng rng(opts.seed);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::size_t n_val = 0;
  if (opts.val_fraction > 0.0) {
    n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.val_fraction * corpus.size())));
    if (n_val >= corpus.size()) throw Error("corpus too small for a train/validation split");
  }
  std::vector<VadExample> val, train;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_val ? val : train).push_back(corpus[order[i]]);
  }

  std::map<std::string, int> seen;  // ordered, so vocabulary ids are deterministic
  for (const auto& ex : train) {
    for (auto& t : split_words(ex.text, cfg.max_words)) seen.emplace(std::move(t), 0);
  }
  std::vector<std::string> vocab;
  for (const auto& [w, _] : seen) vocab.push_back(w);

  EmotionTrainResult result{EmotionModel(cfg, vocab, opts.seed), {}, val};
  auto& model = result.model;
  auto params = model.params();
  nn::AdamOptions adam_opts;
  adam_opts.learning_rate = opts.learning_rate;
  adam_opts.weight_decay = opts.weight_decay;
  nn::Adam adam(adam_opts);
  std::vector<std::size_t> idx(train.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    rng.shuffle(idx);
    for (std::size_t start = 0; start < idx.size(); start += opts.batch_size) {
      std::vector<VadExample> batch;
      for (std::size_t i = start; i < std::min(idx.size(), start + opts.batch_size); ++i) {
        batch.push_back(train[idx[i]]);
      }
      nn::zero_grads(params);
      model.accumulate_mse_gradient(batch);
      params[0]->grad.col(0).setZero();
      adam.step(params);
    }
    result.history.push_back({epoch, model.mse(train), model.mse(val)});
  }
  return result;
}

// Clamped to [1,5]; blank text is neutral.
inline Vad predict_vad(std::string_view text, const EmotionModel& model) {
  const auto tokens = split_words(text, model.config().max_words);
  if (tokens.empty()) return Vad{};
  const auto out = model.raw_vad(tokens);
  auto clamp = [](double x) { return std::clamp(x, kVadMin, kVadMax); };
  return Vad{clamp(out(0)), clamp(out(1)), clamp(out(2))};
}

inline nn::Vector emotion_word_features(const std::string& word, const EmotionModel& model) {
  return model.features({to_lower_ascii(word)});
}

inline nn::Vector emotion_post_features(const std::vector<std::string>& tokens, const EmotionModel& model) {
  if (tokens.empty()) throw Error("cannot extract emotion features from an empty post");
  return model.features(tokens);
}

}  // namespace depfuse
