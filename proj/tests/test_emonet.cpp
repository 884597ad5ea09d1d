#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"

using namespace depfuse;

namespace {

EmotionConfig small_config(std::size_t emotion_dim = 4) {
  EmotionConfig c;
  c.embed_dim = 5;
  c.filters = 3;
  c.emotion_dim = emotion_dim;
  return c;
}

// Layer-by-layer replay of the regressor on a token list, from raw parameters.
nn::Vector replay_features(EmotionModel& m, const std::vector<std::string>& tokens) {
  const auto params = m.params();
  const auto& cfg = m.config();
  const auto& embed = params[0]->value;
  const std::size_t len = std::max(tokens.size(), std::size_t{4});
  std::vector<nn::Vector> cols(len, nn::Vector::Zero(static_cast<Eigen::Index>(cfg.embed_dim)));
  for (std::size_t j = 0; j < tokens.size(); ++j) cols[j] = embed.col(static_cast<Eigen::Index>(m.word_id(tokens[j])));
  std::vector<double> pooled;
  for (std::size_t k = 0; k < cfg.widths.size(); ++k) {
    const auto& w = params[1 + 2 * k]->value;
    const auto& b = params[2 + 2 * k]->value;
    const std::size_t width = cfg.widths[k];
    for (std::size_t f = 0; f < cfg.filters; ++f) {
      double best = -1e300;
      for (std::size_t t = 0; t + width <= len; ++t) {
        double s = b(static_cast<Eigen::Index>(f), 0);
        for (std::size_t o = 0; o < width; ++o) {
          for (std::size_t e = 0; e < cfg.embed_dim; ++e) {
            s += w(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(o * cfg.embed_dim + e)) *
                 cols[t + o](static_cast<Eigen::Index>(e));
          }
        }
        best = std::max(best, std::tanh(s));
      }
      pooled.push_back(best);
    }
  }
  const auto& dw = params[params.size() - 4]->value;
  const auto& db = params[params.size() - 3]->value;
  nn::Vector h(static_cast<Eigen::Index>(cfg.emotion_dim));
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    double s = db(i, 0);
    for (std::size_t j = 0; j < pooled.size(); ++j) s += dw(i, static_cast<Eigen::Index>(j)) * pooled[j];
    h(i) = std::tanh(s);
  }
  return h;
}

const EmotionTrainResult& synthetic_run() {
  static const auto result =
      train_emotion_regressor(load_vad_jsonl(testutil::data_path("vad_synthetic.jsonl")), EmotionConfig{});
  return result;
}

}  // namespace

TEST(VadCorpus, RejectsOutOfRangeTargets) {
  std::istringstream in(R"({"text":"x","V":6,"A":3,"D":3})");
  EXPECT_THROW(read_vad_jsonl(in), Error);
  std::istringstream missing(R"({"text":"x","V":3,"A":3})");
  EXPECT_THROW(read_vad_jsonl(missing), Error);
}

TEST(EmotionTrain, EmptyCorpusErrors) {
  EXPECT_THROW(train_emotion_regressor({}, small_config()), Error);
}

TEST(EmotionTrain, MemorizesSingleExample) {
  EmotionTrainOptions opts;
  opts.val_fraction = 0.0;
  opts.epochs = 300;
  opts.learning_rate = 1e-2;
  const auto r = train_emotion_regressor({{"i feel wonderful", {4.5, 2.0, 3.5}}}, small_config(), opts);
  EXPECT_LT(r.history.back().train_mse, 1e-3);
  EXPECT_TRUE(std::isnan(r.history.back().val_mse));
}

TEST(EmotionTrain, DeterministicWeights) {
  const auto data = load_vad_jsonl(testutil::data_path("vad_synthetic.jsonl"));
  const std::vector<VadExample> head(data.begin(), data.begin() + 60);
  EmotionTrainOptions opts;
  opts.epochs = 3;
  auto a = train_emotion_regressor(head, small_config(), opts).model;
  auto b = train_emotion_regressor(head, small_config(), opts).model;
  std::ostringstream sa, sb;
  a.write(sa);
  b.write(sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(EmotionTrain, SyntheticValidationMse) {
  const auto& r = synthetic_run();
  EXPECT_FALSE(r.validation.empty());
  EXPECT_LT(r.history.back().val_mse, 0.1);
}

TEST(PredictVad, EmptyTextIsNeutral) {
  EXPECT_EQ(predict_vad("", synthetic_run().model), (Vad{3.0, 3.0, 3.0}));
}

TEST(PredictVad, FuzzStaysInRange) {
  const auto& m = synthetic_run().model;
  Rng rng(8);
  const std::vector<std::string> words{"joy", "grief", "rage", "calm", "the", "zzz", "!", "wonderful"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    const auto n = rng.index(12);
    for (std::size_t j = 0; j < n; ++j) text += words[rng.index(words.size())] + " ";
    const auto v = predict_vad(text, m);
    for (double x : {v.valence, v.arousal, v.dominance}) {
      EXPECT_GE(x, 1.0);
      EXPECT_LE(x, 5.0);
    }
  }
}

TEST(PredictVad, PlantedHighValenceWordRaisesValence) {
  const auto data = load_vad_jsonl(testutil::data_path("vad_synthetic.jsonl"));
  double mean_v = 0.0;
  for (const auto& ex : data) mean_v += ex.target.valence;
  mean_v /= static_cast<double>(data.size());
  auto best = data.front();
  for (const auto& ex : data) {
    if (ex.target.valence > best.target.valence) best = ex;
  }
  EXPECT_GT(predict_vad(best.text, synthetic_run().model).valence, mean_v) << best.text;
}

TEST(EmotionFeatures, ShapesAndDeterminism) {
  auto m = EmotionModel(small_config(6), {"happy", "sad"}, 3);
  EXPECT_EQ(emotion_word_features("happy", m).size(), 6);
  EXPECT_EQ(emotion_word_features("happy", m), emotion_word_features("happy", m));
  EXPECT_EQ(emotion_post_features({"happy", "sad"}, m).size(), 6);
  EXPECT_EQ(emotion_post_features({"sad"}, m), emotion_word_features("sad", m));
  EXPECT_THROW(emotion_post_features({}, m), Error);
}

TEST(EmotionFeatures, MatchLayerReplay) {
  auto m = EmotionModel(small_config(), {"happy", "sad", "very"}, 17);
  EXPECT_TRUE(emotion_word_features("sad", m).isApprox(replay_features(m, {"sad"}), 1e-12));
  const std::vector<std::string> post{"very", "sad", "and", "happy", "very", "sad"};
  EXPECT_TRUE(emotion_post_features(post, m).isApprox(replay_features(m, post), 1e-12));
}

TEST(EmotionGradient, MatchesFiniteDifferences) {
  const std::vector<VadExample> data{{"very happy today", {4.2, 3.1, 3.9}}, {"so sad", {1.5, 2.2, 2.0}}};
  auto m = EmotionModel(small_config(4), {"happy", "sad", "so", "today", "very"}, 5);
  auto params = m.params();
  params.erase(params.begin());  // the embedding table is checked separately below
  auto res = nn::check_gradients(params, [&] { return m.mse(data); }, [&] { m.accumulate_mse_gradient(data); });
  EXPECT_LT(res.max_relative_error, 1e-4) << res.worst_param;
  auto all = m.params();
  auto emb = nn::check_gradients({all[0]}, [&] { return m.mse(data); }, [&] {
    nn::zero_grads(m.params());
    m.accumulate_mse_gradient(data);
  });
  EXPECT_LT(emb.max_relative_error, 1e-4);
}

TEST(EmotionCheckpoint, RoundTripAndDimGuard) {
  auto m = EmotionModel(small_config(4), {"a", "b"}, 1);
  std::stringstream buf;
  m.write(buf);
  const std::string bytes = buf.str();
  std::istringstream in1(bytes);
  auto back = EmotionModel::read(in1);
  EXPECT_EQ(back.features({"a", "b"}), m.features({"a", "b"}));
  std::istringstream in2(bytes);
  EXPECT_THROW(EmotionModel::read(in2, 32), Error);
}
