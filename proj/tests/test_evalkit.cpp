#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "test_util.hpp"

using namespace depfuse;
using testutil::post;

namespace {

constexpr auto D = ClassLabel::depressed;
constexpr auto C = ClassLabel::control;

std::vector<ClassLabel> labels_of(std::size_t dep, std::size_t ctl) {
  std::vector<ClassLabel> out(dep, D);
  out.insert(out.end(), ctl, C);
  return out;
}

void expect_partition(const std::vector<Fold>& folds, std::size_t n) {
  std::vector<int> seen(n, 0);
  std::size_t lo = n, hi = 0;
  for (const auto& f : folds) {
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
    for (auto i : f) {
      ASSERT_LT(i, n);
      ++seen[i];
    }
  }
  for (auto s : seen) EXPECT_EQ(s, 1);
  EXPECT_LE(hi - lo, 1u);
}

// Profanity alone splits the classes.
Dataset separable_posts() {
  std::vector<Post> posts;
  for (int i = 0; i < 10; ++i) {
    posts.push_back(post("d" + std::to_string(i), "this fucking shit is damn awful", D));
    posts.push_back(post("c" + std::to_string(i), "a calm walk in the park", C));
  }
  return Dataset::from_posts(posts);
}

PipelineSpec small_spec(FeatureSet fs) {
  PipelineSpec spec;
  spec.model.features = fs;
  spec.model.hidden_size = 4;
  spec.model.encoder_dim = 8;
  spec.encoder.dim = 8;
  spec.resources.profanity = std::make_shared<const ProfanityModel>(testutil::shipped_profanity());
  spec.resources.lexicon = std::make_shared<const MoralLexicon>(testutil::toy_lexicon());
  return spec;
}

TrainConfig small_train() {
  TrainConfig tc;
  tc.epochs = 20;
  tc.learning_rate = 1e-2;
  tc.batch_size = 4;
  tc.seed = 7;
  return tc;
}

}  // namespace

TEST(Metrics, Perfect) {
  const std::vector<ClassLabel> y{D, C, D, C};
  const auto m = compute_metrics(y, y);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.precision, 1.0);
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.f1, 1.0);
}

TEST(Metrics, WorkedCounts) {
  // tp=3 fp=1 fn=2 tn=4
  const std::vector<ClassLabel> pred{D, D, D, D, C, C, C, C, C, C};
  const std::vector<ClassLabel> gold{D, D, D, C, D, D, C, C, C, C};
  const auto m = compute_metrics(pred, gold);
  EXPECT_EQ(m.tp, 3u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.fn, 2u);
  EXPECT_EQ(m.tn, 4u);
  EXPECT_DOUBLE_EQ(m.precision, 0.75);
  EXPECT_DOUBLE_EQ(m.recall, 0.6);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
}

TEST(Metrics, AllControlPredicted) {
  const auto m = compute_metrics({C, C, C, C}, {D, C, D, C});
  EXPECT_DOUBLE_EQ(m.recall, 0.0);
  EXPECT_DOUBLE_EQ(m.precision, 0.0);
  EXPECT_DOUBLE_EQ(m.f1, 0.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
}

TEST(Metrics, LengthMismatch) {
  EXPECT_THROW(compute_metrics({D, C}, {D}), Error);
  EXPECT_THROW(compute_metrics({}, {}), Error);
}

TEST(Metrics, FuzzAgainstCountFormulas) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + rng.index(40);
    std::vector<ClassLabel> p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform() < 0.5 ? D : C;
      g[i] = rng.uniform() < 0.5 ? D : C;
    }
    const auto m = compute_metrics(p, g);
    EXPECT_EQ(m.total(), n);
    if (m.tp > 0) EXPECT_NEAR(m.f1, 2.0 * m.tp / (2.0 * m.tp + m.fp + m.fn), 1e-12);
    EXPECT_GE(m.f1, 0.0);
    EXPECT_LE(m.f1, 1.0);
  }
}

TEST(KFold, TwentyIntoTen) {
  const auto folds = kfold_split(labels_of(10, 10), 10, 1);
  ASSERT_EQ(folds.size(), 10u);
  for (const auto& f : folds) EXPECT_EQ(f.size(), 2u);
  expect_partition(folds, 20);
}

TEST(KFold, Stratified) {
  const auto y = labels_of(24, 36);
  const auto folds = kfold_split(y, 5, 3);
  for (const auto& f : folds) {
    const auto dep = std::count_if(f.begin(), f.end(), [&](std::size_t i) { return y[i] == D; });
    EXPECT_TRUE(dep == 4 || dep == 5) << dep;
    EXPECT_EQ(f.size(), 12u);
  }
}

TEST(KFold, PartitionFuzz) {
  Rng rng(12);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto n = 2 + rng.index(120);
    std::vector<ClassLabel> y(n);
    for (auto& l : y) l = rng.uniform() < 0.3 ? D : C;
    const auto k = 2 + rng.index(std::min<std::size_t>(n - 1, 12));
    const auto folds = kfold_split(y, k, seed);
    ASSERT_EQ(folds.size(), k);
    expect_partition(folds, n);
    EXPECT_EQ(folds, kfold_split(y, k, seed));
  }
}

TEST(KFold, SeedChangesAssignment) {
  const auto y = labels_of(20, 20);
  EXPECT_NE(kfold_split(y, 5, 1), kfold_split(y, 5, 2));
}

TEST(KFold, Errors) {
  EXPECT_THROW(kfold_split(labels_of(2, 2), 5, 1), Error);
  EXPECT_THROW(kfold_split(labels_of(2, 2), 1, 1), Error);
}

TEST(CrossValidation, SeparableSetIsPerfect) {
  const auto ds = separable_posts();
  const auto r = run_cv(ds, small_spec(FeatureSet{false, true, false}), small_train(), 5);
  ASSERT_EQ(r.folds.size(), 5u);
  EXPECT_DOUBLE_EQ(r.mean.f1, 1.0);
  std::size_t total = 0;
  for (const auto& f : r.folds) {
    EXPECT_EQ(f.total(), 4u);
    total += f.total();
  }
  EXPECT_EQ(total, ds.size());
  EXPECT_EQ(r.mean.total(), ds.size());
}

TEST(CrossValidation, Deterministic) {
  const auto ds = separable_posts();
  const auto spec = small_spec(FeatureSet{false, true, true});
  EXPECT_EQ(run_cv(ds, spec, small_train(), 4).folds, run_cv(ds, spec, small_train(), 4).folds);
}

TEST(CrossValidation, RejectsUserLevel) {
  UserBundle u{"u", D, {Post{"p", "x", std::nullopt, std::nullopt}}};
  UserBundle v{"v", C, {Post{"q", "y", std::nullopt, std::nullopt}}};
  const auto ds = Dataset::from_users({u, v});
  EXPECT_THROW(run_cv(ds, small_spec(FeatureSet{}), small_train(), 2), Error);
}

TEST(Ablation, RowsAndFormats) {
  const auto ds = separable_posts();
  auto spec = small_spec(FeatureSet{});
  EmotionConfig ec;
  ec.emotion_dim = spec.model.emotion_dim;
  spec.resources.emotion = std::make_shared<const EmotionModel>(ec, std::vector<std::string>{"walk", "park"}, 1);
  TrainConfig tc = small_train();
  tc.epochs = 3;
  const std::vector<FeatureSet> variants{FeatureSet{}, FeatureSet{false, true, false}, FeatureSet{false, true, false},
                                         FeatureSet{true, true, true}};
  const auto rows = ablation_run(ds, variants, spec, tc, 4);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].features.variant_name(), "B");
  EXPECT_FALSE(rows[0].features.emotion);
  EXPECT_EQ(rows[1].report.folds, rows[2].report.folds);
  EXPECT_EQ(rows[3].features.variant_name(), "B+E+P+M");

  const auto j = ablation_json(rows);
  for (const char* key : {"B", "B+P", "B+E+P+M"}) {
    ASSERT_TRUE(j.contains(key)) << key;
    for (const char* f : {"acc", "p", "r", "f1", "folds"}) EXPECT_TRUE(j[key].contains(f));
    EXPECT_EQ(j[key]["folds"].size(), 4u);
  }
  const auto table = ablation_table(rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
  EXPECT_EQ(table.rfind("Model", 0), 0u);
  EXPECT_NE(table.find("B+E+P+M"), std::string::npos);
}

TEST(Ablation, EmptyVariantsRejected) {
  EXPECT_THROW(ablation_run(separable_posts(), {}, small_spec(FeatureSet{}), small_train(), 2), Error);
}
