#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"

using namespace depfuse;
using testutil::post;

TEST(Validate, SmallestValidDataset) {
  auto ds = Dataset::from_posts({post("a", "hello", ClassLabel::control), post("b", "sad", ClassLabel::depressed)});
  const auto r = validate_dataset(ds);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.count(ClassLabel::control), 1u);
  EXPECT_EQ(r.count(ClassLabel::depressed), 1u);
}

TEST(Validate, FlagsDuplicateId) {
  auto ds = Dataset::from_posts({post("a", "x", ClassLabel::control), post("a", "y", ClassLabel::depressed),
                                 post("b", "z", ClassLabel::depressed)});
  const auto r = validate_dataset(ds);
  ASSERT_EQ(r.duplicate_ids.size(), 1u);
  EXPECT_EQ(r.duplicate_ids[0], "a");
  EXPECT_FALSE(r.ok());
}

TEST(Validate, ToyCorpusCountsMatchLineScan) {
  const auto path = testutil::data_path("posts_toy.jsonl");
  std::ifstream in(path);
  std::string line;
  std::size_t control = 0, depressed = 0;
  while (std::getline(in, line)) {
    if (line.find("\"label\": \"control\"") != std::string::npos) ++control;
    if (line.find("\"label\": \"depressed\"") != std::string::npos) ++depressed;
  }
  const auto r = validate_dataset(load_post_jsonl(path));
  EXPECT_EQ(control + depressed, 20u);
  EXPECT_EQ(r.count(ClassLabel::control), control);
  EXPECT_EQ(r.count(ClassLabel::depressed), depressed);
}

TEST(Validate, ReportsEmptyTextWhenAllowed) {
  std::istringstream in(R"({"id":"a","text":"","label":"control"}
{"id":"b","text":"hi","label":"depressed"}
)");
  const auto ds = read_post_jsonl(in, LoadOptions{true});
  const auto r = validate_dataset(ds);
  ASSERT_EQ(r.empty_text_ids.size(), 1u);
  EXPECT_EQ(r.empty_text_ids[0], "a");
}

TEST(Loader, RejectsEmptyTextByDefault) {
  std::istringstream in(R"({"id":"a","text":"","label":"control"})");
  EXPECT_THROW(read_post_jsonl(in), Error);
}

TEST(Loader, RejectsUnknownLabelWithLineNumber) {
  std::istringstream in("{\"id\":\"a\",\"text\":\"x\",\"label\":\"control\"}\n{\"id\":\"b\",\"text\":\"x\",\"label\":\"sad\"}\n");
  try {
    read_post_jsonl(in);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Loader, RejectsMalformedJson) {
  std::istringstream in("{\"id\":\"a\",\n");
  EXPECT_THROW(read_post_jsonl(in), Error);
}

TEST(Loader, UserBundleNeedsPosts) {
  std::istringstream in(R"({"user_id":"u","label":"control","posts":[]})");
  EXPECT_THROW(read_user_jsonl(in), Error);
}

TEST(Loader, UserPostsSortedByTimestamp) {
  std::istringstream in(
      R"({"user_id":"u","label":"depressed","posts":[{"text":"late","ts":20},{"text":"early","ts":10}]})");
  const auto ds = read_user_jsonl(in);
  ASSERT_EQ(ds.users()[0].posts.size(), 2u);
  EXPECT_EQ(ds.users()[0].posts[0].text, "early");
}

TEST(Loader, SniffsGranularity) {
  EXPECT_EQ(sniff_granularity(testutil::data_path("posts_toy.jsonl")), Granularity::post_level);
  EXPECT_EQ(sniff_granularity(testutil::data_path("users_toy.jsonl")), Granularity::user_level);
}

TEST(Dataset, GranularityMustMatchItems) {
  const auto ds = load_post_jsonl(testutil::data_path("posts_toy.jsonl"));
  EXPECT_THROW(ds.users(), Error);
}

TEST(Dataset, PostRoundTrip) {
  const auto ds = load_post_jsonl(testutil::data_path("posts_toy.jsonl"));
  std::stringstream buf;
  write_jsonl(buf, ds);
  EXPECT_EQ(read_post_jsonl(buf), ds);
}

TEST(Dataset, UserRoundTrip) {
  const auto ds = load_user_jsonl(testutil::data_path("users_toy.jsonl"));
  std::stringstream buf;
  write_jsonl(buf, ds);
  EXPECT_EQ(read_user_jsonl(buf), ds);
}

TEST(Dataset, LabelSetIsClosed) {
  for (const auto* name : {"posts_toy.jsonl", "users_toy.jsonl"}) {
    const auto ds = load_dataset(testutil::data_path(name));
    for (auto l : ds.labels()) EXPECT_TRUE(l == ClassLabel::control || l == ClassLabel::depressed);
  }
  EXPECT_THROW(parse_label("neutral"), Error);
}

TEST(Dataset, SubsetKeepsOrder) {
  const auto ds = load_post_jsonl(testutil::data_path("posts_toy.jsonl"));
  const auto sub = ds.subset({3, 1});
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub.id(0), ds.id(3));
  EXPECT_EQ(sub.id(1), ds.id(1));
}

TEST(FeatureSetTest, ParsesListsAndVariantNames) {
  EXPECT_EQ(FeatureSet::parse("emotion,profanity").variant_name(), "B+E+P");
  EXPECT_EQ(FeatureSet::parse("B+E+M").to_list(), "emotion,morality");
  EXPECT_EQ(FeatureSet::parse("B").variant_name(), "B");
  EXPECT_THROW(FeatureSet::parse("emotion,colour"), Error);
  EXPECT_EQ(FeatureSet::parse("emotion,profanity,morality").handcrafted_dim(), 11u);
  EXPECT_EQ(canonical_variants().size(), 5u);
}

TEST(ModelConfigTest, Validation) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.hidden_size, 128u);
  EXPECT_DOUBLE_EQ(c.dropout, 0.2);
  EXPECT_EQ(c.max_words, 128u);
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = ModelConfig{};
  c.hidden_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = ModelConfig{};
  c.class_weights = {1.0, 0.0};
  EXPECT_THROW(c.validate(), Error);
}

TEST(Text, TokenizerSplitsPunctuation) {
  const auto t = split_words("I'm SO tired, ok?");
  const std::vector<std::string> expect{"i", "'", "m", "so", "tired", ",", "ok", "?"};
  EXPECT_EQ(t, expect);
  EXPECT_EQ(tokenize("a b c d", 2).size(), 2u);
  EXPECT_THROW(tokenize("   ", 5), Error);
}

TEST(Text, RngIsReproducible) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  std::vector<int> v{1, 2, 3, 4, 5, 6}, w = v;
  Rng c(9), d(9);
  c.shuffle(v);
  d.shuffle(w);
  EXPECT_EQ(v, w);
}

TEST(BinaryIo, HeaderRejectsWrongKind) {
  std::stringstream buf;
  BinaryWriter w(buf);
  write_header(w, "emotion", 1);
  BinaryReader r(buf);
  EXPECT_THROW(read_header(r, "model"), Error);
}
