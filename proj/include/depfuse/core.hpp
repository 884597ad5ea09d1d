#pragma once

// Domain types shared by every depfuse module: labels, posts, user bundles,
// datasets, feature-set selection and the model configuration.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace depfuse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ClassLabel : std::uint8_t { control = 0, depressed = 1 };

inline constexpr std::array<ClassLabel, 2> kAllLabels{ClassLabel::control,
                                                      ClassLabel::depressed};

inline std::string_view to_string(ClassLabel label) {
  return label == ClassLabel::depressed ? "depressed" : "control";
}

inline ClassLabel parse_label(std::string_view s) {
  if (s == "control") return ClassLabel::control;
  if (s == "depressed") return ClassLabel::depressed;
  throw Error("unknown label \"" + std::string(s) + "\"");
}

inline std::size_t label_index(ClassLabel label) {
  return static_cast<std::size_t>(label);
}

struct Post {
  std::string id;
  std::string text;
  std::optional<ClassLabel> label;
  std::optional<std::int64_t> ts;

  bool operator==(const Post&) const = default;
};

struct UserBundle {
  std::string user_id;
  ClassLabel label = ClassLabel::control;
  std::vector<Post> posts;  // chronological when timestamps are known

  bool operator==(const UserBundle&) const = default;
};

enum class Granularity { post_level, user_level };

inline std::string_view to_string(Granularity g) {
  return g == Granularity::post_level ? "post" : "user";
}

inline Granularity parse_granularity(std::string_view s) {
  if (s == "post" || s == "post_level") return Granularity::post_level;
  if (s == "user" || s == "user_level") return Granularity::user_level;
  throw Error("unknown granularity \"" + std::string(s) + "\"");
}

// Either a list of labeled posts or a list of labeled user bundles. Immutable
// once built.
class Dataset {
 public:
  Dataset() : items_(std::vector<Post>{}) {}

  static Dataset from_posts(std::vector<Post> posts) {
    for (const auto& p : posts) {
      if (!p.label) throw Error("post \"" + p.id + "\" has no label");
    }
    Dataset d;
    d.items_ = std::move(posts);
    return d;
  }

  static Dataset from_users(std::vector<UserBundle> users) {
    for (auto& u : users) {
      if (u.posts.empty()) {
        throw Error("user \"" + u.user_id + "\" has no posts");
      }
      for (const auto& p : u.posts) {
        if (p.label) {
          throw Error("user \"" + u.user_id +
                      "\" carries a per-post label; labels live on the user");
        }
      }
      // chronological order when every post is timestamped
      if (std::all_of(u.posts.begin(), u.posts.end(),
                      [](const Post& p) { return p.ts.has_value(); })) {
        std::stable_sort(u.posts.begin(), u.posts.end(),
                         [](const Post& a, const Post& b) { return *a.ts < *b.ts; });
      }
    }
    Dataset d;
    d.items_ = std::move(users);
    return d;
  }

  Granularity granularity() const {
    return std::holds_alternative<std::vector<Post>>(items_)
               ? Granularity::post_level
               : Granularity::user_level;
  }

  std::size_t size() const {
    return std::visit([](const auto& v) { return v.size(); }, items_);
  }

  bool empty() const { return size() == 0; }

  const std::vector<Post>& posts() const {
    if (granularity() != Granularity::post_level) {
      throw Error("dataset is user-level, posts() requested");
    }
    return std::get<std::vector<Post>>(items_);
  }

  const std::vector<UserBundle>& users() const {
    if (granularity() != Granularity::user_level) {
      throw Error("dataset is post-level, users() requested");
    }
    return std::get<std::vector<UserBundle>>(items_);
  }

  ClassLabel label(std::size_t i) const {
    if (granularity() == Granularity::post_level) return *posts().at(i).label;
    return users().at(i).label;
  }

  const std::string& id(std::size_t i) const {
    if (granularity() == Granularity::post_level) return posts().at(i).id;
    return users().at(i).user_id;
  }

  std::vector<ClassLabel> labels() const {
    std::vector<ClassLabel> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(label(i));
    return out;
  }

  Dataset subset(const std::vector<std::size_t>& indices) const {
    if (granularity() == Granularity::post_level) {
      std::vector<Post> out;
      for (auto i : indices) out.push_back(posts().at(i));
      return from_posts(std::move(out));
    }
    std::vector<UserBundle> out;
    for (auto i : indices) out.push_back(users().at(i));
    return from_users(std::move(out));
  }

  bool operator==(const Dataset&) const = default;

 private:
  std::variant<std::vector<Post>, std::vector<UserBundle>> items_;
};

struct ValidationReport {
  std::array<std::size_t, 2> counts{0, 0};
  std::vector<std::string> empty_text_ids;
  std::vector<std::string> duplicate_ids;

  std::size_t count(ClassLabel l) const { return counts[label_index(l)]; }
  bool both_classes_present() const { return counts[0] > 0 && counts[1] > 0; }
  bool ok() const {
    return empty_text_ids.empty() && duplicate_ids.empty() && both_classes_present();
  }
};

// Pure report; never throws on content problems.
inline ValidationReport validate_dataset(const Dataset& dataset) {
  ValidationReport report;
  std::set<std::string> seen;
  std::set<std::string> dups;
  auto note_id = [&](const std::string& id) {
    if (!seen.insert(id).second && dups.insert(id).second) {
      report.duplicate_ids.push_back(id);
    }
  };
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    report.counts[label_index(dataset.label(i))]++;
    note_id(dataset.id(i));
  }
  if (dataset.granularity() == Granularity::post_level) {
    for (const auto& p : dataset.posts()) {
      if (p.text.empty()) report.empty_text_ids.push_back(p.id);
    }
  } else {
    for (const auto& u : dataset.users()) {
      for (std::size_t j = 0; j < u.posts.size(); ++j) {
        if (u.posts[j].text.empty()) {
          report.empty_text_ids.push_back(u.user_id + "#" + std::to_string(j));
        }
      }
    }
  }
  return report;
}

// Which optional parts of the architecture are switched on. The empty set is
// the encoder-only baseline.
struct FeatureSet {
  bool emotion = false;
  bool profanity = false;
  bool morality = false;

  bool any_handcrafted() const { return profanity || morality; }
  bool empty() const { return !emotion && !profanity && !morality; }

  std::size_t handcrafted_dim() const {
    return (profanity ? 1u : 0u) + (morality ? 10u : 0u);
  }

  // "B", "B+E", "B+E+P", ...
  std::string variant_name() const {
    std::string s = "B";
    if (emotion) s += "+E";
    if (profanity) s += "+P";
    if (morality) s += "+M";
    return s;
  }

  // comma list form used by --features
  std::string to_list() const {
    std::string s;
    auto add = [&](const char* n) {
      if (!s.empty()) s += ",";
      s += n;
    };
    if (emotion) add("emotion");
    if (profanity) add("profanity");
    if (morality) add("morality");
    return s;
  }

  static FeatureSet parse(std::string_view text) {
    FeatureSet fs;
    if (text == "B" || text.starts_with("B+")) {
      for (std::size_t i = 1; i < text.size(); i += 2) {
        if (text[i] != '+' || i + 1 >= text.size()) {
          throw Error("bad variant name \"" + std::string(text) + "\"");
        }
        switch (text[i + 1]) {
          case 'E': fs.emotion = true; break;
          case 'P': fs.profanity = true; break;
          case 'M': fs.morality = true; break;
          default: throw Error("bad variant name \"" + std::string(text) + "\"");
        }
      }
      return fs;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find(',', start);
      if (end == std::string_view::npos) end = text.size();
      auto item = text.substr(start, end - start);
      if (item == "emotion") fs.emotion = true;
      else if (item == "profanity") fs.profanity = true;
      else if (item == "morality") fs.morality = true;
      else if (item == "none" || item.empty()) {}
      else throw Error("unknown feature \"" + std::string(item) + "\"");
      start = end + 1;
    }
    return fs;
  }

  bool operator==(const FeatureSet&) const = default;
};

// Rows of the ablation tables, in order.
inline std::vector<FeatureSet> canonical_variants() {
  return {FeatureSet{}, FeatureSet{true, false, false}, FeatureSet{true, true, false},
          FeatureSet{true, false, true}, FeatureSet{true, true, true}};
}

struct ClassWeights {
  double control = 1.0;
  double depressed = 1.0;

  double operator[](ClassLabel l) const {
    return l == ClassLabel::depressed ? depressed : control;
  }
  bool operator==(const ClassWeights&) const = default;
};

struct ModelConfig {
  Granularity granularity = Granularity::post_level;
  std::size_t hidden_size = 128;
  double dropout = 0.2;
  std::size_t max_words = 128;
  std::size_t encoder_dim = 64;
  std::size_t emotion_dim = 32;
  FeatureSet features{true, true, false};
  ClassWeights class_weights{};
  bool attention_sum_projected = false;
  bool normalize_features = true;
  std::uint64_t seed = 42;

  void validate() const {
    if (hidden_size == 0 || max_words == 0 || encoder_dim == 0 || emotion_dim == 0) {
      throw Error("model dimensions must be positive");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0,1)");
    if (!(class_weights.control > 0.0 && class_weights.depressed > 0.0)) {
      throw Error("class weights must be positive");
    }
  }

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace depfuse
