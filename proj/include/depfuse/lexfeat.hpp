#pragma once

// Hand-crafted post/user features: a character n-gram profanity scorer,
// moral-strength lexicon features, and the per-class corpus statistics and
// histograms used to motivate them.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/io.hpp"
#include "depfuse/text.hpp"

namespace depfuse {

// ---------------------------------------------------------------------------
// Moral lexicon

enum class MoralDimension : std::uint8_t {
  harm_care = 0,
  cheating_fairness,
  betrayal_loyalty,
  subversion_authority,
  degradation_purity,
};

inline constexpr std::size_t kMoralDims = 5;
inline constexpr std::size_t kMoralityWidth = 2 * kMoralDims;
inline constexpr double kNeutralStrength = 5.0;

inline constexpr std::array<MoralDimension, kMoralDims> kAllDimensions{
    MoralDimension::harm_care, MoralDimension::cheating_fairness,
    MoralDimension::betrayal_loyalty, MoralDimension::subversion_authority,
    MoralDimension::degradation_purity};

inline std::string_view to_string(MoralDimension d) {
  static constexpr std::array<std::string_view, kMoralDims> names{
      "harm_care", "cheating_fairness", "betrayal_loyalty", "subversion_authority",
      "degradation_purity"};
  return names[static_cast<std::size_t>(d)];
}

inline std::string_view short_name(MoralDimension d) {
  static constexpr std::array<std::string_view, kMoralDims> names{"hc", "cf", "bl", "sa", "dp"};
  return names[static_cast<std::size_t>(d)];
}

inline MoralDimension parse_dimension(std::string_view s) {
  for (auto d : kAllDimensions) {
    if (s == to_string(d) || s == short_name(d)) return d;
  }
  throw Error("unknown moral dimension \"" + std::string(s) + "\"");
}

struct MoralMatch {
  MoralDimension dimension;
  double strength;
  bool operator==(const MoralMatch&) const = default;
};

class MoralLexicon {
 public:
  using Entry = std::array<std::optional<double>, kMoralDims>;

  void add(std::string_view word, MoralDimension dim, double strength) {
    if (!(strength >= 1.0 && strength <= 9.0)) {
      throw Error("moral strength " + std::to_string(strength) + " outside [1,9]");
    }
    auto& slot = entries_[to_lower_ascii(word)][static_cast<std::size_t>(dim)];
    if (slot) {
      throw Error("duplicate lexicon entry for \"" + std::string(word) + "\" in " +
                  std::string(to_string(dim)));
    }
    slot = strength;
  }

  // `word` must already be lowercase.
  const Entry* find(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::optional<double> strength(std::string_view word, MoralDimension dim) const {
    const auto* e = find(to_lower_ascii(word));
    if (!e) return std::nullopt;
    return (*e)[static_cast<std::size_t>(dim)];
  }

  std::size_t size() const { return entries_.size(); }

  static MoralLexicon read_tsv(std::istream& in) {
    MoralLexicon lex;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string col;
      while (std::getline(ss, col, '\t')) cols.push_back(col);
      if (cols.size() != 3) {
        throw Error("lexicon line " + std::to_string(line_no) + ": expected 3 tab-separated columns");
      }
      try {
        std::size_t used = 0;
        double strength = std::stod(cols[2], &used);
        if (used != cols[2].size()) throw Error("bad strength \"" + cols[2] + "\"");
        lex.add(cols[0], parse_dimension(cols[1]), strength);
      } catch (const std::invalid_argument&) {
        throw Error("lexicon line " + std::to_string(line_no) + ": bad strength");
      } catch (const Error& e) {
        throw Error("lexicon line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return lex;
  }

  static MoralLexicon load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open lexicon " + path);
    return read_tsv(in);
  }

 private:
  std::unordered_map<std::string, Entry> entries_;
};

// Case-folded exact lookup. A word listed under several dimensions reports the
// first one in canonical dimension order; use MoralLexicon::strength for a
// specific dimension.
inline std::optional<MoralMatch> moral_word_score(std::string_view word,
                                                  const MoralLexicon& lexicon) {
  const auto* e = lexicon.find(to_lower_ascii(word));
  if (!e) return std::nullopt;
  for (auto d : kAllDimensions) {
    if (auto s = (*e)[static_cast<std::size_t>(d)]) return MoralMatch{d, *s};
  }
  return std::nullopt;
}

// [hc_avg, hc_pres, cf_avg, cf_pres, bl_avg, bl_pres, sa_avg, sa_pres, dp_avg, dp_pres]
using MoralityFeatures = std::array<double, kMoralityWidth>;

inline MoralityFeatures neutral_morality() {
  MoralityFeatures f{};
  for (std::size_t d = 0; d < kMoralDims; ++d) {
    f[2 * d] = kNeutralStrength;
    f[2 * d + 1] = 0.0;
  }
  return f;
}

namespace detail {

struct MoralTally {
  std::array<double, kMoralDims> strength_sum{};
  std::array<std::size_t, kMoralDims> matches{};

  void add_tokens(const std::vector<std::string>& tokens, const MoralLexicon& lex) {
    for (const auto& t : tokens) {
      const auto* e = lex.find(t);
      if (!e) continue;
      for (std::size_t d = 0; d < kMoralDims; ++d) {
        if ((*e)[d]) {
          strength_sum[d] += *(*e)[d];
          matches[d]++;
        }
      }
    }
  }

  double average(std::size_t d) const {
    return matches[d] == 0 ? kNeutralStrength : strength_sum[d] / static_cast<double>(matches[d]);
  }
};

}  // namespace detail

// Per dimension: mean strength of matched tokens (5.0 if none) and the fraction
// of tokens that matched.
inline MoralityFeatures post_morality_features(std::string_view text, const MoralLexicon& lexicon) {
  const auto tokens = split_words(text);
  if (tokens.empty()) return neutral_morality();
  detail::MoralTally tally;
  tally.add_tokens(tokens, lexicon);
  MoralityFeatures f{};
  for (std::size_t d = 0; d < kMoralDims; ++d) {
    f[2 * d] = tally.average(d);
    f[2 * d + 1] = static_cast<double>(tally.matches[d]) / static_cast<double>(tokens.size());
  }
  return f;
}

// Per dimension: word-weighted mean strength across every matched word of
// every post (5.0 if none) and the fraction of posts with at least one match.
inline MoralityFeatures user_morality_features(const std::vector<std::string>& posts,
                                               const MoralLexicon& lexicon) {
  if (posts.empty()) throw Error("no posts");
  detail::MoralTally total;
  std::array<std::size_t, kMoralDims> posts_with{};
  for (const auto& text : posts) {
    detail::MoralTally one;
    one.add_tokens(split_words(text), lexicon);
    for (std::size_t d = 0; d < kMoralDims; ++d) {
      total.strength_sum[d] += one.strength_sum[d];
      total.matches[d] += one.matches[d];
      if (one.matches[d] > 0) posts_with[d]++;
    }
  }
  MoralityFeatures f{};
  for (std::size_t d = 0; d < kMoralDims; ++d) {
    f[2 * d] = total.average(d);
    f[2 * d + 1] = static_cast<double>(posts_with[d]) / static_cast<double>(posts.size());
  }
  return f;
}

// ---------------------------------------------------------------------------
// Profanity scorer: logistic regression over hashed character 3..5-grams with
// L2-normalized counts.

struct ProfanityExample {
  std::string text;
  bool profane = false;
};

inline std::vector<ProfanityExample> read_profanity_jsonl(std::istream& in) {
  std::vector<ProfanityExample> out;
  detail::for_each_json_line(in, [&](const Json& obj, std::size_t line_no) {
    ProfanityExample ex;
    ex.text = detail::require_string(obj, "text", line_no);
    const auto& p = detail::require(obj, "profane", line_no);
    if (!p.is_boolean()) throw Error(detail::line_error(line_no, "\"profane\" must be a boolean"));
    ex.profane = p.get<bool>();
    out.push_back(std::move(ex));
  });
  return out;
}

inline std::vector<ProfanityExample> load_profanity_jsonl(const std::string& path) {
  auto in = detail::open_input(path);
  return read_profanity_jsonl(in);
}

struct ProfanityTrainOptions {
  std::size_t epochs = 400;
  double learning_rate = 0.05;
  double l2 = 1e-4;
};

class ProfanityModel {
 public:
  using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

  static constexpr std::uint32_t kVersion = 1;

  ProfanityModel() : ProfanityModel(1u << 16) {}

  explicit ProfanityModel(std::size_t buckets, std::size_t min_n = 3, std::size_t max_n = 5,
                          std::uint64_t hash_seed = 0)
      : buckets_(buckets), min_n_(min_n), max_n_(max_n), hash_seed_(hash_seed),
        weights_(buckets, 0.0) {
    if (buckets == 0 || min_n == 0 || min_n > max_n) throw Error("bad profanity featurizer shape");
  }

  std::size_t buckets() const { return buckets_; }
  double bias() const { return bias_; }
  const std::vector<double>& weights() const { return weights_; }

  // Bucket-sorted L2-normalized n-gram counts of " " + lowercase(text) + " ".
  SparseVector featurize(std::string_view text) const {
    const std::string padded = " " + to_lower_ascii(text) + " ";
    std::map<std::uint32_t, double> counts;
    for (std::size_t n = min_n_; n <= max_n_; ++n) {
      if (padded.size() < n) break;
      for (std::size_t i = 0; i + n <= padded.size(); ++i) {
        auto h = fnv1a64(std::string_view(padded).substr(i, n), hash_seed_);
        counts[static_cast<std::uint32_t>(h % buckets_)] += 1.0;
      }
    }
    double sq = 0.0;
    for (const auto& [k, c] : counts) sq += c * c;
    const double norm = std::sqrt(sq);
    SparseVector out;
    out.reserve(counts.size());
    for (const auto& [k, c] : counts) out.emplace_back(k, c / norm);
    return out;
  }

  double logit(const SparseVector& features) const {
    double acc = 0.0;
    for (const auto& [k, v] : features) acc += weights_[k] * v;
    return acc + bias_;
  }

  // Probability in [0,1] that `text` is profane. Blank text scores 0.
  double score(std::string_view text) const {
    if (text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos) return 0.0;
    return 1.0 / (1.0 + std::exp(-logit(featurize(text))));
  }

  // Full-batch Adam on the mean logistic loss plus an L2 penalty.
  static ProfanityModel train(const std::vector<ProfanityExample>& corpus,
                              ProfanityTrainOptions opts = {}, std::size_t buckets = 1u << 16) {
    if (corpus.empty()) throw Error("empty profanity corpus");
    ProfanityModel model(buckets);
    std::vector<SparseVector> feats;
    feats.reserve(corpus.size());
    for (const auto& ex : corpus) feats.push_back(model.featurize(ex.text));

    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m(buckets, 0.0), v(buckets, 0.0), grad(buckets, 0.0);
    double mb = 0.0, vb = 0.0;
    const double inv_n = 1.0 / static_cast<double>(corpus.size());
    for (std::size_t step = 1; step <= opts.epochs; ++step) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double gb = 0.0;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-model.logit(feats[i])));
        const double err = (p - (corpus[i].profane ? 1.0 : 0.0)) * inv_n;
        for (const auto& [k, x] : feats[i]) grad[k] += err * x;
        gb += err;
      }
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < buckets; ++k) {
        const double g = grad[k] + opts.l2 * model.weights_[k];
        m[k] = beta1 * m[k] + (1 - beta1) * g;
        v[k] = beta2 * v[k] + (1 - beta2) * g * g;
        model.weights_[k] -= opts.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
      }
      mb = beta1 * mb + (1 - beta1) * gb;
      vb = beta2 * vb + (1 - beta2) * gb * gb;
      model.bias_ -= opts.learning_rate * (mb / c1) / (std::sqrt(vb / c2) + eps);
    }
    return model;
  }

  void write(std::ostream& out) const {
    BinaryWriter w(out);
    write_header(w, "profanity", kVersion);
    w.put<std::uint64_t>(buckets_);
    w.put<std::uint64_t>(min_n_);
    w.put<std::uint64_t>(max_n_);
    w.put<std::uint64_t>(hash_seed_);
    w.put(bias_);
    w.put(weights_);
  }

  static ProfanityModel read(std::istream& in) {
    BinaryReader r(in);
    auto version = read_header(r, "profanity");
    if (version != kVersion) throw Error("unsupported profanity model version " + std::to_string(version));
    const auto buckets = r.get<std::uint64_t>();
    const auto min_n = r.get<std::uint64_t>();
    const auto max_n = r.get<std::uint64_t>();
    const auto seed = r.get<std::uint64_t>();
    ProfanityModel model(buckets, min_n, max_n, seed);
    model.bias_ = r.get<double>();
    model.weights_ = r.get_doubles();
    if (model.weights_.size() != buckets) throw Error("profanity model: weight count mismatch");
    return model;
  }

  void save(const std::string& path) const {
    auto out = detail::open_output(path);
    write(out);
  }

  static ProfanityModel load(const std::string& path) {
    auto in = detail::open_input(path);
    return read(in);
  }

 private:
  std::size_t buckets_;
  std::size_t min_n_;
  std::size_t max_n_;
  std::uint64_t hash_seed_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

inline double profanity_score(std::string_view text, const ProfanityModel& model) {
  return model.score(text);
}

inline double user_profanity(const std::vector<std::string>& posts, const ProfanityModel& model) {
  if (posts.empty()) throw Error("no posts");
  double sum = 0.0;
  for (const auto& p : posts) sum += model.score(p);
  return sum / static_cast<double>(posts.size());
}

// ---------------------------------------------------------------------------
// Feature vector x

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> layout;

  std::size_t size() const { return values.size(); }
};

inline std::vector<std::string> feature_layout(const FeatureSet& fs) {
  std::vector<std::string> names;
  if (fs.profanity) names.emplace_back("profanity");
  if (fs.morality) {
    for (auto d : kAllDimensions) {
      names.push_back(std::string(short_name(d)) + "_avg");
      names.push_back(std::string(short_name(d)) + "_pres");
    }
  }
  return names;
}

// Per-component z-score with statistics frozen from a training set.
// Zero-variance components are only centered.
class FeatureNormalizer {
 public:
  FeatureNormalizer() = default;
  FeatureNormalizer(std::vector<double> mean, std::vector<double> stddev)
      : mean_(std::move(mean)), std_(std::move(stddev)) {
    if (mean_.size() != std_.size()) throw Error("normalizer mean/std size mismatch");
  }

  static FeatureNormalizer fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw Error("cannot fit a normalizer on no rows");
    const std::size_t dim = rows.front().size();
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (const auto& r : rows) {
      if (r.size() != dim) throw Error("ragged feature rows");
      for (std::size_t j = 0; j < dim; ++j) mean[j] += r[j];
    }
    for (auto& m : mean) m /= static_cast<double>(rows.size());
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < dim; ++j) var[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
    }
    std::vector<double> sd(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      sd[j] = std::sqrt(var[j] / static_cast<double>(rows.size()));
    }
    return FeatureNormalizer(std::move(mean), std::move(sd));
  }

  bool empty() const { return mean_.empty(); }
  std::size_t dim() const { return mean_.size(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return std_; }

  void apply(std::vector<double>& values) const {
    if (values.size() != mean_.size()) throw Error("normalizer dimension mismatch");
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double s = std_[j] > 1e-12 ? std_[j] : 1.0;
      values[j] = (values[j] - mean_[j]) / s;
    }
  }

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
};

inline FeatureVector build_feature_vector(std::optional<double> profanity,
                                          const std::optional<MoralityFeatures>& morality,
                                          const FeatureNormalizer* normalizer = nullptr) {
  if (!profanity && !morality) throw Error("no features enabled");
  FeatureVector fv;
  fv.layout = feature_layout(FeatureSet{false, profanity.has_value(), morality.has_value()});
  if (profanity) fv.values.push_back(*profanity);
  if (morality) fv.values.insert(fv.values.end(), morality->begin(), morality->end());
  if (normalizer && !normalizer->empty()) normalizer->apply(fv.values);
  return fv;
}

// ---------------------------------------------------------------------------
// Corpus analysis

struct DimensionStats {
  double avg_strength = kNeutralStrength;  // word-weighted, neutral if no match
  double pct_posts = 0.0;                  // 0..100
  std::size_t matched_words = 0;
};

struct ClassAggregate {
  std::size_t items = 0;
  std::size_t posts = 0;
  std::optional<double> avg_posts_per_user;  // user-level only
  double avg_words_per_post = 0.0;
  double avg_profanity = 0.0;
  std::array<DimensionStats, kMoralDims> morality{};
};

struct ClassStats {
  Granularity granularity = Granularity::post_level;
  std::array<ClassAggregate, 2> classes{};

  const ClassAggregate& operator[](ClassLabel l) const { return classes[label_index(l)]; }
};

namespace detail {

template <typename Fn>
void for_each_post(const Dataset& ds, Fn&& fn) {
  if (ds.granularity() == Granularity::post_level) {
    for (const auto& p : ds.posts()) fn(*p.label, p.text);
  } else {
    for (const auto& u : ds.users()) {
      for (const auto& p : u.posts) fn(u.label, p.text);
    }
  }
}

}  // namespace detail

// Items are visited in a fixed canonical order (sorted by id) so that results
// do not depend on the order the dataset was supplied in.
inline ClassStats corpus_stats(const Dataset& dataset, const ProfanityModel& model,
                               const MoralLexicon& lexicon) {
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dataset.id(a) < dataset.id(b); });
  const Dataset sorted = dataset.subset(order);

  ClassStats stats;
  stats.granularity = dataset.granularity();
  std::array<std::size_t, 2> tokens{};
  std::array<double, 2> profanity_sum{};
  std::array<std::array<double, kMoralDims>, 2> strength_sum{};
  std::array<std::array<std::size_t, kMoralDims>, 2> posts_with{};

  auto visit_post = [&](ClassLabel label, const std::string& text) {
    const auto c = label_index(label);
    const auto toks = split_words(text);
    stats.classes[c].posts++;
    tokens[c] += toks.size();
    detail::MoralTally tally;
    tally.add_tokens(toks, lexicon);
    for (std::size_t d = 0; d < kMoralDims; ++d) {
      strength_sum[c][d] += tally.strength_sum[d];
      stats.classes[c].morality[d].matched_words += tally.matches[d];
      if (tally.matches[d] > 0) posts_with[c][d]++;
    }
  };

  if (sorted.granularity() == Granularity::post_level) {
    for (const auto& p : sorted.posts()) {
      const auto c = label_index(*p.label);
      stats.classes[c].items++;
      profanity_sum[c] += model.score(p.text);
      visit_post(*p.label, p.text);
    }
  } else {
    for (const auto& u : sorted.users()) {
      const auto c = label_index(u.label);
      stats.classes[c].items++;
      std::vector<std::string> texts;
      for (const auto& p : u.posts) {
        texts.push_back(p.text);
        visit_post(u.label, p.text);
      }
      profanity_sum[c] += user_profanity(texts, model);
    }
  }

  for (auto label : kAllLabels) {
    const auto c = label_index(label);
    auto& agg = stats.classes[c];
    if (agg.items == 0) {
      throw Error("class \"" + std::string(to_string(label)) + "\" has no items");
    }
    const double n_posts = static_cast<double>(agg.posts);
    if (stats.granularity == Granularity::user_level) {
      agg.avg_posts_per_user = n_posts / static_cast<double>(agg.items);
    }
    agg.avg_words_per_post = static_cast<double>(tokens[c]) / n_posts;
    agg.avg_profanity = profanity_sum[c] / static_cast<double>(agg.items);
    for (std::size_t d = 0; d < kMoralDims; ++d) {
      auto& ds = agg.morality[d];
      ds.avg_strength = ds.matched_words == 0
                            ? kNeutralStrength
                            : strength_sum[c][d] / static_cast<double>(ds.matched_words);
      ds.pct_posts = 100.0 * static_cast<double>(posts_with[c][d]) / n_posts;
    }
  }
  return stats;
}

inline Json to_json(const ClassStats& stats) {
  Json classes = Json::object();
  for (auto label : kAllLabels) {
    const auto& agg = stats[label];
    Json morality = Json::object();
    for (auto d : kAllDimensions) {
      const auto& ds = agg.morality[static_cast<std::size_t>(d)];
      morality[std::string(to_string(d))] = {{"avg_strength", ds.avg_strength},
                                             {"pct_posts", ds.pct_posts},
                                             {"matched_words", ds.matched_words}};
    }
    Json row{{"items", agg.items},
             {"posts", agg.posts},
             {"avg_posts_per_user", agg.avg_posts_per_user ? Json(*agg.avg_posts_per_user) : Json()},
             {"avg_words_per_post", agg.avg_words_per_post},
             {"avg_profanity", agg.avg_profanity},
             {"morality", std::move(morality)}};
    classes[std::string(to_string(label))] = std::move(row);
  }
  return Json{{"granularity", std::string(to_string(stats.granularity))},
              {"classes", std::move(classes)}};
}

inline constexpr std::size_t kHistogramBins = 8;

// Matched-word counts on unit bins [1,2), [2,3), ..., [8,9]; index by class.
using MoralHistogram = std::array<std::array<std::size_t, kHistogramBins>, 2>;

inline std::size_t histogram_bin(double strength) {
  auto b = static_cast<std::size_t>(std::floor(strength)) - 1;
  return std::min(b, kHistogramBins - 1);
}

inline MoralHistogram moral_histogram(const Dataset& dataset, MoralDimension dim,
                                      const MoralLexicon& lexicon) {
  MoralHistogram hist{};
  const auto d = static_cast<std::size_t>(dim);
  detail::for_each_post(dataset, [&](ClassLabel label, const std::string& text) {
    for (const auto& t : split_words(text)) {
      const auto* e = lexicon.find(t);
      if (e && (*e)[d]) hist[label_index(label)][histogram_bin(*(*e)[d])]++;
    }
  });
  return hist;
}

inline MoralHistogram moral_histogram(const Dataset& dataset, std::string_view dimension,
                                      const MoralLexicon& lexicon) {
  return moral_histogram(dataset, parse_dimension(dimension), lexicon);
}

inline std::string histogram_csv(const MoralHistogram& hist) {
  std::string out = "class,bin_lo,bin_hi,count\n";
  for (auto label : kAllLabels) {
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      out += std::string(to_string(label)) + "," + std::to_string(b + 1) + "," +
             std::to_string(b + 2) + "," + std::to_string(hist[label_index(label)][b]) + "\n";
    }
  }
  return out;
}

}  // namespace depfuse
