#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "depfuse/core.hpp"

namespace depfuse {

inline constexpr std::size_t kNoTruncation = std::numeric_limits<std::size_t>::max();

namespace detail {

// ASCII letters/digits and every non-ASCII byte belong to words, so UTF-8
// sequences are never split.
inline bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

inline bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace detail

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = detail::ascii_lower(c);
  return out;
}

// Lowercased word tokens; every punctuation byte becomes its own token.
// Returns at most max_words tokens, preserving prefix order. An empty result
// is allowed here; tokenize() is the checked entry point.
inline std::vector<std::string> split_words(std::string_view text,
                                            std::size_t max_words = kNoTruncation) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size() && tokens.size() < max_words) {
    auto c = static_cast<unsigned char>(text[i]);
    if (detail::is_space_byte(c)) {
      ++i;
    } else if (detail::is_word_byte(c)) {
      std::size_t j = i;
      while (j < text.size() && detail::is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
      tokens.push_back(to_lower_ascii(text.substr(i, j - i)));
      i = j;
    } else {
      tokens.emplace_back(1, static_cast<char>(c));
      ++i;
    }
  }
  return tokens;
}

inline std::vector<std::string> tokenize(std::string_view text, std::size_t max_words) {
  if (max_words == 0) throw Error("max_words must be positive");
  auto tokens = split_words(text, max_words);
  if (tokens.empty()) throw Error("cannot tokenize empty text");
  return tokens;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0) {
  std::uint64_t h = 14695981039346656037ull ^ (seed * 0x9E3779B97F4A7C15ull);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// mt19937_64 is fully specified by the standard; the distributions below are
// written out so that draws are reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  std::size_t index(std::size_t n) {
    if (n == 0) throw Error("Rng::index on empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace depfuse
