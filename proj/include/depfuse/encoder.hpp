#pragma once

// Word-level semantic encoder. Two backends share one contract: a seeded
// hash-table encoder for desk-scale work, and an adapter over pretrained
// subword-piece vectors that averages the pieces of each word.

#include <Eigen/Dense>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/io.hpp"
#include "depfuse/text.hpp"

namespace depfuse {

// One column per position (word, or post in user-level mode).
struct EncodedSequence {
  Eigen::MatrixXd vectors;

  std::size_t length() const { return static_cast<std::size_t>(vectors.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.rows()); }
};

enum class EncoderKind : std::uint8_t { toy_hash = 0, pretrained_adapter = 1 };

inline std::string_view to_string(EncoderKind k) {
  return k == EncoderKind::toy_hash ? "toy" : "pretrained";
}

inline EncoderKind parse_encoder_kind(std::string_view s) {
  if (s == "toy" || s == "toy_hash") return EncoderKind::toy_hash;
  if (s == "pretrained" || s == "pretrained_adapter") return EncoderKind::pretrained_adapter;
  throw Error("unknown encoder kind \"" + std::string(s) + "\"");
}

struct EncoderConfig {
  EncoderKind kind = EncoderKind::toy_hash;
  std::size_t dim = 64;
  std::uint64_t seed = 7;
  std::size_t buckets = 4096;
  std::string model_name;  // pretrained only

  bool operator==(const EncoderConfig&) const = default;
};

// Resolution order: $DEPFUSE_CACHE, then $HOME/.cache/depfuse.
inline std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("DEPFUSE_CACHE"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".cache" / "depfuse";
  }
  return ".depfuse_cache";
}

// Read-only after construction, so a single instance may serve concurrent
// encode calls.
class Encoder {
 public:
  static Encoder toy(std::size_t dim, std::uint64_t seed, std::size_t buckets = 4096) {
    if (dim == 0 || buckets == 0) throw Error("toy encoder needs positive dim and buckets");
    Encoder e;
    e.config_ = EncoderConfig{EncoderKind::toy_hash, dim, seed, buckets, {}};
    e.table_.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(buckets));
    Rng rng(seed);
    for (Eigen::Index b = 0; b < e.table_.cols(); ++b) {
      for (Eigen::Index j = 0; j < e.table_.rows(); ++j) e.table_(j, b) = rng.uniform(-1.0, 1.0);
    }
    return e;
  }

  // Text format: one piece per line, `piece v_1 ... v_dim`. Continuation
  // pieces carry the "##" prefix; an "[UNK]" row is used for unmatched spans.
  static Encoder pretrained(std::istream& vectors, std::string model_name) {
    Encoder e;
    e.config_.kind = EncoderKind::pretrained_adapter;
    e.config_.model_name = std::move(model_name);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(vectors, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string piece;
      ss >> piece;
      std::vector<double> row;
      double x;
      while (ss >> x) row.push_back(x);
      if (row.empty()) throw Error("piece vectors line " + std::to_string(line_no) + ": no values");
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw Error("piece vectors line " + std::to_string(line_no) + ": dimension mismatch");
      }
      e.pieces_.emplace(piece, rows.size());
      e.max_piece_ = std::max(e.max_piece_, piece.size());
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("piece vector file is empty");
    e.config_.dim = rows.front().size();
    e.table_.resize(static_cast<Eigen::Index>(e.config_.dim), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        e.table_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rows[i][j];
      }
    }
    return e;
  }

  // Looks up <cache>/<model_name>/vectors.txt.
  static Encoder pretrained(const std::string& model_name) {
    const auto path = cache_dir() / model_name / "vectors.txt";
    std::ifstream in(path);
    if (!in) throw Error("pretrained encoder \"" + model_name + "\" not found at " + path.string());
    return pretrained(in, model_name);
  }

  static Encoder from_config(const EncoderConfig& cfg) {
    if (cfg.kind == EncoderKind::toy_hash) return toy(cfg.dim, cfg.seed, cfg.buckets);
    auto e = pretrained(cfg.model_name);
    if (e.dim() != cfg.dim) {
      throw Error("pretrained encoder dim " + std::to_string(e.dim()) + " != configured " +
                  std::to_string(cfg.dim));
    }
    return e;
  }

  EncoderKind kind() const { return config_.kind; }
  std::size_t dim() const { return config_.dim; }
  // Neither backend looks at neighbouring words.
  bool contextual() const { return false; }
  const EncoderConfig& config() const { return config_; }

  std::size_t toy_row(const std::string& token) const {
    return static_cast<std::size_t>(fnv1a64(token, config_.seed) % config_.buckets);
  }

  const Eigen::MatrixXd& table() const { return table_; }

  Eigen::VectorXd encode_word(const std::string& token) const {
    if (config_.kind == EncoderKind::toy_hash) {
      return table_.col(static_cast<Eigen::Index>(toy_row(token)));
    }
    const auto pieces = wordpiece(token);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config_.dim));
    std::size_t used = 0;
    for (auto idx : pieces) {
      acc += table_.col(static_cast<Eigen::Index>(idx));
      ++used;
    }
    return used == 0 ? acc : Eigen::VectorXd(acc / static_cast<double>(used));
  }

  // Greedy longest-match-first segmentation into piece indices.
  std::vector<std::size_t> wordpiece(const std::string& word) const {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start < word.size()) {
      std::size_t end = std::min(word.size(), start + max_piece_);
      bool found = false;
      for (; end > start; --end) {
        std::string piece = word.substr(start, end - start);
        if (start > 0) piece = "##" + piece;
        if (auto it = pieces_.find(piece); it != pieces_.end()) {
          out.push_back(it->second);
          found = true;
          break;
        }
      }
      if (!found) {
        if (auto it = pieces_.find("[UNK]"); it != pieces_.end()) out.push_back(it->second);
        return out;
      }
      start = end;
    }
    return out;
  }

 private:
  Encoder() = default;

  EncoderConfig config_;
  Eigen::MatrixXd table_;
  std::unordered_map<std::string, std::size_t> pieces_;
  std::size_t max_piece_ = 0;
};

inline EncodedSequence encode_words(const std::vector<std::string>& tokens, const Encoder& encoder) {
  if (tokens.empty()) throw Error("cannot encode an empty token sequence");
  EncodedSequence seq;
  seq.vectors.resize(static_cast<Eigen::Index>(encoder.dim()), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto v = encoder.encode_word(tokens[i]);
    if (static_cast<std::size_t>(v.size()) != encoder.dim()) throw Error("encoder produced wrong dim");
    seq.vectors.col(static_cast<Eigen::Index>(i)) = v;
  }
  return seq;
}

inline EncodedSequence encode_words(const std::vector<std::string>& tokens, const Encoder& encoder,
                                    std::size_t expected_dim) {
  if (encoder.dim() != expected_dim) {
    throw Error("encoder dim " + std::to_string(encoder.dim()) + " != expected " +
                std::to_string(expected_dim));
  }
  return encode_words(tokens, encoder);
}

// Mean over positions.
inline Eigen::VectorXd pool_post(const EncodedSequence& encoded) {
  if (encoded.length() == 0) throw Error("cannot pool an empty sequence");
  return encoded.vectors.rowwise().mean();
}

}  // namespace depfuse
