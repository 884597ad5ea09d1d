#pragma once

// Dataset JSONL readers/writers and the little binary stream helpers used by
// every checkpoint format.

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "depfuse/core.hpp"
#include "json.hpp"

namespace depfuse {

using Json = nlohmann::json;

struct LoadOptions {
  // keep empty posts instead of rejecting them; they featurize as neutral items
  bool allow_empty = false;
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  return out;
}

inline std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

inline const Json& require(const Json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(line_error(line_no, std::string("missing \"") + key + "\""));
  return *it;
}

inline std::string require_string(const Json& obj, const char* key, std::size_t line_no) {
  const auto& v = require(obj, key, line_no);
  if (!v.is_string()) {
    throw Error(line_error(line_no, std::string("\"") + key + "\" must be a string"));
  }
  return v.get<std::string>();
}

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(line_error(line_no, "invalid JSON"));
    }
    if (!obj.is_object()) throw Error(line_error(line_no, "expected a JSON object"));
    fn(obj, line_no);
  }
}

}  // namespace detail

inline Dataset read_post_jsonl(std::istream& in, LoadOptions opts = {}) {
  std::vector<Post> posts;
  detail::for_each_json_line(in, [&](const Json& obj, std::size_t line_no) {
    Post p;
    p.id = detail::require_string(obj, "id", line_no);
    p.text = detail::require_string(obj, "text", line_no);
    try {
      p.label = parse_label(detail::require_string(obj, "label", line_no));
    } catch (const Error& e) {
      throw Error(detail::line_error(line_no, e.what()));
    }
    if (auto it = obj.find("ts"); it != obj.end() && it->is_number_integer()) {
      p.ts = it->get<std::int64_t>();
    }
    if (p.text.empty() && !opts.allow_empty) {
      throw Error(detail::line_error(line_no, "empty text"));
    }
    posts.push_back(std::move(p));
  });
  return Dataset::from_posts(std::move(posts));
}

inline Dataset read_user_jsonl(std::istream& in, LoadOptions opts = {}) {
  std::vector<UserBundle> users;
  detail::for_each_json_line(in, [&](const Json& obj, std::size_t line_no) {
    UserBundle u;
    u.user_id = detail::require_string(obj, "user_id", line_no);
    try {
      u.label = parse_label(detail::require_string(obj, "label", line_no));
    } catch (const Error& e) {
      throw Error(detail::line_error(line_no, e.what()));
    }
    const auto& posts = detail::require(obj, "posts", line_no);
    if (!posts.is_array()) throw Error(detail::line_error(line_no, "\"posts\" must be an array"));
    if (posts.empty()) throw Error(detail::line_error(line_no, "user has no posts"));
    for (std::size_t j = 0; j < posts.size(); ++j) {
      const auto& jp = posts[j];
      if (!jp.is_object()) throw Error(detail::line_error(line_no, "post entries must be objects"));
      Post p;
      p.id = u.user_id + "#" + std::to_string(j);
      p.text = detail::require_string(jp, "text", line_no);
      if (auto it = jp.find("ts"); it != jp.end() && !it->is_null()) {
        if (!it->is_number_integer()) {
          throw Error(detail::line_error(line_no, "\"ts\" must be an integer"));
        }
        p.ts = it->get<std::int64_t>();
      }
      if (p.text.empty() && !opts.allow_empty) {
        throw Error(detail::line_error(line_no, "empty text in post " + std::to_string(j)));
      }
      u.posts.push_back(std::move(p));
    }
    users.push_back(std::move(u));
  });
  return Dataset::from_users(std::move(users));
}

inline Dataset load_post_jsonl(const std::string& path, LoadOptions opts = {}) {
  auto in = detail::open_input(path);
  return read_post_jsonl(in, opts);
}

inline Dataset load_user_jsonl(const std::string& path, LoadOptions opts = {}) {
  auto in = detail::open_input(path);
  return read_user_jsonl(in, opts);
}

// Peeks at the first non-blank line to tell the two layouts apart.
inline Granularity sniff_granularity(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto obj = Json::parse(line);
      if (obj.is_object() && obj.contains("user_id")) return Granularity::user_level;
      return Granularity::post_level;
    } catch (const Json::parse_error&) {
      throw Error("line 1: invalid JSON");
    }
  }
  return Granularity::post_level;
}

inline Dataset load_dataset(const std::string& path, std::optional<Granularity> g = {},
                            LoadOptions opts = {}) {
  auto gran = g ? *g : sniff_granularity(path);
  return gran == Granularity::post_level ? load_post_jsonl(path, opts)
                                         : load_user_jsonl(path, opts);
}

inline void write_jsonl(std::ostream& out, const Dataset& dataset) {
  if (dataset.granularity() == Granularity::post_level) {
    for (const auto& p : dataset.posts()) {
      Json obj{{"id", p.id}, {"text", p.text}, {"label", std::string(to_string(*p.label))}};
      if (p.ts) obj["ts"] = *p.ts;
      out << obj.dump() << '\n';
    }
    return;
  }
  for (const auto& u : dataset.users()) {
    Json posts = Json::array();
    for (const auto& p : u.posts) {
      Json jp{{"text", p.text}};
      if (p.ts) jp["ts"] = *p.ts;
      posts.push_back(std::move(jp));
    }
    Json obj{{"user_id", u.user_id}, {"label", std::string(to_string(u.label))},
             {"posts", std::move(posts)}};
    out << obj.dump() << '\n';
  }
}

inline void save_jsonl(const std::string& path, const Dataset& dataset) {
  auto out = detail::open_output(path);
  write_jsonl(out, dataset);
}

inline Json to_json(const ValidationReport& r) {
  return Json{{"ok", r.ok()},
              {"counts", {{"control", r.counts[0]}, {"depressed", r.counts[1]}}},
              {"empty_text", r.empty_text_ids},
              {"duplicate_ids", r.duplicate_ids}};
}

// Host-endian binary streams. Checkpoints are meant to be read back on the
// machine family that wrote them.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  void put(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void put(const Eigen::MatrixXd& m) {
    put<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
    out_.write(reinterpret_cast<const char*>(m.data()),
               static_cast<std::streamsize>(sizeof(double) * m.size()));
  }

  void put(const Eigen::VectorXd& v) { put(Eigen::MatrixXd(v)); }

  void put(const std::vector<double>& v) {
    put<std::uint64_t>(v.size());
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(sizeof(double) * v.size()));
  }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    T value{};
    read(&value, sizeof(T));
    return value;
  }

  std::string get_string() {
    auto n = get<std::uint64_t>();
    check_size(n);
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  Eigen::MatrixXd get_matrix() {
    auto rows = get<std::uint64_t>();
    auto cols = get<std::uint64_t>();
    check_size(rows * cols);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    read(m.data(), sizeof(double) * rows * cols);
    return m;
  }

  Eigen::VectorXd get_vector() {
    auto m = get_matrix();
    if (m.cols() != 1 && m.size() != 0) throw Error("checkpoint: expected a column vector");
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(m.data(), m.rows()));
  }

  std::vector<double> get_doubles() {
    auto n = get<std::uint64_t>();
    check_size(n);
    std::vector<double> v(n);
    read(v.data(), sizeof(double) * n);
    return v;
  }

  void expect_tag(const std::string& tag) {
    auto got = get_string();
    if (got != tag) throw Error("checkpoint: expected section \"" + tag + "\", found \"" + got + "\"");
  }

 private:
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw Error("checkpoint: truncated file");
  }

  static void check_size(std::uint64_t n) {
    if (n > (std::uint64_t{1} << 34)) throw Error("checkpoint: implausible size field");
  }

  std::istream& in_;
};

inline constexpr char kMagic[] = "DEPFUSE";

inline void write_header(BinaryWriter& w, const std::string& kind, std::uint32_t version) {
  w.put(std::string(kMagic));
  w.put(kind);
  w.put<std::uint32_t>(version);
}

inline std::uint32_t read_header(BinaryReader& r, const std::string& kind) {
  std::string magic;
  try {
    magic = r.get_string();
  } catch (const Error&) {
    throw Error("not a depfuse checkpoint");
  }
  if (magic != kMagic) throw Error("not a depfuse checkpoint");
  auto got = r.get_string();
  if (got != kind) throw Error("checkpoint holds a " + got + ", expected " + kind);
  return r.get<std::uint32_t>();
}

}  // namespace depfuse
