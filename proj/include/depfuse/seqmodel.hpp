#pragma once

// Second level and fusion: a BiGRU per branch, additive attention pooling,
// a sigmoid gate that lets the emotion branch mask the encoder branch, late
// concatenation of hand-crafted features, and an affine softmax head.
//
// Gradients are written out by hand; every stage keeps a trace of the
// intermediates its backward pass needs.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "depfuse/core.hpp"
#include "depfuse/encoder.hpp"
#include "depfuse/io.hpp"
#include "depfuse/lexfeat.hpp"
#include "depfuse/nn.hpp"
#include "depfuse/text.hpp"

namespace depfuse {

using nn::Matrix;
using nn::Vector;

// ---------------------------------------------------------------------------
// GRU (one direction). Gate rows are ordered [reset; update; candidate]:
//   r = sig(Wx_r x + bx_r + Wh_r h + bh_r)
//   u = sig(Wx_u x + bx_u + Wh_u h + bh_u)
//   n = tanh(Wx_n x + bx_n + r * (Wh_n h + bh_n))
//   h' = (1 - u) * n + u * h,     h_0 = 0

class Gru {
 public:
  struct Trace {
    Matrix x;       // input_dim x T
    Matrix h;       // hidden x T, in time order of processing positions
    Matrix r, u, n; // hidden x T
    Matrix hn;      // Wh_n h_prev + bh_n, hidden x T
    bool reverse = false;
  };

  Gru() = default;
  Gru(const std::string& prefix, std::size_t input_dim, std::size_t hidden)
      : wx(prefix + ".wx", 3 * static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(input_dim)),
        wh(prefix + ".wh", 3 * static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(hidden)),
        bx(prefix + ".bx", 3 * static_cast<Eigen::Index>(hidden), 1),
        bh(prefix + ".bh", 3 * static_cast<Eigen::Index>(hidden), 1) {}

  void init(Rng& rng) {
    const double k = 1.0 / std::sqrt(static_cast<double>(hidden()));
    for (auto* p : {&wx, &wh, &bx, &bh}) nn::uniform_fill(*p, rng, k);
  }

  Eigen::Index hidden() const { return wh.cols(); }
  Eigen::Index input_dim() const { return wx.cols(); }
  nn::ParamList params() { return {&wx, &wh, &bx, &bh}; }

  // States are stored at the position they belong to, so reverse-direction
  // column i is the state after reading positions T-1 .. i.
  Trace forward(const Matrix& x, bool reverse) const {
    if (x.rows() != input_dim()) {
      throw Error("GRU input dim " + std::to_string(x.rows()) + " != " + std::to_string(input_dim()));
    }
    const Eigen::Index H = hidden(), T = x.cols();
    Trace tr;
    tr.x = x;
    tr.reverse = reverse;
    tr.h.resize(H, T);
    tr.r.resize(H, T);
    tr.u.resize(H, T);
    tr.n.resize(H, T);
    tr.hn.resize(H, T);
    const Matrix gx = (wx.value * x).colwise() + bx.value.col(0);
    Vector h = Vector::Zero(H);
    for (Eigen::Index s = 0; s < T; ++s) {
      const Eigen::Index t = reverse ? T - 1 - s : s;
      const Vector gh = wh.value * h + bh.value.col(0);
      const Vector r = nn::sigmoid(gx.col(t).segment(0, H) + gh.segment(0, H));
      const Vector u = nn::sigmoid(gx.col(t).segment(H, H) + gh.segment(H, H));
      const Vector hn = gh.segment(2 * H, H);
      const Vector n = (gx.col(t).segment(2 * H, H) + r.cwiseProduct(hn)).array().tanh().matrix();
      h = (1.0 - u.array()).matrix().cwiseProduct(n) + u.cwiseProduct(h);
      tr.r.col(t) = r;
      tr.u.col(t) = u;
      tr.n.col(t) = n;
      tr.hn.col(t) = hn;
      tr.h.col(t) = h;
    }
    return tr;
  }

  // dh: gradient w.r.t. every output state. Returns d(input) when requested.
  Matrix backward(const Trace& tr, const Matrix& dh, bool want_input_grad) {
    const Eigen::Index H = hidden(), T = tr.x.cols();
    Matrix dgx(3 * H, T);
    Vector carry = Vector::Zero(H);
    for (Eigen::Index s = T - 1; s >= 0; --s) {
      const Eigen::Index t = tr.reverse ? T - 1 - s : s;
      const Eigen::Index prev = tr.reverse ? t + 1 : t - 1;
      const bool has_prev = s > 0;
      const Vector h_prev = has_prev ? Vector(tr.h.col(prev)) : Vector::Zero(H);
      const Vector dht = dh.col(t) + carry;
      const auto r = tr.r.col(t).array();
      const auto u = tr.u.col(t).array();
      const auto n = tr.n.col(t).array();
      const Vector dn_pre = (dht.array() * (1.0 - u) * (1.0 - n * n)).matrix();
      const Vector du_pre = (dht.array() * (h_prev.array() - n) * u * (1.0 - u)).matrix();
      const Vector dr_pre = (dn_pre.array() * tr.hn.col(t).array() * r * (1.0 - r)).matrix();
      Vector dgh(3 * H);
      dgh << dr_pre, du_pre, (dn_pre.array() * r).matrix();
      dgx.col(t) << dr_pre, du_pre, dn_pre;
      wh.grad += dgh * h_prev.transpose();
      bh.grad += dgh;
      carry = (dht.array() * u).matrix() + wh.value.transpose() * dgh;
    }
    wx.grad += dgx * tr.x.transpose();
    bx.grad += dgx.rowwise().sum();
    if (!want_input_grad) return {};
    return wx.value.transpose() * dgx;
  }

  nn::Param wx, wh, bx, bh;
};

struct BranchStates {
  Matrix forward;   // hidden x T
  Matrix backward;  // hidden x T

  // c_i = forward_i || backward_i, one column per position
  Matrix concat() const {
    Matrix c(forward.rows() + backward.rows(), forward.cols());
    c << forward, backward;
    return c;
  }
  std::size_t length() const { return static_cast<std::size_t>(forward.cols()); }
};

class BiGru {
 public:
  struct Trace {
    Gru::Trace fwd, bwd;
  };

  BiGru() = default;
  BiGru(const std::string& prefix, std::size_t input_dim, std::size_t hidden)
      : fwd(prefix + ".fwd", input_dim, hidden), bwd(prefix + ".bwd", input_dim, hidden) {}

  void init(Rng& rng) {
    fwd.init(rng);
    bwd.init(rng);
  }

  nn::ParamList params() {
    auto a = fwd.params();
    auto b = bwd.params();
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }

  Eigen::Index hidden() const { return fwd.hidden(); }

  Trace run(const Matrix& x) const {
    if (x.cols() == 0) throw Error("BiGRU needs at least one position");
    return {fwd.forward(x, false), bwd.forward(x, true)};
  }

  static BranchStates states(const Trace& tr) { return {tr.fwd.h, tr.bwd.h}; }

  // dc: gradient w.r.t. the concatenated states (2H x T).
  Matrix backward(const Trace& tr, const Matrix& dc, bool want_input_grad) {
    const Eigen::Index H = hidden();
    Matrix dx1 = fwd.backward(tr.fwd, dc.topRows(H), want_input_grad);
    Matrix dx2 = bwd.backward(tr.bwd, dc.bottomRows(H), want_input_grad);
    if (!want_input_grad) return {};
    return dx1 + dx2;
  }

  Gru fwd, bwd;
};

inline BranchStates bigru_forward(const EncodedSequence& sequence, const BiGru& params) {
  return BiGru::states(params.run(sequence.vectors));
}

// ---------------------------------------------------------------------------
// Attention pooling: q_i = tanh(W c_i + b), s_i = v . q_i, alpha = softmax(s).
// Output is sum_i alpha_i c_i, or sum_i alpha_i q_i with sum_projected.

class Attention {
 public:
  struct Trace {
    Matrix states;  // d x T
    Matrix q;       // d x T
    Vector alpha;   // T
    Vector out;     // d
  };

  Attention() = default;
  Attention(const std::string& prefix, std::size_t dim, bool sum_projected)
      : w(prefix + ".w", static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)),
        b(prefix + ".b", static_cast<Eigen::Index>(dim), 1),
        v(prefix + ".v", static_cast<Eigen::Index>(dim), 1),
        sum_projected_(sum_projected) {}

  void init(Rng& rng) {
    nn::glorot(w, rng);
    nn::glorot(v, rng);
  }

  nn::ParamList params() { return {&w, &b, &v}; }
  bool sum_projected() const { return sum_projected_; }

  Trace run(const Matrix& states) const {
    if (states.cols() == 0) throw Error("attention needs at least one state");
    if (states.rows() != w.cols()) throw Error("attention state dim mismatch");
    Trace tr;
    tr.states = states;
    tr.q = ((w.value * states).colwise() + b.value.col(0)).array().tanh().matrix();
    const Vector scores = tr.q.transpose() * v.value.col(0);
    tr.alpha = nn::softmax(scores);
    tr.out = (sum_projected_ ? tr.q : tr.states) * tr.alpha;
    return tr;
  }

  Matrix backward(const Trace& tr, const Vector& dout) {
    const Matrix& pooled = sum_projected_ ? tr.q : tr.states;
    const Vector dalpha = pooled.transpose() * dout;
    const double mean = tr.alpha.dot(dalpha);
    const Vector dscore = tr.alpha.cwiseProduct((dalpha.array() - mean).matrix());
    Matrix dq = v.value.col(0) * dscore.transpose();
    Matrix dstates;
    if (sum_projected_) {
      dq += dout * tr.alpha.transpose();
      dstates = Matrix::Zero(tr.states.rows(), tr.states.cols());
    } else {
      dstates = dout * tr.alpha.transpose();
    }
    v.grad.col(0) += tr.q * dscore;
    const Matrix dpre = dq.cwiseProduct((1.0 - tr.q.array().square()).matrix());
    w.grad += dpre * tr.states.transpose();
    b.grad.col(0) += dpre.rowwise().sum();
    dstates += w.value.transpose() * dpre;
    return dstates;
  }

  nn::Param w, b, v;

 private:
  bool sum_projected_ = false;
};

struct PooledState {
  Vector vector;
  Vector alpha;
};

inline PooledState attentive_pool(const Matrix& states, const Attention& attn) {
  auto tr = attn.run(states);
  return {tr.out, tr.alpha};
}

// ---------------------------------------------------------------------------
// z = c * sigmoid(W e + b)

class Gate {
 public:
  Gate() = default;
  Gate(const std::string& prefix, std::size_t c_dim, std::size_t e_dim)
      : w(prefix + ".w", static_cast<Eigen::Index>(c_dim), static_cast<Eigen::Index>(e_dim)),
        b(prefix + ".b", static_cast<Eigen::Index>(c_dim), 1) {}

  void init(Rng& rng) { nn::glorot(w, rng); }
  nn::ParamList params() { return {&w, &b}; }

  nn::Param w, b;
};

inline Vector gate_mask(const Vector& e, const Gate& gate) {
  if (e.size() != gate.w.cols()) throw Error("gate: emotion vector dim mismatch");
  return nn::sigmoid(gate.w.value * e + gate.b.value.col(0));
}

inline Vector gated_fusion(const Vector& c, const Vector& e, const Gate& gate) {
  if (c.size() != gate.w.rows()) throw Error("gate: encoder vector dim mismatch");
  return c.cwiseProduct(gate_mask(e, gate));
}

// p = x || z, x first. An empty x gives p = z.
inline Vector late_concat(const std::vector<double>& x, const Vector& z) {
  Vector p(static_cast<Eigen::Index>(x.size()) + z.size());
  for (std::size_t i = 0; i < x.size(); ++i) p(static_cast<Eigen::Index>(i)) = x[i];
  p.tail(z.size()) = z;
  return p;
}

inline Vector late_concat(const FeatureVector& x, const Vector& z) { return late_concat(x.values, z); }

class ClassifierHead {
 public:
  ClassifierHead() = default;
  ClassifierHead(const std::string& prefix, std::size_t input_dim)
      : w(prefix + ".w", 2, static_cast<Eigen::Index>(input_dim)), b(prefix + ".b", 2, 1) {}

  void init(Rng& rng) { nn::glorot(w, rng); }
  nn::ParamList params() { return {&w, &b}; }
  Eigen::Index input_dim() const { return w.cols(); }

  Vector logits(const Vector& p) const {
    if (p.size() != w.cols()) {
      throw Error("classifier input dim " + std::to_string(p.size()) + " != " + std::to_string(w.cols()));
    }
    return w.value * p + b.value.col(0);
  }

  nn::Param w, b;
};

// (P(control), P(depressed))
inline Vector classify(const Vector& p, const ClassifierHead& head) {
  return nn::softmax(head.logits(p));
}

inline ClassLabel predicted_label(const Vector& probs) {
  return probs(1) > probs(0) ? ClassLabel::depressed : ClassLabel::control;
}

// ---------------------------------------------------------------------------
// Whole model

// Per-item inputs after first-level featurization. Columns are words
// (post-level) or posts (user-level).
struct ModelInput {
  Matrix encoder;            // encoder_dim x T
  Matrix emotion;            // emotion_dim x T, empty when the branch is off
  std::vector<double> x;     // hand-crafted features, possibly empty
};

class DepressionModel {
 public:
  static constexpr std::uint32_t kVersion = 1;

  struct Trace {
    Matrix enc_in, emo_in;  // after dropout
    BiGru::Trace enc_gru, emo_gru;
    Attention::Trace enc_attn, emo_attn;
    Vector gate;            // empty when the gate is bypassed
    Vector z;
    Vector p;               // after dropout
    Vector p_mask;
    Vector probs;
  };

  DepressionModel() = default;

  explicit DepressionModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const auto H = cfg_.hidden_size, C = 2 * H;
    enc_gru_ = BiGru("enc.gru", cfg_.encoder_dim, H);
    enc_attn_ = Attention("enc.attn", C, cfg_.attention_sum_projected);
    emo_gru_ = BiGru("emo.gru", cfg_.emotion_dim, H);
    emo_attn_ = Attention("emo.attn", C, cfg_.attention_sum_projected);
    gate_ = Gate("gate", C, C);
    head_ = ClassifierHead("head", cfg_.features.handcrafted_dim() + C);
    // Fixed draw order, head last, so variants sharing a seed share every
    // branch weight they have in common.
    Rng rng(cfg_.seed);
    enc_gru_.init(rng);
    enc_attn_.init(rng);
    emo_gru_.init(rng);
    emo_attn_.init(rng);
    gate_.init(rng);
    head_.init(rng);
  }

  const ModelConfig& config() const { return cfg_; }
  const FeatureSet& features() const { return cfg_.features; }
  bool uses_emotion() const { return cfg_.features.emotion; }

  nn::ParamList params() {
    nn::ParamList out = enc_gru_.params();
    append(out, enc_attn_.params());
    if (uses_emotion()) {
      append(out, emo_gru_.params());
      append(out, emo_attn_.params());
      append(out, gate_.params());
    }
    append(out, head_.params());
    return out;
  }

  const BiGru& encoder_gru() const { return enc_gru_; }
  const BiGru& emotion_gru() const { return emo_gru_; }
  const Attention& encoder_attention() const { return enc_attn_; }
  const Attention& emotion_attention() const { return emo_attn_; }
  const Gate& gate() const { return gate_; }
  const ClassifierHead& head() const { return head_; }
  BiGru& encoder_gru() { return enc_gru_; }
  BiGru& emotion_gru() { return emo_gru_; }
  Attention& encoder_attention() { return enc_attn_; }
  Attention& emotion_attention() { return emo_attn_; }
  Gate& gate() { return gate_; }
  ClassifierHead& head() { return head_; }

  void check_input(const ModelInput& in) const {
    if (in.encoder.cols() == 0) throw Error("model input has no positions");
    if (static_cast<std::size_t>(in.encoder.rows()) != cfg_.encoder_dim) {
      throw Error("encoder input dim " + std::to_string(in.encoder.rows()) + " != " +
                  std::to_string(cfg_.encoder_dim));
    }
    if (uses_emotion()) {
      if (static_cast<std::size_t>(in.emotion.rows()) != cfg_.emotion_dim) {
        throw Error("emotion input dim " + std::to_string(in.emotion.rows()) + " != " +
                    std::to_string(cfg_.emotion_dim));
      }
      if (in.emotion.cols() != in.encoder.cols()) throw Error("branch lengths differ");
    }
    if (in.x.size() != cfg_.features.handcrafted_dim()) {
      throw Error("feature vector length " + std::to_string(in.x.size()) + " != " +
                  std::to_string(cfg_.features.handcrafted_dim()));
    }
  }

  // With dropout_rng == nullptr this is the deterministic inference pass.
  Trace run(const ModelInput& in, Rng* dropout_rng = nullptr) const {
    check_input(in);
    Trace tr;
    const bool drop = dropout_rng != nullptr && cfg_.dropout > 0.0;
    tr.enc_in = in.encoder;
    if (drop) tr.enc_in.array() *= nn::dropout_mask(in.encoder.rows(), in.encoder.cols(), cfg_.dropout, *dropout_rng).array();
    tr.enc_gru = enc_gru_.run(tr.enc_in);
    tr.enc_attn = enc_attn_.run(BiGru::states(tr.enc_gru).concat());
    if (uses_emotion()) {
      tr.emo_in = in.emotion;
      if (drop) tr.emo_in.array() *= nn::dropout_mask(in.emotion.rows(), in.emotion.cols(), cfg_.dropout, *dropout_rng).array();
      tr.emo_gru = emo_gru_.run(tr.emo_in);
      tr.emo_attn = emo_attn_.run(BiGru::states(tr.emo_gru).concat());
      tr.gate = gate_mask(tr.emo_attn.out, gate_);
      tr.z = tr.enc_attn.out.cwiseProduct(tr.gate);
    } else {
      tr.z = tr.enc_attn.out;
    }
    tr.p = late_concat(in.x, tr.z);
    if (drop) {
      tr.p_mask = nn::dropout_mask(tr.p.size(), 1, cfg_.dropout, *dropout_rng).col(0);
      tr.p = tr.p.cwiseProduct(tr.p_mask);
    }
    tr.probs = classify(tr.p, head_);
    return tr;
  }

  Vector predict(const ModelInput& in) const { return run(in).probs; }

  // Accumulates parameter gradients given d(loss)/d(logits).
  void backward(const Trace& tr, const Vector& d_logits) {
    head_.w.grad += d_logits * tr.p.transpose();
    head_.b.grad.col(0) += d_logits;
    Vector dp = head_.w.value.transpose() * d_logits;
    if (tr.p_mask.size() > 0) dp = dp.cwiseProduct(tr.p_mask);
    const Vector dz = dp.tail(tr.z.size());
    Vector dc;
    if (uses_emotion()) {
      const Vector& c = tr.enc_attn.out;
      dc = dz.cwiseProduct(tr.gate);
      const Vector dpre = dz.cwiseProduct(c).cwiseProduct(tr.gate.cwiseProduct((1.0 - tr.gate.array()).matrix()));
      gate_.w.grad += dpre * tr.emo_attn.out.transpose();
      gate_.b.grad.col(0) += dpre;
      const Vector de = gate_.w.value.transpose() * dpre;
      const Matrix dE = emo_attn_.backward(tr.emo_attn, de);
      emo_gru_.backward(tr.emo_gru, dE, false);
    } else {
      dc = dz;
    }
    const Matrix dC = enc_attn_.backward(tr.enc_attn, dc);
    enc_gru_.backward(tr.enc_gru, dC, false);
  }

  void write(BinaryWriter& w) const {
    write_header(w, "model", kVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(cfg_.granularity));
    w.put<std::uint64_t>(cfg_.hidden_size);
    w.put(cfg_.dropout);
    w.put<std::uint64_t>(cfg_.max_words);
    w.put<std::uint64_t>(cfg_.encoder_dim);
    w.put<std::uint64_t>(cfg_.emotion_dim);
    w.put(cfg_.features.to_list());
    w.put(cfg_.class_weights.control);
    w.put(cfg_.class_weights.depressed);
    w.put<std::uint8_t>(cfg_.attention_sum_projected ? 1 : 0);
    w.put<std::uint8_t>(cfg_.normalize_features ? 1 : 0);
    w.put<std::uint64_t>(cfg_.seed);
    const auto layout = feature_layout(cfg_.features);
    w.put<std::uint64_t>(layout.size());
    for (const auto& name : layout) w.put(name);
    nn::write_params(w, const_cast<DepressionModel*>(this)->params());
  }

  static DepressionModel read(BinaryReader& r) {
    const auto version = read_header(r, "model");
    if (version != kVersion) throw Error("unsupported model version " + std::to_string(version));
    ModelConfig cfg;
    cfg.granularity = static_cast<Granularity>(r.get<std::uint8_t>());
    cfg.hidden_size = r.get<std::uint64_t>();
    cfg.dropout = r.get<double>();
    cfg.max_words = r.get<std::uint64_t>();
    cfg.encoder_dim = r.get<std::uint64_t>();
    cfg.emotion_dim = r.get<std::uint64_t>();
    cfg.features = FeatureSet::parse(r.get_string());
    cfg.class_weights.control = r.get<double>();
    cfg.class_weights.depressed = r.get<double>();
    cfg.attention_sum_projected = r.get<std::uint8_t>() != 0;
    cfg.normalize_features = r.get<std::uint8_t>() != 0;
    cfg.seed = r.get<std::uint64_t>();
    std::vector<std::string> layout(r.get<std::uint64_t>());
    for (auto& name : layout) name = r.get_string();
    if (layout != feature_layout(cfg.features)) throw Error("checkpoint feature layout is inconsistent");
    DepressionModel m(cfg);
    nn::read_params(r, m.params());
    return m;
  }

 private:
  static void append(nn::ParamList& a, const nn::ParamList& b) { a.insert(a.end(), b.begin(), b.end()); }

  ModelConfig cfg_;
  BiGru enc_gru_, emo_gru_;
  Attention enc_attn_, emo_attn_;
  Gate gate_;
  ClassifierHead head_;
};

// Class probabilities for one item. `feature_set` must match the one the
// model was built with.
inline Vector forward(const ModelInput& input, const DepressionModel& model, const FeatureSet& feature_set) {
  if (!(feature_set == model.features())) {
    throw Error("feature set " + feature_set.variant_name() + " does not match model (" +
                model.features().variant_name() + ")");
  }
  return model.predict(input);
}

// Encoder branch straight into the head, with no gate or concatenation
// stage at all. Only valid for the baseline variant.
inline Vector forward_without_fusion(const ModelInput& input, const DepressionModel& model) {
  if (!model.features().empty()) throw Error("fusion-free pipeline needs the empty feature set");
  const Matrix states = bigru_forward(EncodedSequence{input.encoder}, model.encoder_gru()).concat();
  const Vector c = attentive_pool(states, model.encoder_attention()).vector;
  return classify(c, model.head());
}

}  // namespace depfuse
