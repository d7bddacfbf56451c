// Copyright 2026 The Supercell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "supercell/core.hpp"
#include "supercell/error.hpp"
#include "supercell/learner/config.hpp"
#include "supercell/learner/network.hpp"
#include "supercell/mapping.hpp"
#include "supercell/text.hpp"

namespace supercell {

template <typename S = float>
struct Model {
  LearnerConfig config;
  TargetSchema schema;
  LabelCodec codec;
  std::vector<int> constant;  // per head: fixed class, or -1 when trained
  std::vector<std::string> key_dictionaries;
  Network<S> net;

  std::size_t width() const { return codec.max_width(); }
};

// Head vocabularies from the schema and the training labels: COPY classes
// up to the widest key seen, attribute heads up to the widest cell, and
// every literal key value the labels use.
inline LabelCodec build_codec(const TargetSchema& schema, const std::vector<LabeledSample>& samples) {
  std::size_t max_keys = 1, max_width = 1;
  std::map<std::string, std::set<std::string>> literals;
  for (const auto& s : samples) {
    max_keys = std::max(max_keys, s.cell.keys.size());
    max_width = std::max(max_width, s.cell.width());
    for (std::size_t l = 0; l < s.label.keys.size() && l < schema.q(); ++l)
      if (s.label.keys[l].kind == KeyLabel::Kind::Value) literals[schema.key_attributes[l]].insert(s.label.keys[l].value);
  }
  return LabelCodec(schema, max_keys, max_width, literals);
}

struct LossPoint {
  std::size_t epoch = 0;
  double loss = 0;
  double train_acc = 0;
};

inline std::string render_loss_curve(const std::vector<LossPoint>& curve) {
  std::string out = "epoch,loss,train_acc\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", p.epoch, p.loss, p.train_acc);
    out += buf;
  }
  return out;
}

template <typename S>
struct TrainResult {
  Model<S> model;
  std::vector<LossPoint> curve;
  std::size_t degenerate_heads = 0;
  std::vector<double> epoch_ms;  // wall time, not part of any deterministic output
};

namespace detail {

inline std::vector<std::size_t> argmax_heads(const std::vector<std::vector<double>>& probs) {
  std::vector<std::size_t> out;
  for (const auto& p : probs) out.push_back(static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
  return out;
}

template <typename S>
std::vector<std::vector<double>> all_head_probs(const Model<S>& m, const ForwardCache<S>& c) {
  std::vector<std::vector<double>> out;
  const auto& sizes = m.net.layout().head_sizes;
  for (std::size_t h = 0; h < sizes.size(); ++h) {
    if (m.constant[h] >= 0) {
      std::vector<double> one(sizes[h], 0.0);
      one[static_cast<std::size_t>(m.constant[h])] = 1.0;
      out.push_back(std::move(one));
      continue;
    }
    auto p = m.net.head_probs(c, h);
    out.emplace_back(p.begin(), p.end());
  }
  return out;
}

template <typename S>
TargetPosition decode_argmax(const Model<S>& m, const std::vector<std::vector<double>>& probs, std::size_t width) {
  const auto arg = argmax_heads(probs);
  LabelVector v(arg.begin(), arg.end());
  return m.codec.decode(v, width);
}

template <typename S>
void check_finite(const std::vector<S>& theta) {
  for (const auto& v : theta)
    if (!std::isfinite(static_cast<double>(v)))
      throw Error(ErrorCode::InvariantViolation, "non-finite parameter after update");
}

}  // namespace detail

// Adam with lazy updates for embedding rows: rows absent from a batch keep
// their moments untouched, dense tensors follow the textbook update.
template <typename S>
class Adam {
 public:
  Adam(const LearnerConfig& cfg, std::size_t total, std::size_t embed_end)
      : cfg_(cfg), m_(total, S(0)), v_(total, S(0)), embed_end_(embed_end) {}

  void step(std::vector<S>& theta, std::vector<S>& grad, std::vector<std::uint8_t>& touched, std::size_t d) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto update = [&](std::size_t i) {
      const double g = static_cast<double>(grad[i]);
      const double m = cfg_.beta1 * static_cast<double>(m_[i]) + (1.0 - cfg_.beta1) * g;
      const double v = cfg_.beta2 * static_cast<double>(v_[i]) + (1.0 - cfg_.beta2) * g * g;
      m_[i] = static_cast<S>(m);
      v_[i] = static_cast<S>(v);
      theta[i] = static_cast<S>(static_cast<double>(theta[i]) - cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps));
      grad[i] = S(0);
    };
    for (std::size_t row = 0; row < touched.size(); ++row) {
      if (!touched[row]) continue;
      for (std::size_t k = 0; k < d; ++k) update(row * d + k);
      touched[row] = 0;
    }
    for (std::size_t i = embed_end_; i < theta.size(); ++i) update(i);
  }

 private:
  LearnerConfig cfg_;
  std::vector<S> m_, v_;
  std::size_t embed_end_;
  std::size_t t_ = 0;
};

template <typename S = float>
TrainResult<S> train(const std::vector<LabeledSample>& samples, const TargetSchema& schema, const LearnerConfig& cfg,
                     std::vector<std::string> key_dictionaries = {},
                     const std::function<void(const LossPoint&)>& on_epoch = {}) {
  cfg.validate();
  if (samples.empty()) throw Error(ErrorCode::Config, "training needs at least one sample");
  TrainResult<S> res;
  Model<S>& m = res.model;
  m.config = cfg;
  m.schema = schema;
  m.key_dictionaries = std::move(key_dictionaries);
  m.codec = build_codec(schema, samples);
  const auto sizes = m.codec.head_sizes();

  std::vector<EncodedSentence> enc;
  std::vector<LabelVector> labels;
  enc.reserve(samples.size());
  labels.reserve(samples.size());
  for (const auto& s : samples) {
    enc.push_back(encode_sentence(s.feature, cfg, m.codec.max_width()));
    labels.push_back(m.codec.encode(s.label));
  }
  // A head whose training labels never vary becomes a constant predictor.
  m.constant.assign(sizes.size(), -1);
  for (std::size_t h = 0; h < sizes.size(); ++h) {
    std::set<int> seen;
    for (const auto& y : labels) seen.insert(y[h]);
    if (seen.size() == 1 || sizes[h] == 1) {
      m.constant[h] = *seen.begin();
      ++res.degenerate_heads;
    }
  }

  m.net = Network<S>(cfg, sizes, m.codec.max_width());
  m.net.init(cfg.seed);
  const Layout& L = m.net.layout();
  std::vector<S> grad(L.total, S(0));
  std::vector<std::uint8_t> touched(cfg.buckets, 0);
  Adam<S> opt(cfg, L.total, L.E + cfg.buckets * L.d);
  ForwardCache<S> cache;

  auto correct = [&](std::size_t i) {
    const auto probs = detail::all_head_probs(m, cache);
    const std::size_t w = samples[i].cell.width();
    return detail::decode_argmax(m, probs, w) == m.codec.decode(labels[i], w);
  };

  {
    double total = 0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < enc.size(); ++i) {
      total += static_cast<double>(m.net.loss_and_backward(enc[i], labels[i], m.constant, cache, nullptr, S(1), nullptr));
      ok += correct(i);
    }
    LossPoint p{0, total / static_cast<double>(enc.size()), static_cast<double>(ok) / static_cast<double>(enc.size())};
    res.curve.push_back(p);
    if (on_epoch) on_epoch(p);
  }

  std::vector<std::size_t> order(enc.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    Rng rng = derived_rng(cfg.seed ^ 0x73687566ULL, epoch);
    shuffle(order, rng);
    double total = 0;
    std::size_t ok = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch) {
      const std::size_t b1 = std::min(order.size(), b0 + cfg.batch);
      const S scale = S(1) / static_cast<S>(b1 - b0);
      for (std::size_t k = b0; k < b1; ++k) {
        const std::size_t i = order[k];
        total += static_cast<double>(m.net.loss_and_backward(enc[i], labels[i], m.constant, cache, &grad, scale, &touched));
        ok += correct(i);
      }
      opt.step(m.net.params(), grad, touched, L.d);
    }
    detail::check_finite(m.net.params());
    LossPoint p{epoch, total / static_cast<double>(enc.size()), static_cast<double>(ok) / static_cast<double>(enc.size())};
    res.curve.push_back(p);
    res.epoch_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    if (on_epoch) on_epoch(p);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Inference

struct Prediction {
  TargetPosition position;  // COPY markers resolved
  TargetPosition raw;       // as decoded from the heads
  std::vector<std::vector<double>> probs;
  double confidence = 1.0;
};

template <typename S>
Prediction predict(const SuperCell& cell, const Model<S>& m, const DictionarySet* key_dicts,
                   ResolveStats* stats = nullptr) {
  const FeatureSentence f = render_feature(cell);
  const EncodedSentence e = encode_sentence(f, m.config, m.width());
  ForwardCache<S> c;
  m.net.forward(e, c);
  Prediction p;
  p.probs = detail::all_head_probs(m, c);
  p.raw = detail::decode_argmax(m, p.probs, cell.width());
  const auto arg = detail::argmax_heads(p.probs);
  const std::size_t q = m.codec.q();
  for (std::size_t h = 0; h < p.probs.size(); ++h) {
    const bool used = h < q || h == m.codec.agg_head() || (h - q) < std::min(cell.width(), m.width());
    if (used) p.confidence *= p.probs[h][arg[h]];
  }
  p.position = resolve_copies(p.raw, cell, key_dicts, stats).normalized();
  return p;
}

// A prediction is correct when its resolved position (keys, every attribute
// slot, aggregation mode) equals the resolved label.
template <typename S>
bool prediction_matches(const Prediction& p, const LabeledSample& s, const DictionarySet* key_dicts) {
  return p.position == resolve_copies(s.label, s.cell, key_dicts).normalized();
}

template <typename S>
double accuracy(const std::vector<LabeledSample>& samples, const Model<S>& m, const DictionarySet* key_dicts) {
  if (samples.empty()) throw Error(ErrorCode::EmptyEvalSet, "accuracy over an empty sample set");
  std::size_t ok = 0;
  for (const auto& s : samples) ok += prediction_matches<S>(predict(s.cell, m, key_dicts), s, key_dicts);
  return static_cast<double>(ok) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Gradient verification

struct GradCheckResult {
  double max_rel_error = 0;
  double max_abs_diff = 0;
  double max_abs_grad = 0;
  std::size_t params = 0;
};

// Compares analytic gradients against central differences on a random
// tiny model and batch.
inline GradCheckResult gradient_check(Encoder encoder, std::uint64_t seed, double eps = 1e-4, double abs_floor = 1e-6) {
  Rng rng = derived_rng(seed, 0x67726164);
  LearnerConfig cfg;
  cfg.encoder = encoder;
  cfg.buckets = 8 + uniform_index(rng, 8);
  cfg.dim = 2 + uniform_index(rng, 3);
  cfg.hidden = 2 + uniform_index(rng, 3);
  cfg.key_slots = 1 + uniform_index(rng, 2);
  const std::size_t width = 1 + uniform_index(rng, 2);
  std::vector<std::size_t> sizes;
  const std::size_t heads = 2 + uniform_index(rng, 3);
  for (std::size_t h = 0; h < heads; ++h) sizes.push_back(2 + uniform_index(rng, 4));
  Network<double> net(cfg, sizes, width);
  net.init(seed);
  for (auto& v : net.params()) v += (uniform01(rng) - 0.5) * 0.6;

  std::vector<EncodedSentence> batch;
  std::vector<LabelVector> labels;
  const std::size_t n = 2 + uniform_index(rng, 2);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureSentence f;
    const std::size_t T = 2 + uniform_index(rng, 4);
    for (std::size_t t = 0; t < T; ++t) {
      std::string tok;
      const std::size_t len = 1 + uniform_index(rng, 6);
      for (std::size_t k = 0; k < len; ++k) tok += static_cast<char>('a' + uniform_index(rng, 26));
      f.tokens.push_back(tok);
      f.segment_tags.push_back(static_cast<Segment>(uniform_index(rng, 3)));
      f.slots.push_back(static_cast<std::uint32_t>(uniform_index(rng, 3)));
    }
    batch.push_back(encode_sentence(f, cfg, width));
    LabelVector y;
    for (auto s : sizes) y.push_back(static_cast<int>(uniform_index(rng, s)));
    labels.push_back(std::move(y));
  }
  const std::vector<int> constant(sizes.size(), -1);
  auto total_loss = [&]() {
    double l = 0;
    for (std::size_t i = 0; i < n; ++i) l += net.loss(batch[i], labels[i], constant);
    return l / static_cast<double>(n);
  };
  std::vector<double> grad(net.params().size(), 0.0);
  ForwardCache<double> cache;
  for (std::size_t i = 0; i < n; ++i)
    net.loss_and_backward(batch[i], labels[i], constant, cache, &grad, 1.0 / static_cast<double>(n), nullptr);

  GradCheckResult r;
  r.params = grad.size();
  auto& theta = net.params();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double lp = total_loss();
    theta[i] = saved - eps;
    const double lm = total_loss();
    theta[i] = saved;
    const double num = (lp - lm) / (2 * eps);
    const double diff = std::abs(num - grad[i]);
    r.max_abs_grad = std::max(r.max_abs_grad, std::abs(grad[i]));
    r.max_abs_diff = std::max(r.max_abs_diff, diff);
    const double denom = std::max(std::abs(num), std::abs(grad[i]));
    // near-zero gradients are held to the absolute floor instead
    const double err = denom > abs_floor ? diff / denom : (diff <= abs_floor ? 0.0 : diff / abs_floor);
    r.max_rel_error = std::max(r.max_rel_error, err);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Model files: "SCLM", u32 version, u64 header length, JSON header, u64
// parameter count, parameters as little-endian IEEE floats.

inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const std::string& in, std::size_t& pos, int bytes = 8) {
  if (pos + static_cast<std::size_t>(bytes) > in.size()) throw Error(ErrorCode::Parse, "truncated model file");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += static_cast<std::size_t>(bytes);
  return v;
}

}  // namespace detail

template <typename S>
std::string serialize_model(const Model<S>& m) {
  static_assert(sizeof(S) == 4 || sizeof(S) == 8);
  nlohmann::json h{{"format", "supercell-model"},
                   {"version", kModelVersion},
                   {"dtype", sizeof(S) == 4 ? "f32" : "f64"},
                   {"config", m.config},
                   {"schema", m.schema},
                   {"codec", m.codec},
                   {"constant", m.constant},
                   {"key_dictionaries", m.key_dictionaries},
                   {"param_count", m.net.params().size()}};
  const std::string header = h.dump();
  std::string out = "SCLM";
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((kModelVersion >> (8 * i)) & 0xff));
  detail::put_u64(out, header.size());
  out += header;
  detail::put_u64(out, m.net.params().size());
  for (S v : m.net.params()) {
    if constexpr (sizeof(S) == 4) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    } else {
      detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

template <typename S = float>
Model<S> deserialize_model(const std::string& bytes) {
  if (bytes.size() < 8 || bytes.compare(0, 4, "SCLM") != 0) throw Error(ErrorCode::Parse, "not a model file");
  std::size_t pos = 4;
  const auto version = detail::get_u64(bytes, pos, 4);
  if (version != kModelVersion) throw Error(ErrorCode::Parse, "unsupported model version " + std::to_string(version));
  const auto hlen = detail::get_u64(bytes, pos);
  if (pos + hlen > bytes.size()) throw Error(ErrorCode::Parse, "truncated model header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(pos, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("model header: ") + e.what());
  }
  pos += hlen;
  if (h.at("dtype").get<std::string>() != (sizeof(S) == 4 ? "f32" : "f64"))
    throw Error(ErrorCode::Parse, "model precision differs from the requested one");
  Model<S> m;
  m.config = h.at("config").get<LearnerConfig>();
  m.schema = h.at("schema").get<TargetSchema>();
  m.codec = h.at("codec").get<LabelCodec>();
  m.constant = h.at("constant").get<std::vector<int>>();
  m.key_dictionaries = h.at("key_dictionaries").get<std::vector<std::string>>();
  m.net = Network<S>(m.config, m.codec.head_sizes(), m.codec.max_width());
  const auto count = detail::get_u64(bytes, pos);
  if (count != m.net.params().size()) throw Error(ErrorCode::Parse, "parameter count differs from the model layout");
  for (auto& v : m.net.params()) {
    if constexpr (sizeof(S) == 4)
      v = std::bit_cast<float>(static_cast<std::uint32_t>(detail::get_u64(bytes, pos, 4)));
    else
      v = std::bit_cast<double>(detail::get_u64(bytes, pos));
  }
  if (pos != bytes.size()) throw Error(ErrorCode::Parse, "trailing bytes in model file");
  if (m.constant.size() != m.codec.num_heads()) throw Error(ErrorCode::Parse, "constant-head table size mismatch");
  return m;
}

template <typename S>
void save_model(const Model<S>& m, const std::string& path) {
  write_file(path, serialize_model(m));
}

template <typename S = float>
Model<S> load_model(const std::string& path) {
  return deserialize_model<S>(read_file(path));
}

}  // namespace supercell
