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

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <vector>

#include "supercell/core.hpp"
#include "supercell/error.hpp"
#include "supercell/learner/config.hpp"
#include "supercell/text.hpp"

namespace supercell {

namespace la {

// y += W x, W is rows x cols row-major.
template <typename S>
inline void gemv(const S* W, const S* x, S* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const S* w = W + r * cols;
    S acc = 0;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
    y[r] += acc;
  }
}

// y += W^T v
template <typename S>
inline void gemv_t(const S* W, const S* v, S* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const S vr = v[r];
    if (vr == 0) continue;
    const S* w = W + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += w[c] * vr;
  }
}

// G += a b^T
template <typename S>
inline void outer(S* G, const S* a, const S* b, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const S ar = a[r];
    if (ar == 0) continue;
    S* g = G + r * cols;
    for (std::size_t c = 0; c < cols; ++c) g[c] += ar * b[c];
  }
}

template <typename S>
inline S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

}  // namespace la

// Offsets of every tensor inside the flat parameter vector.
struct Layout {
  std::size_t width = 1;  // attribute heads / input attribute slots
  std::size_t slots = 0;
  std::size_t d = 0, h = 0, htot = 0;
  std::size_t E = 0;
  std::size_t Wh = 0, bh = 0;     // pooled
  std::size_t P = 0, gru[2] = {0, 0};  // recurrent
  std::size_t U = 0, c = 0;
  std::size_t classes = 0;
  std::vector<std::size_t> head_sizes, head_start;
  std::size_t total = 0;

  std::size_t gru_W(int dir, int g) const { return gru[dir] + static_cast<std::size_t>(g) * h * d; }
  std::size_t gru_U(int dir, int g) const { return gru[dir] + 3 * h * d + static_cast<std::size_t>(g) * h * h; }
  std::size_t gru_b(int dir, int g) const { return gru[dir] + 3 * h * d + 3 * h * h + static_cast<std::size_t>(g) * h; }
};

inline Layout make_layout(const LearnerConfig& cfg, const std::vector<std::size_t>& head_sizes, std::size_t width) {
  Layout L;
  L.width = std::max<std::size_t>(1, width);
  L.slots = input_slots(cfg, L.width);
  L.d = cfg.dim;
  L.h = cfg.hidden;
  std::size_t off = 0;
  L.E = off;
  off += cfg.buckets * L.d;
  if (cfg.encoder == Encoder::Pooled) {
    L.htot = L.h;
    L.Wh = off;
    off += L.h * L.slots * L.d;
    L.bh = off;
    off += L.h;
  } else {
    L.htot = 2 * L.h;
    L.P = off;
    off += L.slots * L.d;
    for (int dir = 0; dir < 2; ++dir) {
      L.gru[dir] = off;
      off += 3 * L.h * L.d + 3 * L.h * L.h + 3 * L.h;
    }
  }
  L.head_sizes = head_sizes;
  for (auto s : head_sizes) {
    L.head_start.push_back(L.classes);
    L.classes += s;
  }
  L.U = off;
  off += L.classes * L.htot;
  L.c = off;
  off += L.classes;
  L.total = off;
  return L;
}

template <typename S>
struct ForwardCache {
  std::vector<S> tok;  // T x d mean subword vectors
  // pooled
  std::vector<S> x, cnt, hid;
  // recurrent: inputs, states (T+1 per direction) and gates
  std::vector<S> xs;
  std::vector<S> hs[2], z[2], r[2], n[2], unh[2];
  std::vector<S> feat, logits;
};

// Encoder plus one softmax head per label slot, over a flat parameter
// vector. Gradients are accumulated into a caller-owned vector with the
// same layout.
template <typename S>
class Network {
 public:
  Network() = default;
  Network(LearnerConfig cfg, const std::vector<std::size_t>& head_sizes, std::size_t width)
      : cfg_(std::move(cfg)), L_(make_layout(cfg_, head_sizes, width)), theta_(L_.total, S(0)) {}

  const LearnerConfig& config() const { return cfg_; }
  const Layout& layout() const { return L_; }
  std::vector<S>& params() { return theta_; }
  const std::vector<S>& params() const { return theta_; }

  // Random encoder weights; classifier heads start at zero so every head
  // begins uniform.
  void init(std::uint64_t seed) {
    Rng rng = derived_rng(seed, 0x696e6974);
    auto fill = [&](std::size_t off, std::size_t count, double a) {
      for (std::size_t i = 0; i < count; ++i) theta_[off + i] = static_cast<S>((uniform01(rng) * 2.0 - 1.0) * a);
    };
    std::fill(theta_.begin(), theta_.end(), S(0));
    const double d = static_cast<double>(L_.d), h = static_cast<double>(L_.h);
    fill(L_.E, cfg_.buckets * L_.d, 1.0 / std::sqrt(d));
    if (cfg_.encoder == Encoder::Pooled) {
      const double in = static_cast<double>(L_.slots * L_.d);
      fill(L_.Wh, L_.h * L_.slots * L_.d, std::sqrt(6.0 / (in + h)));
    } else {
      fill(L_.P, L_.slots * L_.d, 1.0 / std::sqrt(d));
      for (int dir = 0; dir < 2; ++dir)
        for (int g = 0; g < 3; ++g) {
          fill(L_.gru_W(dir, g), L_.h * L_.d, std::sqrt(6.0 / (d + h)));
          fill(L_.gru_U(dir, g), L_.h * L_.h, std::sqrt(6.0 / (2 * h)));
        }
    }
  }

  void embed(const EncodedSentence& e, ForwardCache<S>& c) const {
    const std::size_t T = e.size(), d = L_.d;
    c.tok.assign(T * d, S(0));
    for (std::size_t t = 0; t < T; ++t) {
      S* v = c.tok.data() + t * d;
      const std::size_t b0 = e.offsets[t], b1 = e.offsets[t + 1];
      for (std::size_t b = b0; b < b1; ++b) {
        const S* row = theta_.data() + L_.E + static_cast<std::size_t>(e.buckets[b]) * d;
        for (std::size_t k = 0; k < d; ++k) v[k] += row[k];
      }
      const S inv = S(1) / static_cast<S>(b1 - b0);
      for (std::size_t k = 0; k < d; ++k) v[k] *= inv;
    }
  }

  void forward(const EncodedSentence& e, ForwardCache<S>& c) const {
    embed(e, c);
    const std::size_t T = e.size(), d = L_.d, H = L_.h;
    const S* th = theta_.data();
    if (cfg_.encoder == Encoder::Pooled) {
      c.x.assign(L_.slots * d, S(0));
      c.cnt.assign(L_.slots, S(0));
      for (std::size_t t = 0; t < T; ++t) {
        S* x = c.x.data() + e.slot[t] * d;
        const S* v = c.tok.data() + t * d;
        for (std::size_t k = 0; k < d; ++k) x[k] += v[k];
        c.cnt[e.slot[t]] += 1;
      }
      for (std::size_t s = 0; s < L_.slots; ++s)
        if (c.cnt[s] > 0)
          for (std::size_t k = 0; k < d; ++k) c.x[s * d + k] /= c.cnt[s];
      c.hid.assign(th + L_.bh, th + L_.bh + H);
      la::gemv(th + L_.Wh, c.x.data(), c.hid.data(), H, L_.slots * d);
      for (auto& v : c.hid) v = std::tanh(v);
      c.feat = c.hid;
    } else {
      c.xs.assign(T * d, S(0));
      for (std::size_t t = 0; t < T; ++t) {
        const S* p = th + L_.P + e.slot[t] * d;
        for (std::size_t k = 0; k < d; ++k) c.xs[t * d + k] = c.tok[t * d + k] + p[k];
      }
      c.feat.assign(2 * H, S(0));
      std::vector<S> az(H), ar(H), an(H);
      for (int dir = 0; dir < 2; ++dir) {
        c.hs[dir].assign((T + 1) * H, S(0));
        c.z[dir].assign(T * H, S(0));
        c.r[dir].assign(T * H, S(0));
        c.n[dir].assign(T * H, S(0));
        c.unh[dir].assign(T * H, S(0));
        for (std::size_t k = 0; k < T; ++k) {
          const std::size_t t = dir == 0 ? k : T - 1 - k;
          const S* x = c.xs.data() + t * d;
          const S* hp = c.hs[dir].data() + k * H;
          std::copy(th + L_.gru_b(dir, 0), th + L_.gru_b(dir, 0) + H, az.begin());
          std::copy(th + L_.gru_b(dir, 1), th + L_.gru_b(dir, 1) + H, ar.begin());
          std::copy(th + L_.gru_b(dir, 2), th + L_.gru_b(dir, 2) + H, an.begin());
          la::gemv(th + L_.gru_W(dir, 0), x, az.data(), H, d);
          la::gemv(th + L_.gru_U(dir, 0), hp, az.data(), H, H);
          la::gemv(th + L_.gru_W(dir, 1), x, ar.data(), H, d);
          la::gemv(th + L_.gru_U(dir, 1), hp, ar.data(), H, H);
          la::gemv(th + L_.gru_W(dir, 2), x, an.data(), H, d);
          S* unh = c.unh[dir].data() + k * H;
          la::gemv(th + L_.gru_U(dir, 2), hp, unh, H, H);
          S* z = c.z[dir].data() + k * H;
          S* r = c.r[dir].data() + k * H;
          S* n = c.n[dir].data() + k * H;
          S* hn = c.hs[dir].data() + (k + 1) * H;
          for (std::size_t j = 0; j < H; ++j) {
            z[j] = la::sigmoid(az[j]);
            r[j] = la::sigmoid(ar[j]);
            n[j] = std::tanh(an[j] + r[j] * unh[j]);
            hn[j] = (S(1) - z[j]) * n[j] + z[j] * hp[j];
          }
        }
        std::copy(c.hs[dir].begin() + static_cast<std::ptrdiff_t>(T * H), c.hs[dir].end(),
                  c.feat.begin() + static_cast<std::ptrdiff_t>(dir * H));
      }
    }
    c.logits.assign(th + L_.c, th + L_.c + L_.classes);
    la::gemv(th + L_.U, c.feat.data(), c.logits.data(), L_.classes, L_.htot);
  }

  // Softmax probabilities of one head from cached logits.
  std::vector<S> head_probs(const ForwardCache<S>& c, std::size_t head) const {
    const std::size_t s0 = L_.head_start[head], n = L_.head_sizes[head];
    std::vector<S> p(n);
    S mx = c.logits[s0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, c.logits[s0 + i]);
    S sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += (p[i] = std::exp(c.logits[s0 + i] - mx));
    for (auto& v : p) v /= sum;
    return p;
  }

  // Sum of per-head cross-entropies (constant heads excluded); adds
  // scale * gradient into `grad`. `touched` flags embedding rows written.
  S loss_and_backward(const EncodedSentence& e, const LabelVector& y, const std::vector<int>& constant,
                      ForwardCache<S>& c, std::vector<S>* grad, S scale, std::vector<std::uint8_t>* touched) const {
    forward(e, c);
    S loss = 0;
    std::vector<S> dlogits(L_.classes, S(0));
    for (std::size_t hd = 0; hd < L_.head_sizes.size(); ++hd) {
      if (constant[hd] >= 0) continue;
      const auto p = head_probs(c, hd);
      const std::size_t target = static_cast<std::size_t>(y[hd]);
      loss -= std::log(std::max(p[target], std::numeric_limits<S>::min()));
      for (std::size_t i = 0; i < p.size(); ++i)
        dlogits[L_.head_start[hd] + i] = scale * (p[i] - (i == target ? S(1) : S(0)));
    }
    if (grad) backward(e, c, dlogits, *grad, touched);
    return loss;
  }

  // Plain cross-entropy loss without gradients.
  S loss(const EncodedSentence& e, const LabelVector& y, const std::vector<int>& constant) const {
    ForwardCache<S> c;
    return loss_and_backward(e, y, constant, c, nullptr, S(1), nullptr);
  }

 private:
  void backward(const EncodedSentence& e, const ForwardCache<S>& c, const std::vector<S>& dlogits, std::vector<S>& g,
                std::vector<std::uint8_t>* touched) const {
    const std::size_t T = e.size(), d = L_.d, H = L_.h;
    const S* th = theta_.data();
    S* G = g.data();
    la::outer(G + L_.U, dlogits.data(), c.feat.data(), L_.classes, L_.htot);
    for (std::size_t i = 0; i < L_.classes; ++i) G[L_.c + i] += dlogits[i];
    std::vector<S> dfeat(L_.htot, S(0));
    la::gemv_t(th + L_.U, dlogits.data(), dfeat.data(), L_.classes, L_.htot);

    std::vector<S> dtok(T * d, S(0));
    if (cfg_.encoder == Encoder::Pooled) {
      std::vector<S> da(H);
      for (std::size_t j = 0; j < H; ++j) da[j] = dfeat[j] * (S(1) - c.hid[j] * c.hid[j]);
      la::outer(G + L_.Wh, da.data(), c.x.data(), H, L_.slots * d);
      for (std::size_t j = 0; j < H; ++j) G[L_.bh + j] += da[j];
      std::vector<S> dx(L_.slots * d, S(0));
      la::gemv_t(th + L_.Wh, da.data(), dx.data(), H, L_.slots * d);
      for (std::size_t t = 0; t < T; ++t) {
        const S inv = S(1) / c.cnt[e.slot[t]];
        for (std::size_t k = 0; k < d; ++k) dtok[t * d + k] = dx[e.slot[t] * d + k] * inv;
      }
    } else {
      std::vector<S> dh(H), dhp(H), daz(H), dar(H), dan(H), dunh(H);
      for (int dir = 0; dir < 2; ++dir) {
        std::copy(dfeat.begin() + static_cast<std::ptrdiff_t>(dir * H),
                  dfeat.begin() + static_cast<std::ptrdiff_t>((dir + 1) * H), dh.begin());
        for (std::size_t kk = T; kk-- > 0;) {
          const std::size_t t = dir == 0 ? kk : T - 1 - kk;
          const S* x = c.xs.data() + t * d;
          const S* hp = c.hs[dir].data() + kk * H;
          const S* z = c.z[dir].data() + kk * H;
          const S* r = c.r[dir].data() + kk * H;
          const S* n = c.n[dir].data() + kk * H;
          const S* unh = c.unh[dir].data() + kk * H;
          for (std::size_t j = 0; j < H; ++j) {
            const S dn = dh[j] * (S(1) - z[j]);
            const S dz = dh[j] * (hp[j] - n[j]);
            dhp[j] = dh[j] * z[j];
            dan[j] = dn * (S(1) - n[j] * n[j]);
            dar[j] = dan[j] * unh[j] * r[j] * (S(1) - r[j]);
            dunh[j] = dan[j] * r[j];
            daz[j] = dz * z[j] * (S(1) - z[j]);
          }
          S* dx = dtok.data() + t * d;
          const S* grads[3] = {daz.data(), dar.data(), dan.data()};
          for (int gi = 0; gi < 3; ++gi) {
            la::outer(G + L_.gru_W(dir, gi), grads[gi], x, H, d);
            la::gemv_t(th + L_.gru_W(dir, gi), grads[gi], dx, H, d);
            for (std::size_t j = 0; j < H; ++j) G[L_.gru_b(dir, gi) + j] += grads[gi][j];
          }
          la::outer(G + L_.gru_U(dir, 0), daz.data(), hp, H, H);
          la::outer(G + L_.gru_U(dir, 1), dar.data(), hp, H, H);
          la::outer(G + L_.gru_U(dir, 2), dunh.data(), hp, H, H);
          la::gemv_t(th + L_.gru_U(dir, 0), daz.data(), dhp.data(), H, H);
          la::gemv_t(th + L_.gru_U(dir, 1), dar.data(), dhp.data(), H, H);
          la::gemv_t(th + L_.gru_U(dir, 2), dunh.data(), dhp.data(), H, H);
          dh.swap(dhp);
        }
      }
      // x_t = tok_t + P[slot_t]: dtok currently holds dx
      for (std::size_t t = 0; t < T; ++t) {
        S* dp = G + L_.P + e.slot[t] * d;
        for (std::size_t k = 0; k < d; ++k) dp[k] += dtok[t * d + k];
      }
    }
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t b0 = e.offsets[t], b1 = e.offsets[t + 1];
      const S inv = S(1) / static_cast<S>(b1 - b0);
      for (std::size_t b = b0; b < b1; ++b) {
        const std::size_t row = e.buckets[b];
        S* gr = G + L_.E + row * d;
        for (std::size_t k = 0; k < d; ++k) gr[k] += dtok[t * d + k] * inv;
        if (touched) (*touched)[row] = 1;
      }
    }
  }

  LearnerConfig cfg_;
  Layout L_;
  std::vector<S> theta_;
};

}  // namespace supercell
