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

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "supercell/core.hpp"
#include "supercell/error.hpp"
#include "supercell/text.hpp"

namespace supercell {

enum class Encoder { Pooled, BiRecurrent };

inline std::string_view to_string(Encoder e) { return e == Encoder::Pooled ? "pooled" : "birecurrent"; }

inline Encoder parse_encoder(std::string_view s) {
  if (s == "pooled") return Encoder::Pooled;
  if (s == "birecurrent") return Encoder::BiRecurrent;
  throw Error(ErrorCode::Config, "unknown encoder '" + std::string(s) + "'");
}

struct LearnerConfig {
  Encoder encoder = Encoder::Pooled;
  std::size_t buckets = 1u << 15;
  std::size_t dim = 64;
  std::size_t hidden = 128;  // per direction for the recurrent encoder
  std::size_t key_slots = 6;
  std::size_t ngram_min = 3;
  std::size_t ngram_max = 5;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch = 64;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (buckets == 0 || dim == 0 || hidden == 0 || key_slots == 0)
      throw Error(ErrorCode::Config, "learner dimensions must be positive");
    if (ngram_min == 0 || ngram_min > ngram_max) throw Error(ErrorCode::Config, "bad n-gram range");
    if (!(lr > 0) || batch == 0) throw Error(ErrorCode::Config, "learning rate and batch size must be positive");
  }

  friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

inline void to_json(nlohmann::json& j, const LearnerConfig& c) {
  j = nlohmann::json{{"encoder", std::string(to_string(c.encoder))},
                     {"buckets", c.buckets},
                     {"dim", c.dim},
                     {"hidden", c.hidden},
                     {"key_slots", c.key_slots},
                     {"ngram_min", c.ngram_min},
                     {"ngram_max", c.ngram_max},
                     {"lr", c.lr},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"eps", c.eps},
                     {"batch", c.batch},
                     {"epochs", c.epochs},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, LearnerConfig& c) {
  static const std::set<std::string> known = {"encoder", "buckets", "dim",   "hidden", "key_slots",
                                              "ngram_min", "ngram_max", "lr", "beta1", "beta2",
                                              "eps",     "batch",   "epochs", "seed"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error(ErrorCode::Config, "unknown learner config key '" + k + "'");
  c = LearnerConfig{};
  c.encoder = parse_encoder(j.value("encoder", std::string("pooled")));
  c.buckets = j.value("buckets", c.buckets);
  c.dim = j.value("dim", c.dim);
  c.hidden = j.value("hidden", c.hidden);
  c.key_slots = j.value("key_slots", c.key_slots);
  c.ngram_min = j.value("ngram_min", c.ngram_min);
  c.ngram_max = j.value("ngram_max", c.ngram_max);
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.batch = j.value("batch", c.batch);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.validate();
}

// fastText-style subwords: character n-grams of "<token>" plus one bucket
// for the whole token, hashed with FNV-1a modulo the bucket count.
inline std::vector<std::string> subword_units(const std::string& token, std::size_t nmin = 3, std::size_t nmax = 5) {
  const std::string s = "<" + token + ">";
  std::vector<std::string> out;
  for (std::size_t n = nmin; n <= nmax; ++n)
    for (std::size_t i = 0; i + n <= s.size(); ++i) out.push_back(s.substr(i, n));
  return out;
}

inline std::vector<std::uint32_t> subword_buckets(const std::string& token, const LearnerConfig& cfg) {
  if (token.empty()) throw Error(ErrorCode::InvariantViolation, "empty token");
  std::vector<std::uint32_t> out;
  for (const auto& g : subword_units(token, cfg.ngram_min, cfg.ngram_max))
    out.push_back(static_cast<std::uint32_t>(fnv1a64(g) % cfg.buckets));
  out.push_back(static_cast<std::uint32_t>(fnv1a64("\x1fw:" + token) % cfg.buckets));
  return out;
}

// A feature sentence prepared for the network: the bucket list of every
// token and the input slot each token pools into.
struct EncodedSentence {
  std::vector<std::uint32_t> buckets;
  std::vector<std::uint32_t> offsets{0};  // token t owns buckets[offsets[t], offsets[t+1])
  std::vector<std::uint32_t> slot;

  std::size_t size() const { return slot.size(); }
};

// Input slots: key components 0..K-1, then attribute slots, then value
// slots. Components beyond the configured widths share the last slot.
inline std::size_t input_slots(const LearnerConfig& cfg, std::size_t width) { return cfg.key_slots + 2 * width; }

inline EncodedSentence encode_sentence(const FeatureSentence& s, const LearnerConfig& cfg, std::size_t width) {
  EncodedSentence e;
  for (std::size_t t = 0; t < s.tokens.size(); ++t) {
    const auto b = subword_buckets(s.tokens[t], cfg);
    e.buckets.insert(e.buckets.end(), b.begin(), b.end());
    e.offsets.push_back(static_cast<std::uint32_t>(e.buckets.size()));
    const std::size_t i = s.slots[t];
    std::size_t slot = 0;
    switch (s.segment_tags[t]) {
      case Segment::Key: slot = std::min(i, cfg.key_slots - 1); break;
      case Segment::Attr: slot = cfg.key_slots + std::min(i, width - 1); break;
      case Segment::Val: slot = cfg.key_slots + width + std::min(i, width - 1); break;
    }
    e.slot.push_back(static_cast<std::uint32_t>(slot));
  }
  return e;
}

}  // namespace supercell
