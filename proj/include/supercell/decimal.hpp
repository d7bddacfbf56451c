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
#include <optional>
#include <string>
#include <string_view>

namespace supercell {

// Fixed-point decimal with 12 fractional digits backed by a 128-bit
// integer. Sums of integer inputs are exact; no binary floating point is
// involved anywhere in the aggregation path.
class Decimal {
 public:
  static constexpr int kScale = 12;

  Decimal() = default;

  static Decimal from_int(std::int64_t v) { return Decimal(static_cast<__int128>(v) * pow10(kScale)); }
  static Decimal from_units(__int128 units) { return Decimal(units); }

  // Strict parse: [+-]digits[.digits]. Fractional digits beyond the scale
  // are rounded half away from zero.
  static std::optional<Decimal> parse(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
      neg = s[i] == '-';
      ++i;
    }
    __int128 int_part = 0;
    std::size_t int_digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      int_part = int_part * 10 + (s[i] - '0');
      if (int_part > pow10(26)) return std::nullopt;
      ++i;
      ++int_digits;
    }
    __int128 frac = 0;
    int frac_digits = 0;
    bool round_up = false;
    if (i < s.size() && s[i] == '.') {
      ++i;
      std::size_t start = i;
      while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        if (frac_digits < kScale) {
          frac = frac * 10 + (s[i] - '0');
          ++frac_digits;
        } else if (i == start + kScale && s[i] >= '5') {
          round_up = true;
        }
        ++i;
      }
      if (i == start && int_digits == 0) return std::nullopt;
    }
    if (int_digits == 0 && frac_digits == 0) return std::nullopt;
    if (i != s.size()) return std::nullopt;
    __int128 units = int_part * pow10(kScale) + frac * pow10(kScale - frac_digits);
    if (round_up) units += 1;
    return Decimal(neg ? -units : units);
  }

  __int128 units() const { return units_; }

  // Number of fractional digits needed to print the value exactly.
  int fractional_digits() const {
    __int128 a = units_ < 0 ? -units_ : units_;
    int digits = kScale;
    while (digits > 0 && a % 10 == 0) {
      a /= 10;
      --digits;
    }
    return digits;
  }

  std::string to_string() const { return render(units_, kScale); }

  // Quotient rounded half away from zero to `digits` fractional digits,
  // trailing zeros trimmed.
  std::string divided_by(std::int64_t count, int digits = 6) const {
    if (count == 0) return "";
    const __int128 denom = static_cast<__int128>(count) * pow10(kScale - digits);
    __int128 num = units_;
    bool neg = (num < 0) != (denom < 0);
    __int128 an = num < 0 ? -num : num;
    __int128 ad = denom < 0 ? -denom : denom;
    __int128 q = an / ad;
    __int128 r = an % ad;
    if (r * 2 >= ad) ++q;
    return render(neg ? -q : q, digits);
  }

  friend Decimal operator+(Decimal a, Decimal b) { return Decimal(a.units_ + b.units_); }
  friend Decimal operator-(Decimal a, Decimal b) { return Decimal(a.units_ - b.units_); }
  Decimal& operator+=(Decimal b) {
    units_ += b.units_;
    return *this;
  }
  friend bool operator==(Decimal a, Decimal b) { return a.units_ == b.units_; }
  friend bool operator<(Decimal a, Decimal b) { return a.units_ < b.units_; }

  static __int128 pow10(int n) {
    __int128 p = 1;
    for (int i = 0; i < n; ++i) p *= 10;
    return p;
  }

 private:
  explicit Decimal(__int128 units) : units_(units) {}

  static std::string render(__int128 v, int scale) {
    bool neg = v < 0;
    __int128 a = neg ? -v : v;
    __int128 p = pow10(scale);
    __int128 ip = a / p;
    __int128 fp = a % p;
    std::string int_str;
    if (ip == 0) int_str = "0";
    while (ip > 0) {
      int_str.insert(int_str.begin(), static_cast<char>('0' + static_cast<int>(ip % 10)));
      ip /= 10;
    }
    std::string frac_str;
    if (fp != 0) {
      frac_str.assign(static_cast<std::size_t>(scale), '0');
      for (int i = scale - 1; i >= 0; --i) {
        frac_str[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(fp % 10));
        fp /= 10;
      }
      while (!frac_str.empty() && frac_str.back() == '0') frac_str.pop_back();
    }
    std::string out;
    if (neg && (int_str != "0" || !frac_str.empty())) out += '-';
    out += int_str;
    if (!frac_str.empty()) {
      out += '.';
      out += frac_str;
    }
    return out;
  }

  __int128 units_ = 0;
};

}  // namespace supercell
