#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace l2betti {

/// One letter of the rank-2 free group F = <a1, a2>.  Values +1, +2 address
/// the generators a1, a2; -1, -2 address their inverses.
using Letter = std::int8_t;

constexpr int generator_index(Letter l) noexcept { return l > 0 ? l : -l; }
constexpr bool is_inverse_letter(Letter l) noexcept { return l < 0; }

/// Rank of a letter in the canonical order a1 < A1 < a2 < A2
/// (uppercase = inverse).
constexpr int letter_rank(Letter l) noexcept {
  return 2 * (generator_index(l) - 1) + (is_inverse_letter(l) ? 1 : 0);
}

/// A freely reduced word in F.  The empty word is the identity.
class FreeWord {
 public:
  FreeWord() = default;

  /// Freely reduces an arbitrary letter sequence.  Rejects generator
  /// indices outside {1,2}.
  static FreeWord reduced(std::span<const Letter> letters) {
    FreeWord w;
    w.letters_.reserve(letters.size());
    for (Letter l : letters) w.push(l);
    return w;
  }

  static FreeWord reduced(std::initializer_list<Letter> letters) {
    return reduced(std::span<const Letter>(letters.begin(), letters.size()));
  }

  /// The generator a_i (i in {1,2}), or its inverse for sign = -1.
  static FreeWord generator(int i, int sign = +1) {
    if (i != 1 && i != 2) throw std::invalid_argument("generator index must be 1 or 2");
    if (sign != 1 && sign != -1) throw std::invalid_argument("generator sign must be +-1");
    FreeWord w;
    w.letters_.push_back(static_cast<Letter>(sign * i));
    return w;
  }

  bool is_identity() const noexcept { return letters_.empty(); }
  std::size_t length() const noexcept { return letters_.size(); }
  std::span<const Letter> letters() const noexcept { return letters_; }

  friend FreeWord operator*(const FreeWord& a, const FreeWord& b) {
    FreeWord r = a;
    for (Letter l : b.letters_) r.push(l);
    return r;
  }

  FreeWord inverse() const {
    FreeWord r;
    r.letters_.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it)
      r.letters_.push_back(static_cast<Letter>(-*it));
    return r;
  }

  friend bool operator==(const FreeWord& a, const FreeWord& b) = default;

  /// Shortlex: length first, then letterwise by a1 < A1 < a2 < A2.
  static int compare(const FreeWord& a, const FreeWord& b) noexcept {
    if (a.length() != b.length()) return a.length() < b.length() ? -1 : 1;
    for (std::size_t k = 0; k < a.length(); ++k) {
      int ra = letter_rank(a.letters_[k]), rb = letter_rank(b.letters_[k]);
      if (ra != rb) return ra < rb ? -1 : 1;
    }
    return 0;
  }

  friend bool operator<(const FreeWord& a, const FreeWord& b) noexcept {
    return compare(a, b) < 0;
  }

  /// "e" for the identity, otherwise space-joined letters, e.g. "a1 A2".
  std::string to_string() const {
    if (letters_.empty()) return "e";
    std::string s;
    for (std::size_t k = 0; k < letters_.size(); ++k) {
      if (k) s += ' ';
      s += is_inverse_letter(letters_[k]) ? 'A' : 'a';
      s += static_cast<char>('0' + generator_index(letters_[k]));
    }
    return s;
  }

  static FreeWord parse(std::string_view text) {
    std::vector<Letter> letters;
    std::size_t pos = 0;
    while (pos < text.size()) {
      while (pos < text.size() && text[pos] == ' ') ++pos;
      if (pos >= text.size()) break;
      std::size_t end = pos;
      while (end < text.size() && text[end] != ' ') ++end;
      std::string_view tok = text.substr(pos, end - pos);
      pos = end;
      if (tok == "e") continue;
      if (tok.size() != 2 || (tok[0] != 'a' && tok[0] != 'A') || (tok[1] != '1' && tok[1] != '2'))
        throw std::invalid_argument("bad word token: " + std::string(tok));
      Letter l = static_cast<Letter>(tok[1] - '0');
      if (tok[0] == 'A') l = static_cast<Letter>(-l);
      letters.push_back(l);
    }
    return reduced(letters);
  }

  std::size_t hash() const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Letter l : letters_) {
      h ^= static_cast<std::size_t>(static_cast<std::uint8_t>(l));
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  void push(Letter l) {
    int idx = generator_index(l);
    if (idx != 1 && idx != 2) throw std::invalid_argument("generator index must be 1 or 2");
    if (!letters_.empty() && letters_.back() == -l)
      letters_.pop_back();
    else
      letters_.push_back(l);
  }

  std::vector<Letter> letters_;
};

/// An element of pi = F x F x F: one reduced word per free factor.
/// Multiplication is componentwise (cross-factor letters commute).
class ProductWord {
 public:
  ProductWord() = default;
  ProductWord(FreeWord w1, FreeWord w2, FreeWord w3)
      : f_{std::move(w1), std::move(w2), std::move(w3)} {}

  /// The generator a^k_i of factor k (1..3), i in {1,2}.
  static ProductWord generator(int factor, int i, int sign = +1) {
    if (factor < 1 || factor > 3) throw std::invalid_argument("factor must be 1..3");
    ProductWord w;
    w.f_[factor - 1] = FreeWord::generator(i, sign);
    return w;
  }

  const FreeWord& factor(int k) const { return f_.at(k - 1); }
  FreeWord& factor(int k) { return f_.at(k - 1); }

  bool is_identity() const noexcept {
    return f_[0].is_identity() && f_[1].is_identity() && f_[2].is_identity();
  }

  std::size_t total_length() const noexcept {
    return f_[0].length() + f_[1].length() + f_[2].length();
  }

  /// Bitmask of factors this word actually touches (bit k-1 for factor k).
  unsigned factor_mask() const noexcept {
    unsigned m = 0;
    for (int s = 0; s < 3; ++s)
      if (!f_[s].is_identity()) m |= 1u << s;
    return m;
  }

  friend ProductWord operator*(const ProductWord& a, const ProductWord& b) {
    return ProductWord(a.f_[0] * b.f_[0], a.f_[1] * b.f_[1], a.f_[2] * b.f_[2]);
  }

  ProductWord inverse() const {
    return ProductWord(f_[0].inverse(), f_[1].inverse(), f_[2].inverse());
  }

  friend bool operator==(const ProductWord& a, const ProductWord& b) = default;

  /// Canonical order: shortlex on total length, ties broken factorwise 1<2<3.
  static int compare(const ProductWord& a, const ProductWord& b) noexcept {
    std::size_t la = a.total_length(), lb = b.total_length();
    if (la != lb) return la < lb ? -1 : 1;
    for (int s = 0; s < 3; ++s)
      if (int c = FreeWord::compare(a.f_[s], b.f_[s]); c != 0) return c;
    return 0;
  }

  friend bool operator<(const ProductWord& a, const ProductWord& b) noexcept {
    return compare(a, b) < 0;
  }

  /// "[w1|w2|w3]" with the FreeWord text format inside.
  std::string to_string() const {
    return "[" + f_[0].to_string() + "|" + f_[1].to_string() + "|" + f_[2].to_string() + "]";
  }

  static ProductWord parse(std::string_view text) {
    if (text.size() < 2 || text.front() != '[' || text.back() != ']')
      throw std::invalid_argument("product word must be bracketed: " + std::string(text));
    std::string_view body = text.substr(1, text.size() - 2);
    std::array<std::string_view, 3> parts;
    std::size_t start = 0;
    for (int s = 0; s < 3; ++s) {
      std::size_t bar = body.find('|', start);
      if (s < 2) {
        if (bar == std::string_view::npos)
          throw std::invalid_argument("product word needs three factors");
        parts[s] = body.substr(start, bar - start);
        start = bar + 1;
      } else {
        if (body.find('|', start) != std::string_view::npos)
          throw std::invalid_argument("product word has too many factors");
        parts[s] = body.substr(start);
      }
    }
    return ProductWord(FreeWord::parse(parts[0]), FreeWord::parse(parts[1]),
                       FreeWord::parse(parts[2]));
  }

  std::size_t hash() const noexcept {
    std::size_t h = f_[0].hash();
    h = h * 0x9e3779b97f4a7c15ull + f_[1].hash();
    h = h * 0x9e3779b97f4a7c15ull + f_[2].hash();
    return h;
  }

 private:
  std::array<FreeWord, 3> f_;
};

struct ProductWordLess {
  bool operator()(const ProductWord& a, const ProductWord& b) const noexcept {
    return ProductWord::compare(a, b) < 0;
  }
};

struct ProductWordHash {
  std::size_t operator()(const ProductWord& w) const noexcept { return w.hash(); }
};

}  // namespace l2betti
