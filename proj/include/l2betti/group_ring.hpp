#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "l2betti/words.hpp"

namespace l2betti {

/// Exact rational scalar used by all symbolic arithmetic.
using Rational = mpq_class;

inline std::string rational_to_string(const Rational& q) { return q.get_str(); }

inline Rational rational_parse(std::string_view text) {
  Rational q;
  if (q.set_str(std::string(text), 10) != 0)
    throw std::invalid_argument("bad rational: " + std::string(text));
  q.canonicalize();
  return q;
}

/// Rounds q to the nearest multiple of 1/denominator, ties to even.
inline Rational round_to_denominator(const Rational& q, unsigned long denominator) {
  if (denominator == 0) throw std::invalid_argument("denominator limit must be positive");
  Rational scaled = q * Rational(static_cast<long>(denominator));
  mpz_class num = scaled.get_num(), den = scaled.get_den();
  mpz_class fl, rem;
  mpz_fdiv_qr(fl.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  mpz_class twice = rem * 2;
  int c = cmp(twice, den);
  mpz_class rounded = fl;
  if (c > 0 || (c == 0 && mpz_odd_p(fl.get_mpz_t())))
    rounded = fl + 1;
  Rational out(rounded, mpz_class(static_cast<long>(denominator)));
  out.canonicalize();
  return out;
}

/// A finitely supported Q-linear combination of ProductWords: an element of
/// Q[pi].  No zero coefficients are stored; iteration order is the canonical
/// word order, which fixes the text serialization.
class GroupRingElement {
 public:
  using TermMap = std::map<ProductWord, Rational, ProductWordLess>;

  GroupRingElement() = default;

  static GroupRingElement zero() { return {}; }

  static GroupRingElement one() { return monomial(ProductWord(), 1); }

  static GroupRingElement monomial(ProductWord w, Rational c) {
    GroupRingElement x;
    if (c != 0) x.terms_.emplace(std::move(w), std::move(c));
    return x;
  }

  /// a^k_i as a ring element.
  static GroupRingElement generator(int factor, int i, int sign = +1) {
    return monomial(ProductWord::generator(factor, i, sign), 1);
  }

  const TermMap& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t support_size() const noexcept { return terms_.size(); }

  Rational coefficient(const ProductWord& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const ProductWord& w, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(w, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  GroupRingElement& operator+=(const GroupRingElement& other) {
    for (const auto& [w, c] : other.terms_) add_term(w, c);
    return *this;
  }

  GroupRingElement& operator-=(const GroupRingElement& other) {
    for (const auto& [w, c] : other.terms_) add_term(w, -c);
    return *this;
  }

  friend GroupRingElement operator+(GroupRingElement a, const GroupRingElement& b) {
    a += b;
    return a;
  }

  friend GroupRingElement operator-(GroupRingElement a, const GroupRingElement& b) {
    a -= b;
    return a;
  }

  GroupRingElement operator-() const {
    GroupRingElement r;
    for (const auto& [w, c] : terms_) r.terms_.emplace(w, -c);
    return r;
  }

  friend GroupRingElement operator*(const GroupRingElement& a, const GroupRingElement& b) {
    GroupRingElement r;
    for (const auto& [wa, ca] : a.terms_)
      for (const auto& [wb, cb] : b.terms_) r.add_term(wa * wb, ca * cb);
    return r;
  }

  friend GroupRingElement operator*(const Rational& c, const GroupRingElement& x) {
    GroupRingElement r;
    if (c == 0) return r;
    for (const auto& [w, v] : x.terms_) r.terms_.emplace(w, c * v);
    return r;
  }

  friend bool operator==(const GroupRingElement& a, const GroupRingElement& b) {
    return a.terms_ == b.terms_;
  }

  /// The *-involution sum c_g g  ->  sum c_g g^(-1).
  GroupRingElement involution() const {
    GroupRingElement r;
    for (const auto& [w, c] : terms_) r.terms_.emplace(w.inverse(), c);
    return r;
  }

  /// Sum of all coefficients (the augmentation homomorphism).
  Rational augmentation() const {
    Rational s = 0;
    for (const auto& [w, c] : terms_) s += c;
    return s;
  }

  /// Squared l2 coefficient norm, sum c_g^2 (exact).
  Rational l2_norm_sq() const {
    Rational s = 0;
    for (const auto& [w, c] : terms_) s += c * c;
    return s;
  }

  double l2_norm() const { return std::sqrt(l2_norm_sq().get_d()); }

  /// Drops every term whose word has total length > radius.
  GroupRingElement truncated_to_ball(std::size_t radius) const {
    GroupRingElement r;
    for (const auto& [w, c] : terms_)
      if (w.total_length() <= radius) r.terms_.emplace(w, c);
    return r;
  }

  /// Rounds every coefficient to the nearest multiple of 1/denominator
  /// (ties to even) and drops the terms that round to zero.
  GroupRingElement rounded(unsigned long denominator) const {
    GroupRingElement r;
    for (const auto& [w, c] : terms_) {
      Rational rc = round_to_denominator(c, denominator);
      if (rc != 0) r.terms_.emplace(w, std::move(rc));
    }
    return r;
  }

  /// Canonical text form: "0" or " + "-joined "coeff*[w1|w2|w3]" terms in
  /// canonical word order.  parse(to_string(x)) == x bit-exactly.
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [w, c] : terms_) {
      if (!first) s += " + ";
      first = false;
      s += rational_to_string(c);
      s += '*';
      s += w.to_string();
    }
    return s;
  }

  static GroupRingElement parse(std::string_view text) {
    GroupRingElement x;
    if (text == "0") return x;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t next = text.find(" + ", pos);
      std::string_view term =
          text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
      std::size_t star = term.find('*');
      if (star == std::string_view::npos)
        throw std::invalid_argument("bad group-ring term: " + std::string(term));
      x.add_term(ProductWord::parse(term.substr(star + 1)), rational_parse(term.substr(0, star)));
      if (next == std::string_view::npos) break;
      pos = next + 3;
    }
    return x;
  }

 private:
  TermMap terms_;
};

/// A letter of the fixed 6-generator presentation of pi: generator a^factor_gen
/// raised to sign.
struct GeneratorLetter {
  int factor;  // 1..3
  int gen;     // 1..2
  int sign;    // +-1
};

/// Index of a^k_i in the canonical generator order
/// (a^1_1, a^1_2, a^2_1, a^2_2, a^3_1, a^3_2).
constexpr int generator_slot(int factor, int gen) { return (factor - 1) * 2 + (gen - 1); }

/// Fox free-derivative coefficients of a relator word in the 6 generators,
/// projected into Q[pi]: the vector (dr/da^1_1, ..., dr/da^3_2).  These are
/// the cellular boundary coefficients of the 2-cell attached along r.
inline std::array<GroupRingElement, 6> fox_boundary(std::span<const GeneratorLetter> relator) {
  std::array<GroupRingElement, 6> out;
  ProductWord prefix;
  for (const GeneratorLetter& l : relator) {
    if (l.factor < 1 || l.factor > 3 || l.gen < 1 || l.gen > 2 || (l.sign != 1 && l.sign != -1))
      throw std::invalid_argument("bad relator letter");
    ProductWord g = ProductWord::generator(l.factor, l.gen, l.sign);
    int slot = generator_slot(l.factor, l.gen);
    if (l.sign > 0) {
      out[slot].add_term(prefix, 1);
    } else {
      out[slot].add_term(prefix * g, -1);
    }
    prefix = prefix * g;
  }
  return out;
}

inline std::array<GroupRingElement, 6> fox_boundary(
    std::initializer_list<GeneratorLetter> relator) {
  return fox_boundary(std::span<const GeneratorLetter>(relator.begin(), relator.size()));
}

}  // namespace l2betti
