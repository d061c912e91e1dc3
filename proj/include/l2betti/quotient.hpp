#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "l2betti/words.hpp"

namespace l2betti {

/// A permutation of {0..n-1} in one-line notation: p[i] is the image of i.
using Permutation = std::vector<std::uint32_t>;

inline Permutation identity_permutation(std::size_t n) {
  Permutation p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  return p;
}

inline bool is_permutation(const Permutation& p) {
  std::vector<bool> seen(p.size(), false);
  for (std::uint32_t v : p) {
    if (v >= p.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

/// Composition acting on the left: (p * q)(i) = p(q(i)).
inline Permutation compose(const Permutation& p, const Permutation& q) {
  Permutation r(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) r[i] = p[q[i]];
  return r;
}

inline Permutation inverse(const Permutation& p) {
  Permutation r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<std::uint32_t>(i);
  return r;
}

/// One-line text form, 1-based: "2 1 3".
inline std::string permutation_to_string(const Permutation& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(p[i] + 1);
  }
  return s;
}

inline Permutation permutation_parse(std::string_view text) {
  Permutation p;
  std::istringstream in{std::string(text)};
  std::uint32_t v;
  while (in >> v) {
    if (v == 0) throw std::invalid_argument("one-line notation is 1-based");
    p.push_back(v - 1);
  }
  if (!is_permutation(p)) throw std::invalid_argument("not a permutation: " + std::string(text));
  return p;
}

struct PermutationHash {
  std::size_t operator()(const Permutation& p) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (std::uint32_t v : p) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// A finite quotient of one free factor F = <a1, a2>: permutation images of
/// the generators, closed into the subgroup they generate.  Elements are
/// enumerated breadth-first from the identity over the generators and their
/// inverses, each distance layer sorted by one-line lexicographic order; the
/// first element is the identity.  rep_words[i] is the discovery word for
/// element i, used to lift functions on the quotient back to group-ring
/// elements.
class FiniteQuotient {
 public:
  FiniteQuotient() = default;

  FiniteQuotient(Permutation img_a1, Permutation img_a2, std::string label)
      : label_(std::move(label)) {
    if (!is_permutation(img_a1) || !is_permutation(img_a2) || img_a1.size() != img_a2.size() ||
        img_a1.empty())
      throw std::invalid_argument("generator images must be permutations of equal degree");
    degree_ = img_a1.size();
    images_[0] = std::move(img_a1);
    images_[1] = std::move(img_a2);
    close();
  }

  std::size_t degree() const noexcept { return degree_; }
  std::size_t order() const noexcept { return elements_.size(); }
  const std::string& label() const noexcept { return label_; }
  const Permutation& image(int gen) const { return images_.at(gen - 1); }
  const std::vector<Permutation>& elements() const noexcept { return elements_; }
  const FreeWord& rep_word(std::size_t i) const { return rep_words_.at(i); }

  std::uint32_t index_of(const Permutation& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) throw std::logic_error("permutation outside the closed group");
    return it->second;
  }

  /// Image of a free word under a1 -> image(1), a2 -> image(2).
  Permutation eval(const FreeWord& w) const {
    Permutation p = identity_permutation(degree_);
    for (Letter l : w.letters()) {
      const Permutation& g = images_[generator_index(l) - 1];
      p = is_inverse_letter(l) ? compose(p, inverse(g)) : compose(p, g);
    }
    return p;
  }

  /// Element-index permutation of the left regular action of w:
  /// table[h] = index of eval(w) * elements[h].
  std::vector<std::uint32_t> left_action(const FreeWord& w) const {
    Permutation g = eval(w);
    std::vector<std::uint32_t> table(order());
    for (std::size_t h = 0; h < order(); ++h) table[h] = index_of(compose(g, elements_[h]));
    return table;
  }

  /// "label: a1 -> <one-line>, a2 -> <one-line>".
  std::string to_string() const {
    return label_ + ": a1 -> " + permutation_to_string(images_[0]) + ", a2 -> " +
           permutation_to_string(images_[1]);
  }

 private:
  void close() {
    std::vector<Permutation> gens = {images_[0], inverse(images_[0]), images_[1],
                                     inverse(images_[1])};
    Permutation id = identity_permutation(degree_);
    elements_ = {id};
    rep_words_ = {FreeWord()};
    index_.emplace(id, 0);
    // Letters in the canonical order a1 < A1 < a2 < A2, matching gens above.
    const std::array<Letter, 4> letters = {1, -1, 2, -2};
    std::size_t layer_begin = 0;
    while (layer_begin < elements_.size()) {
      std::size_t layer_end = elements_.size();
      std::vector<std::pair<Permutation, FreeWord>> next;
      std::unordered_map<Permutation, std::size_t, PermutationHash> next_seen;
      for (std::size_t i = layer_begin; i < layer_end; ++i)
        for (std::size_t g = 0; g < 4; ++g) {
          Permutation y = compose(elements_[i], gens[g]);
          if (index_.contains(y) || next_seen.contains(y)) continue;
          next_seen.emplace(y, next.size());
          next.emplace_back(std::move(y),
                            rep_words_[i] * FreeWord::generator(generator_index(letters[g]),
                                                                letters[g] > 0 ? +1 : -1));
        }
      std::sort(next.begin(), next.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto& [p, w] : next) {
        index_.emplace(p, elements_.size());
        elements_.push_back(std::move(p));
        rep_words_.push_back(std::move(w));
      }
      layer_begin = layer_end;
    }
  }

  std::size_t degree_ = 0;
  std::array<Permutation, 2> images_;
  std::string label_;
  std::vector<Permutation> elements_;
  std::vector<FreeWord> rep_words_;
  std::unordered_map<Permutation, std::uint32_t, PermutationHash> index_;
};

/// One finite quotient per free factor.  Complexes over a factor subset use
/// only the matching components; the representation dimension is the product
/// of the used factor orders.
struct QuotientTriple {
  std::array<FiniteQuotient, 3> q;
  std::string label;

  const FiniteQuotient& factor(int s) const { return q.at(s - 1); }

  std::size_t dimension(unsigned factor_mask) const {
    std::size_t d = 1;
    for (int s = 0; s < 3; ++s)
      if (factor_mask & (1u << s)) d *= q[s].order();
    return d;
  }

  std::string to_string() const {
    return label + " { " + q[0].to_string() + " ; " + q[1].to_string() + " ; " +
           q[2].to_string() + " }";
  }
};

/// The symmetric-group quotient used by the built-in families:
/// a1 -> (1 2), a2 -> (1 2 ... m) in S_m.
inline FiniteQuotient symmetric_quotient(std::size_t m) {
  if (m < 2) throw std::invalid_argument("symmetric quotient needs degree >= 2");
  Permutation a1 = identity_permutation(m);
  std::swap(a1[0], a1[1]);
  Permutation a2(m);
  for (std::size_t i = 0; i < m; ++i) a2[i] = static_cast<std::uint32_t>((i + 1) % m);
  return FiniteQuotient(a1, a2, "sym" + std::to_string(m));
}

namespace detail {

inline QuotientTriple diagonal_triple(std::size_t m) {
  QuotientTriple t;
  t.q = {symmetric_quotient(m), symmetric_quotient(m), symmetric_quotient(m)};
  t.label = "sym" + std::to_string(m);
  return t;
}

inline Permutation random_permutation(std::size_t n, std::mt19937_64& rng) {
  Permutation p = identity_permutation(n);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> dist(0, i - 1);
    std::swap(p[i - 1], p[dist(rng)]);
  }
  return p;
}

inline void parse_family_part(std::string_view part, std::uint64_t seed,
                              std::vector<QuotientTriple>& out) {
  auto fail = [&] {
    throw std::invalid_argument("bad family descriptor: '" + std::string(part) +
                                "' (expected sym:A..B, sym:M, sym:M1,M2,M3 or random:n,count)");
  };
  auto parse_num = [&](std::string_view s) -> std::size_t {
    if (s.empty()) fail();
    std::size_t v = 0;
    for (char ch : s) {
      if (ch < '0' || ch > '9') fail();
      v = v * 10 + static_cast<std::size_t>(ch - '0');
    }
    return v;
  };
  if (part.starts_with("sym:")) {
    std::string_view body = part.substr(4);
    if (auto dots = body.find(".."); dots != std::string_view::npos) {
      std::size_t a = parse_num(body.substr(0, dots));
      std::size_t b = parse_num(body.substr(dots + 2));
      if (a < 2 || b < a) fail();
      for (std::size_t m = a; m <= b; ++m) out.push_back(diagonal_triple(m));
    } else if (auto comma = body.find(','); comma != std::string_view::npos) {
      std::array<std::size_t, 3> m{};
      std::size_t pos = 0;
      for (int s = 0; s < 3; ++s) {
        std::size_t next = s < 2 ? body.find(',', pos) : body.size();
        if (next == std::string_view::npos) fail();
        m[s] = parse_num(body.substr(pos, next - pos));
        pos = next + 1;
      }
      QuotientTriple t;
      t.q = {symmetric_quotient(m[0]), symmetric_quotient(m[1]), symmetric_quotient(m[2])};
      t.label = "sym" + std::to_string(m[0]) + "x" + std::to_string(m[1]) + "x" +
                std::to_string(m[2]);
      out.push_back(std::move(t));
    } else {
      out.push_back(diagonal_triple(parse_num(body)));
    }
  } else if (part.starts_with("random:")) {
    std::string_view body = part.substr(7);
    auto comma = body.find(',');
    if (comma == std::string_view::npos) fail();
    std::size_t n = parse_num(body.substr(0, comma));
    std::size_t count = parse_num(body.substr(comma + 1));
    if (n < 1 || count < 1) fail();
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (n + 1)));
    for (std::size_t i = 0; i < count; ++i) {
      QuotientTriple t;
      for (int s = 0; s < 3; ++s) {
        Permutation p1 = random_permutation(n, rng);
        Permutation p2 = random_permutation(n, rng);
        t.q[s] = FiniteQuotient(std::move(p1), std::move(p2),
                                "rand" + std::to_string(n) + "#" + std::to_string(i) + "f" +
                                    std::to_string(s + 1));
      }
      t.label = "rand" + std::to_string(n) + "#" + std::to_string(i);
      out.push_back(std::move(t));
    }
  } else {
    fail();
  }
}

}  // namespace detail

/// Parses a family descriptor into quotient triples.  Grammar: '+'-joined
/// parts, each "sym:A..B" (diagonal symmetric triples for m = A..B),
/// "sym:M" (one diagonal triple), "sym:M1,M2,M3" (one mixed triple), or
/// "random:n,count" (seeded random permutation pairs of degree n).  The
/// result is deterministic given (spec, seed).
inline std::vector<QuotientTriple> quotient_family(std::string_view spec, std::uint64_t seed) {
  std::vector<QuotientTriple> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t plus = spec.find('+', pos);
    std::string_view part =
        spec.substr(pos, plus == std::string_view::npos ? std::string_view::npos : plus - pos);
    if (part.empty())
      throw std::invalid_argument("empty family descriptor part in '" + std::string(spec) + "'");
    detail::parse_family_part(part, seed, out);
    if (plus == std::string_view::npos) break;
    pos = plus + 1;
  }
  return out;
}

}  // namespace l2betti
