#pragma once

// Test-only oracles, deliberately independent of the library's computation
// paths: dense fraction-free (Bareiss) rank over exact integers, a naive
// permutation-group closure, and a recursive Fox-derivative expander.

#include <gmpxx.h>

#include <map>
#include <set>
#include <vector>

#include "l2betti/group_ring.hpp"
#include "l2betti/induce.hpp"
#include "l2betti/quotient.hpp"

namespace oracle {

using DenseQ = std::vector<std::vector<mpq_class>>;

inline DenseQ from_csc_int(const l2betti::SparseCSC<std::int64_t>& a) {
  DenseQ m(a.rows, std::vector<mpq_class>(a.cols, 0));
  for (std::size_t c = 0; c < a.cols; ++c)
    for (std::uint64_t k = a.colptr[c]; k < a.colptr[c + 1]; ++k)
      m[a.rowidx[k]][c] += mpq_class(static_cast<long>(a.values[k]));
  return m;
}

inline DenseQ from_csc_rational(const l2betti::SparseCSC<l2betti::Rational>& a) {
  DenseQ m(a.rows, std::vector<mpq_class>(a.cols, 0));
  for (std::size_t c = 0; c < a.cols; ++c)
    for (std::uint64_t k = a.colptr[c]; k < a.colptr[c + 1]; ++k)
      m[a.rowidx[k]][c] += a.values[k];
  return m;
}

inline DenseQ multiply(const DenseQ& a, const DenseQ& b) {
  DenseQ r(a.size(), std::vector<mpq_class>(b[0].size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < b[0].size(); ++j) r[i][j] += a[i][k] * b[k][j];
    }
  return r;
}

/// Fraction-free Bareiss elimination rank over the integers (after clearing
/// row denominators).
inline std::size_t bareiss_rank(DenseQ m) {
  if (m.empty() || m[0].empty()) return 0;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::vector<std::vector<mpz_class>> z(rows, std::vector<mpz_class>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    mpz_class l = 1;
    for (std::size_t j = 0; j < cols; ++j)
      mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m[i][j].get_den().get_mpz_t());
    for (std::size_t j = 0; j < cols; ++j) {
      mpq_class v = m[i][j] * mpq_class(l);
      z[i][j] = v.get_num();
    }
  }
  mpz_class prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && z[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(z[piv], z[rank]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        mpz_class t = z[rank][c] * z[i][j] - z[i][c] * z[rank][j];
        mpz_divexact(z[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      z[i][c] = 0;
    }
    prev = z[rank][c];
    ++rank;
  }
  return rank;
}

/// Naive closure: repeatedly multiply all pairs until stable.
inline std::size_t closure_order(const l2betti::Permutation& a, const l2betti::Permutation& b) {
  std::set<l2betti::Permutation> seen = {l2betti::identity_permutation(a.size())};
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<l2betti::Permutation> cur(seen.begin(), seen.end());
    for (const auto& x : cur)
      for (const auto& g : {a, b}) {
        auto y = l2betti::compose(x, g);
        if (seen.insert(y).second) grew = true;
      }
  }
  return seen.size();
}

/// Recursive Fox derivative over the 6-generator alphabet:
/// d(uv) = d(u) + u d(v), d(x) = 1, d(x^-1) = -x^-1.
inline std::array<l2betti::GroupRingElement, 6> fox_recursive(
    const std::vector<l2betti::GeneratorLetter>& word) {
  using namespace l2betti;
  std::array<GroupRingElement, 6> out;
  if (word.empty()) return out;
  if (word.size() == 1) {
    const GeneratorLetter& l = word[0];
    ProductWord g = ProductWord::generator(l.factor, l.gen, l.sign);
    if (l.sign > 0)
      out[generator_slot(l.factor, l.gen)].add_term(ProductWord(), 1);
    else
      out[generator_slot(l.factor, l.gen)].add_term(g, -1);
    return out;
  }
  std::size_t half = word.size() / 2;
  std::vector<GeneratorLetter> u(word.begin(), word.begin() + half);
  std::vector<GeneratorLetter> v(word.begin() + half, word.end());
  auto du = fox_recursive(u), dv = fox_recursive(v);
  GroupRingElement upw = GroupRingElement::one();
  for (const GeneratorLetter& l : u)
    upw = upw * GroupRingElement::monomial(ProductWord::generator(l.factor, l.gen, l.sign), 1);
  for (int s = 0; s < 6; ++s) out[s] = du[s] + upw * dv[s];
  return out;
}

}  // namespace oracle
