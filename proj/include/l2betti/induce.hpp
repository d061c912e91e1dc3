#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "l2betti/gr_matrix.hpp"
#include "l2betti/group_ring.hpp"
#include "l2betti/quotient.hpp"

namespace l2betti {

/// Compressed sparse column matrix.
template <class T>
struct SparseCSC {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint64_t> colptr;  // size cols + 1
  std::vector<std::uint32_t> rowidx;  // row indices, sorted within each column
  std::vector<T> values;

  std::size_t nnz() const noexcept { return values.size(); }
};

namespace detail {

/// Factors used by a complex, their orders, and mixed-radix strides for the
/// tensor basis index (factor 1 most significant).
struct MaskLayout {
  std::vector<int> factors;        // ascending factor numbers in the mask
  std::vector<std::size_t> order;  // per used factor
  std::vector<std::size_t> stride;
  std::size_t dim = 1;

  MaskLayout(unsigned mask, const QuotientTriple& t) {
    for (int s = 1; s <= 3; ++s)
      if (mask & (1u << (s - 1))) {
        factors.push_back(s);
        order.push_back(t.factor(s).order());
      }
    stride.assign(factors.size(), 1);
    for (std::size_t i = factors.size(); i-- > 0;) {
      stride[i] = dim;
      dim *= order[i];
    }
  }
};

/// Per-word, per-used-factor left-regular action tables.
struct WordActions {
  std::vector<std::vector<std::uint32_t>> table;  // one per used factor
};

}  // namespace detail

/// Induces a group-ring matrix into the tensor of left regular representations
/// of the used factors.  Block structure: cell index r and basis index v map
/// to row r*D + v, D the representation dimension.  `convert` maps exact
/// rational coefficients to the target scalar.
template <class T, class Convert>
SparseCSC<T> induce_csc(const GroupRingMatrix& m, const QuotientTriple& t, unsigned factor_mask,
                        Convert&& convert) {
  detail::MaskLayout layout(factor_mask, t);
  const std::size_t d = layout.dim;
  const std::size_t nf = layout.factors.size();

  // Action tables for every distinct word appearing in the matrix.
  std::map<ProductWord, detail::WordActions, ProductWordLess> actions;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      for (const auto& [w, coeff] : m.at(r, c).terms()) {
        if (w.factor_mask() & ~factor_mask)
          throw std::invalid_argument("matrix word leaves the complex's factor mask");
        if (actions.contains(w)) continue;
        detail::WordActions a;
        a.table.reserve(nf);
        for (std::size_t i = 0; i < nf; ++i)
          a.table.push_back(t.factor(layout.factors[i]).left_action(w.factor(layout.factors[i])));
        actions.emplace(w, std::move(a));
      }

  SparseCSC<T> out;
  out.rows = m.rows() * d;
  out.cols = m.cols() * d;
  out.colptr.assign(out.cols + 1, 0);

  std::vector<std::size_t> h(nf);
  std::vector<std::pair<std::uint32_t, T>> buf;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    // Precollect the nonzero entries of this cell column.
    std::vector<std::pair<std::size_t, const GroupRingElement*>> entries;
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (!m.at(r, c).is_zero()) entries.emplace_back(r, &m.at(r, c));
    for (std::size_t v = 0; v < d; ++v) {
      std::size_t rem = v;
      for (std::size_t i = 0; i < nf; ++i) {
        h[i] = rem / layout.stride[i];
        rem %= layout.stride[i];
      }
      buf.clear();
      for (const auto& [r, gre] : entries)
        for (const auto& [w, coeff] : gre->terms()) {
          const detail::WordActions& a = actions.at(w);
          std::size_t target = 0;
          for (std::size_t i = 0; i < nf; ++i) target += a.table[i][h[i]] * layout.stride[i];
          buf.emplace_back(static_cast<std::uint32_t>(r * d + target), convert(coeff));
        }
      std::sort(buf.begin(), buf.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      std::size_t write = 0;
      for (std::size_t i = 0; i < buf.size();) {
        std::uint32_t row = buf[i].first;
        T acc = buf[i].second;
        for (++i; i < buf.size() && buf[i].first == row; ++i) acc += buf[i].second;
        if (!(acc == T{})) buf[write++] = {row, acc};
      }
      for (std::size_t i = 0; i < write; ++i) {
        out.rowidx.push_back(buf[i].first);
        out.values.push_back(buf[i].second);
      }
      out.colptr[c * d + v + 1] = out.rowidx.size();
    }
  }
  return out;
}

inline SparseCSC<double> induce_double(const GroupRingMatrix& m, const QuotientTriple& t,
                                       unsigned factor_mask) {
  return induce_csc<double>(m, t, factor_mask, [](const Rational& q) { return q.get_d(); });
}

inline SparseCSC<Rational> induce_rational(const GroupRingMatrix& m, const QuotientTriple& t,
                                           unsigned factor_mask) {
  return induce_csc<Rational>(m, t, factor_mask, [](const Rational& q) { return q; });
}

/// Integer induction: every cell column is scaled by the lcm of its entry
/// denominators (column scaling does not change the rank).  Throws if a
/// scaled numerator leaves the int64 range.
inline SparseCSC<std::int64_t> induce_scaled_int64(const GroupRingMatrix& m,
                                                   const QuotientTriple& t,
                                                   unsigned factor_mask) {
  std::vector<mpz_class> scale(m.cols(), 1);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    mpz_class l = 1;
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (const auto& [w, coeff] : m.at(r, c).terms())
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), coeff.get_den().get_mpz_t());
    scale[c] = l;
  }
  std::size_t col = 0;
  GroupRingMatrix scaled = m;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    Rational f(scale[c]);
    for (std::size_t r = 0; r < m.rows(); ++r) scaled.at(r, c) = f * m.at(r, c);
    ++col;
  }
  return induce_csc<std::int64_t>(scaled, t, factor_mask, [](const Rational& q) {
    if (q.get_den() != 1) throw std::logic_error("scaling left a non-integer");
    if (!q.get_num().fits_slong_p()) throw std::overflow_error("induced value exceeds int64");
    long v = q.get_num().get_si();
    if (v > (1ll << 40) || v < -(1ll << 40)) throw std::overflow_error("induced value too large");
    return static_cast<std::int64_t>(v);
  });
}

/// lambda(x) applied to the basis vector at the identity: the coefficient
/// vector of x folded through the quotient (length = representation dim).
inline std::vector<double> induced_identity_column(const GroupRingElement& x,
                                                   const QuotientTriple& t, unsigned factor_mask) {
  detail::MaskLayout layout(factor_mask, t);
  std::vector<double> v(layout.dim, 0.0);
  for (const auto& [w, coeff] : x.terms()) {
    if (w.factor_mask() & ~factor_mask)
      throw std::invalid_argument("element word leaves the factor mask");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < layout.factors.size(); ++i) {
      const FiniteQuotient& q = t.factor(layout.factors[i]);
      idx += q.index_of(q.eval(w.factor(layout.factors[i]))) * layout.stride[i];
    }
    v[idx] += coeff.get_d();
  }
  return v;
}

/// l2 norm of lambda(x) delta_e at the given scale (the tau-norm of x after
/// folding through the quotient).
inline double folded_l2_norm(const GroupRingElement& x, const QuotientTriple& t,
                             unsigned factor_mask) {
  double s = 0;
  for (double v : induced_identity_column(x, t, factor_mask)) s += v * v;
  return std::sqrt(s);
}

}  // namespace l2betti
