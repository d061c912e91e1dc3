#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "l2betti/gr_matrix.hpp"
#include "l2betti/group_ring.hpp"

namespace l2betti {

/// A finite free chain complex over the group ring: per-degree ranks, cell
/// labels, and boundary matrices boundary(p): C_p -> C_{p-1} under the
/// column-vector convention.  factor_mask records which of the three free
/// factors act (bit k-1 for factor k).
class ChainComplex {
 public:
  std::string name;
  unsigned factor_mask = 0;
  std::vector<std::size_t> degrees;               // ranks for degree 0..top
  std::vector<std::vector<std::string>> labels;   // labels[p], size degrees[p]

  std::size_t top_degree() const { return degrees.empty() ? 0 : degrees.size() - 1; }

  const GroupRingMatrix& boundary(std::size_t p) const {
    if (p < 1 || p > boundaries_.size()) throw std::out_of_range("boundary degree");
    return boundaries_[p - 1];
  }

  GroupRingMatrix& boundary(std::size_t p) {
    if (p < 1 || p > boundaries_.size()) throw std::out_of_range("boundary degree");
    return boundaries_[p - 1];
  }

  void set_boundaries(std::vector<GroupRingMatrix> b) { boundaries_ = std::move(b); }

  long long euler_characteristic() const {
    long long chi = 0;
    for (std::size_t p = 0; p < degrees.size(); ++p)
      chi += (p % 2 ? -1 : 1) * static_cast<long long>(degrees[p]);
    return chi;
  }

  /// Checks shapes, label counts, and d o d = 0 exactly over the group ring.
  void validate() const {
    if (degrees.empty()) throw std::logic_error("complex has no degrees");
    if (labels.size() != degrees.size()) throw std::logic_error("label table shape");
    for (std::size_t p = 0; p < degrees.size(); ++p)
      if (labels[p].size() != degrees[p]) throw std::logic_error("label count mismatch");
    if (boundaries_.size() + 1 != degrees.size()) throw std::logic_error("boundary count");
    for (std::size_t p = 1; p <= boundaries_.size(); ++p) {
      const GroupRingMatrix& d = boundary(p);
      if (d.rows() != degrees[p - 1] || d.cols() != degrees[p])
        throw std::logic_error("boundary shape at degree " + std::to_string(p));
    }
    for (std::size_t p = 1; p + 1 <= boundaries_.size(); ++p)
      if (!(boundary(p) * boundary(p + 1)).is_zero())
        throw std::logic_error("d^2 != 0 at degree " + std::to_string(p + 1));
  }

  friend bool operator==(const ChainComplex& a, const ChainComplex& b) {
    return a.name == b.name && a.factor_mask == b.factor_mask && a.degrees == b.degrees &&
           a.labels == b.labels && a.boundaries_ == b.boundaries_;
  }

 private:
  std::vector<GroupRingMatrix> boundaries_;  // boundaries_[p-1] : C_p -> C_{p-1}
};

/// The one-point complex (a single 0-cell, no group action).
inline ChainComplex point_complex() {
  ChainComplex c;
  c.name = "pt";
  c.degrees = {1};
  c.labels = {{"pt"}};
  c.set_boundaries({});
  return c;
}

/// The wedge of two circles for the given free factor: one 0-cell, two
/// 1-cells with boundary (a^f_i - 1) e0.
inline ChainComplex build_B(int factor) {
  ChainComplex c;
  c.name = "B" + std::to_string(factor);
  c.factor_mask = 1u << (factor - 1);
  c.degrees = {1, 2};
  c.labels = {{"e0"},
              {"e^" + std::to_string(factor) + "_1", "e^" + std::to_string(factor) + "_2"}};
  GroupRingMatrix d1(1, 2);
  for (int i = 1; i <= 2; ++i)
    d1.at(0, i - 1) = GroupRingElement::generator(factor, i) - GroupRingElement::one();
  c.set_boundaries({std::move(d1)});
  return c;
}

/// Canonical order of the 12 commutator relators (a^k_i, a^l_j): pairs
/// (k,l) in {(1,2),(1,3),(2,3)} lexicographic, then (i,j) lexicographic.
struct RelatorIndex {
  int k, l, i, j;
};

inline std::vector<RelatorIndex> relator_order() {
  std::vector<RelatorIndex> out;
  for (int k = 1; k <= 3; ++k)
    for (int l = k + 1; l <= 3; ++l)
      for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) out.push_back({k, l, i, j});
  return out;
}

/// The presentation 2-complex of pi = F x F x F with the fixed 6-generator,
/// 12-commutator-relator presentation: one 0-cell, six 1-cells e^k_i, twelve
/// 2-cells e^kl_ij.  Boundaries come from Fox derivatives of the relators.
inline ChainComplex build_X() {
  ChainComplex c;
  c.name = "X";
  c.factor_mask = 0b111;
  c.degrees = {1, 6, 12};
  c.labels.resize(3);
  c.labels[0] = {"e0"};
  for (int k = 1; k <= 3; ++k)
    for (int i = 1; i <= 2; ++i)
      c.labels[1].push_back("e^" + std::to_string(k) + "_" + std::to_string(i));

  GroupRingMatrix d1(1, 6);
  for (int k = 1; k <= 3; ++k)
    for (int i = 1; i <= 2; ++i)
      d1.at(0, generator_slot(k, i)) =
          GroupRingElement::generator(k, i) - GroupRingElement::one();

  GroupRingMatrix d2(6, 12);
  std::size_t col = 0;
  for (const RelatorIndex& r : relator_order()) {
    c.labels[2].push_back("e^" + std::to_string(r.k) + std::to_string(r.l) + "_" +
                          std::to_string(r.i) + std::to_string(r.j));
    std::vector<GeneratorLetter> relator = {{r.k, r.i, +1}, {r.l, r.j, +1},
                                            {r.k, r.i, -1}, {r.l, r.j, -1}};
    auto fox = fox_boundary(relator);
    for (int slot = 0; slot < 6; ++slot) d2.at(slot, col) = fox[slot];
    ++col;
  }
  c.set_boundaries({std::move(d1), std::move(d2)});
  return c;
}

/// Index (i,j,k) of the pi_2 basis element x_ijk, (i,j,k) lexicographic.
inline std::vector<std::array<int, 3>> pi2_index_order() {
  std::vector<std::array<int, 3>> out;
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      for (int k = 1; k <= 2; ++k) out.push_back({i, j, k});
  return out;
}

/// Position of the 2-cell e^kl_ij in the canonical relator order.
inline std::size_t two_cell_slot(int k, int l, int i, int j) {
  static const std::vector<RelatorIndex> order = relator_order();
  for (std::size_t c = 0; c < order.size(); ++c)
    if (order[c].k == k && order[c].l == l && order[c].i == i && order[c].j == j) return c;
  throw std::logic_error("bad 2-cell index");
}

/// The free basis of pi_2(X) as degree-2 chains, one column per x_ijk:
///   x_ijk = (a^1_i - 1) e^23_jk - (a^2_j - 1) e^13_ik + (a^3_k - 1) e^12_ij.
inline GroupRingMatrix pi2_basis() {
  GroupRingMatrix m(12, 8);
  std::size_t col = 0;
  for (auto [i, j, k] : pi2_index_order()) {
    m.at(two_cell_slot(2, 3, j, k), col) =
        GroupRingElement::generator(1, i) - GroupRingElement::one();
    m.at(two_cell_slot(1, 3, i, k), col) =
        -(GroupRingElement::generator(2, j) - GroupRingElement::one());
    m.at(two_cell_slot(1, 2, i, j), col) =
        GroupRingElement::generator(3, k) - GroupRingElement::one();
    ++col;
  }
  return m;
}

/// The Eilenberg-MacLane complex K = B x B x B: X extended by eight 3-cells
/// e_ijk whose boundaries are the pi_2 basis columns.
inline ChainComplex build_K() {
  ChainComplex c = build_X();
  c.name = "K";
  c.degrees.push_back(8);
  c.labels.emplace_back();
  for (auto [i, j, k] : pi2_index_order())
    c.labels[3].push_back("e_" + std::to_string(i) + std::to_string(j) + std::to_string(k));
  std::vector<GroupRingMatrix> b = {c.boundary(1), c.boundary(2), pi2_basis()};
  c.set_boundaries(std::move(b));
  return c;
}

/// Wedges one 2-sphere onto C: a fresh degree-2 cell "s2" with zero boundary.
inline ChainComplex wedge_sphere(const ChainComplex& input) {
  if (input.top_degree() < 2) throw std::invalid_argument("wedge_sphere needs degrees through 2");
  ChainComplex c = input;
  c.name = input.name + "vS2";
  c.degrees[2] += 1;
  c.labels[2].push_back("s2");
  std::vector<GroupRingMatrix> b;
  for (std::size_t p = 1; p <= input.top_degree(); ++p) b.push_back(input.boundary(p));
  GroupRingMatrix d2(b[1].rows(), b[1].cols() + 1);
  for (std::size_t r = 0; r < b[1].rows(); ++r)
    for (std::size_t cc = 0; cc < b[1].cols(); ++cc) d2.at(r, cc) = b[1].at(r, cc);
  b[1] = std::move(d2);
  if (b.size() >= 3) {
    GroupRingMatrix d3(b[2].rows() + 1, b[2].cols());
    for (std::size_t r = 0; r < b[2].rows(); ++r)
      for (std::size_t cc = 0; cc < b[2].cols(); ++cc) d3.at(r, cc) = b[2].at(r, cc);
    b[2] = std::move(d3);
  }
  c.set_boundaries(std::move(b));
  return c;
}

/// Attaches m 3-cells to X1 = X v S^2 along the degree-2 cycles described by
/// gamma: a 9 x m matrix of coordinates in the basis {x_111..x_222, s2} of
/// pi_2(X1).  Every column is a cycle by construction; d^2 = 0 is re-checked
/// exactly anyway.
inline ChainComplex attach_cells(const ChainComplex& x1, const GroupRingMatrix& gamma) {
  if (gamma.rows() != 9)
    throw std::invalid_argument("attaching matrix must have 9 rows (got " +
                                std::to_string(gamma.rows()) + ")");
  if (x1.top_degree() != 2 || x1.degrees != std::vector<std::size_t>{1, 6, 13})
    throw std::invalid_argument("attach_cells expects the complex X v S^2");
  const GroupRingMatrix basis = pi2_basis();
  const std::size_t m = gamma.cols();
  GroupRingMatrix d3(13, m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t r = 0; r < 12; ++r) {
      GroupRingElement e;
      for (std::size_t b = 0; b < 8; ++b) {
        if (basis.at(r, b).is_zero() || gamma.at(b, c).is_zero()) continue;
        e += basis.at(r, b) * gamma.at(b, c);
      }
      d3.at(r, c) = std::move(e);
    }
    d3.at(12, c) = gamma.at(8, c);
  }
  ChainComplex y = x1;
  y.name = "Y";
  y.degrees.push_back(m);
  y.labels.emplace_back();
  for (std::size_t c = 0; c < m; ++c) y.labels[3].push_back("y3_" + std::to_string(c + 1));
  std::vector<GroupRingMatrix> b = {x1.boundary(1), x1.boundary(2), std::move(d3)};
  y.set_boundaries(std::move(b));
  if (!(y.boundary(2) * y.boundary(3)).is_zero())
    throw std::logic_error("attach_cells produced d^2 != 0");
  return y;
}

/// Tensor product of chain complexes over disjoint factor sets, with the
/// Koszul sign d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy.  Degree-n cells are
/// ordered by left degree descending, then left index, then right index; this
/// makes ((B1 (x) B2) (x) B3) reproduce build_K entrywise.
inline ChainComplex tensor_complex(const ChainComplex& a, const ChainComplex& b) {
  if (a.factor_mask & b.factor_mask)
    throw std::invalid_argument("tensor factors must act through disjoint free factors");
  ChainComplex c;
  c.name = a.name + "x" + b.name;
  c.factor_mask = a.factor_mask | b.factor_mask;
  const std::size_t ta = a.top_degree(), tb = b.top_degree();
  const std::size_t top = ta + tb;
  c.degrees.assign(top + 1, 0);
  c.labels.assign(top + 1, {});

  // block_start[n][p]: first column index of the (p, n-p) block in degree n.
  std::vector<std::vector<std::size_t>> block_start(top + 1);
  for (std::size_t n = 0; n <= top; ++n) {
    block_start[n].assign(ta + 2, 0);
    std::size_t pos = 0;
    for (std::size_t p = std::min(n, ta) + 1; p-- > 0;) {
      std::size_t q = n - p;
      block_start[n][p] = pos;
      if (q <= tb) {
        pos += a.degrees[p] * b.degrees[q];
        for (std::size_t ia = 0; ia < a.degrees[p]; ++ia)
          for (std::size_t ib = 0; ib < b.degrees[q]; ++ib)
            c.labels[n].push_back(a.labels[p][ia] + "*" + b.labels[q][ib]);
      }
      if (p == 0) break;
    }
    c.degrees[n] = pos;
  }
  auto index = [&](std::size_t n, std::size_t p, std::size_t ia, std::size_t ib) {
    return block_start[n][p] + ia * b.degrees[n - p] + ib;
  };

  std::vector<GroupRingMatrix> bnd;
  for (std::size_t n = 1; n <= top; ++n) {
    GroupRingMatrix d(c.degrees[n - 1], c.degrees[n]);
    for (std::size_t p = std::min(n, ta) + 1; p-- > 0;) {
      std::size_t q = n - p;
      if (q > tb) {
        if (p == 0) break;
        continue;
      }
      for (std::size_t ia = 0; ia < a.degrees[p]; ++ia)
        for (std::size_t ib = 0; ib < b.degrees[q]; ++ib) {
          const std::size_t col = index(n, p, ia, ib);
          if (p >= 1) {
            const GroupRingMatrix& da = a.boundary(p);
            for (std::size_t ra = 0; ra < da.rows(); ++ra) {
              if (da.at(ra, ia).is_zero()) continue;
              d.at(index(n - 1, p - 1, ra, ib), col) += da.at(ra, ia);
            }
          }
          if (q >= 1) {
            const GroupRingMatrix& db = b.boundary(q);
            const bool negate = (p % 2) != 0;
            for (std::size_t rb = 0; rb < db.rows(); ++rb) {
              if (db.at(rb, ib).is_zero()) continue;
              if (negate)
                d.at(index(n - 1, p, ia, rb), col) -= db.at(rb, ib);
              else
                d.at(index(n - 1, p, ia, rb), col) += db.at(rb, ib);
            }
          }
        }
      if (p == 0) break;
    }
    bnd.push_back(std::move(d));
  }
  c.set_boundaries(std::move(bnd));
  return c;
}

// ---------------------------------------------------------------------------
// Text serialization.  Round-trips exactly (group-ring entries use the
// canonical element format).
// ---------------------------------------------------------------------------

inline std::string serialize_complex(const ChainComplex& c) {
  std::ostringstream out;
  out << "l2betti-complex v1\n";
  out << "name " << c.name << "\n";
  out << "factors";
  for (int s = 1; s <= 3; ++s)
    if (c.factor_mask & (1u << (s - 1))) out << ' ' << s;
  out << "\n";
  out << "degrees";
  for (std::size_t d : c.degrees) out << ' ' << d;
  out << "\n";
  for (std::size_t p = 0; p < c.labels.size(); ++p) {
    out << "labels " << p << " :";
    for (const std::string& l : c.labels[p]) out << ' ' << l;
    out << "\n";
  }
  for (std::size_t p = 1; p <= c.top_degree(); ++p) {
    const GroupRingMatrix& d = c.boundary(p);
    for (std::size_t r = 0; r < d.rows(); ++r)
      for (std::size_t cc = 0; cc < d.cols(); ++cc)
        if (!d.at(r, cc).is_zero())
          out << "entry " << p << ' ' << r << ' ' << cc << " : " << d.at(r, cc).to_string()
              << "\n";
  }
  out << "end\n";
  return out.str();
}

inline ChainComplex parse_complex(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  ChainComplex c;
  std::vector<GroupRingMatrix> bnd;
  bool have_degrees = false;
  if (!std::getline(in, line) || line != "l2betti-complex v1")
    throw std::invalid_argument("bad complex header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == "end") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "name") {
      ls >> c.name;
    } else if (key == "factors") {
      int s;
      while (ls >> s) c.factor_mask |= 1u << (s - 1);
    } else if (key == "degrees") {
      std::size_t d;
      while (ls >> d) c.degrees.push_back(d);
      c.labels.assign(c.degrees.size(), {});
      for (std::size_t p = 1; p < c.degrees.size(); ++p)
        bnd.emplace_back(c.degrees[p - 1], c.degrees[p]);
      have_degrees = true;
    } else if (key == "labels") {
      if (!have_degrees) throw std::invalid_argument("labels before degrees");
      std::size_t p;
      std::string colon, lab;
      ls >> p >> colon;
      while (ls >> lab) c.labels.at(p).push_back(lab);
    } else if (key == "entry") {
      if (!have_degrees) throw std::invalid_argument("entry before degrees");
      std::size_t p, r, cc;
      std::string colon;
      ls >> p >> r >> cc >> colon;
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
      bnd.at(p - 1).at(r, cc) = GroupRingElement::parse(rest);
    } else {
      throw std::invalid_argument("bad complex line: " + line);
    }
  }
  c.set_boundaries(std::move(bnd));
  c.validate();
  return c;
}

}  // namespace l2betti
