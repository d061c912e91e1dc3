#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "l2betti/complexes.hpp"
#include "l2betti/induce.hpp"
#include "l2betti/quotient.hpp"
#include "l2betti/rank.hpp"
#include "l2betti/spectral.hpp"

namespace l2betti {

struct LabOptions {
  RankOptions rank;
  std::size_t lowspec_cap = 1500;   // Laplacian dims above this skip eigenvalue reporting
  std::size_t lowspec_k = 4;
  std::size_t sigma_min_cap = 2600;  // dense SVD cap for the composite check (columns of d3)
  double certify_threshold = 0.05;
  std::uint64_t seed = 1;
};

// ---------------------------------------------------------------------------
// Betti tables by quotient approximation.
// ---------------------------------------------------------------------------

struct BettiRow {
  std::string label;
  std::size_t dimension = 0;                  // representation dimension D
  std::vector<std::size_t> dims;              // Laplacian dimension per degree
  std::vector<std::size_t> kernel;            // per degree
  std::vector<std::string> method;            // rank method per degree >= 1
  std::vector<std::vector<double>> lowest;    // low Laplacian eigenvalues (may be empty)
  double timing_ms = 0;
  bool ok = true;        // solver failures are recorded, not fatal
  std::string error;

  double normalized(std::size_t p) const {
    return static_cast<double>(kernel.at(p)) / static_cast<double>(dimension);
  }

  SpectrumSlice slice(std::size_t p, double tolerance = 1e-9) const {
    SpectrumSlice s;
    s.dim = dims.at(p);
    s.kernel_dim = kernel.at(p);
    s.lowest = p < lowest.size() ? lowest[p] : std::vector<double>{};
    s.tolerance = tolerance;
    s.method = p == 0 || method[p].empty() ? "hodge-rank" : method[p];
    return s;
  }
};

struct DegreeTrend {
  double first_norm = 0, last_norm = 0;
  bool nonincreasing = true;
};

struct BettiTable {
  std::string complex_name;
  long long chi = 0;
  std::vector<BettiRow> rows;       // ordered by (dimension, label)
  std::vector<DegreeTrend> trend;   // per degree
  bool euler_ok = true;
  bool partial = false;  // some rows failed and are marked with their error
};

/// Exact comparison of kernel_a/D_a vs kernel_b/D_b.
inline int compare_normalized(std::size_t ka, std::size_t da, std::size_t kb, std::size_t db) {
  unsigned long long lhs = static_cast<unsigned long long>(ka) * db;
  unsigned long long rhs = static_cast<unsigned long long>(kb) * da;
  return lhs < rhs ? -1 : lhs > rhs ? 1 : 0;
}

inline BettiRow betti_row(const ChainComplex& c, const QuotientTriple& t, const LabOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  BettiRow row;
  row.label = t.label;
  row.dimension = t.dimension(c.factor_mask);
  const std::size_t top = c.top_degree();
  std::vector<std::size_t> rank(top + 2, 0);
  row.method.assign(top + 2, "");
  for (std::size_t p = 1; p <= top; ++p) {
    RankResult r = sparse_rank_cached(induce_scaled_int64(c.boundary(p), t, c.factor_mask),
                                      opt.rank);
    rank[p] = r.rank;
    row.method[p] = r.method;
  }
  for (std::size_t p = 0; p <= top; ++p) {
    const std::size_t dim = c.degrees[p] * row.dimension;
    if (rank[p] + rank[p + 1] > dim) throw std::logic_error("rank exceeds dimension");
    row.dims.push_back(dim);
    row.kernel.push_back(dim - rank[p] - rank[p + 1]);
  }
  row.lowest.assign(top + 1, {});
  for (std::size_t p = 0; p <= top; ++p) {
    if (c.degrees[p] * row.dimension > opt.lowspec_cap) continue;
    LowSpectrum ls = low_spectrum(laplacian(c, p, t), opt.lowspec_k, 1e-9, opt.seed);
    row.lowest[p] = ls.values;
  }
  row.timing_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Per-quotient kernel dimensions of every Laplacian of c, with normalized
/// values and exact Euler bookkeeping.  Rows are ordered by (dimension, label).
inline BettiTable luck_betti(const ChainComplex& c, const std::vector<QuotientTriple>& family,
                             const LabOptions& opt = {}) {
  if (family.empty()) throw std::invalid_argument("luck_betti needs a nonempty family");
  BettiTable table;
  table.complex_name = c.name;
  table.chi = c.euler_characteristic();
  for (const QuotientTriple& t : family) {
    try {
      table.rows.push_back(betti_row(c, t, opt));
    } catch (const std::exception& e) {
      BettiRow failed;
      failed.label = t.label;
      failed.dimension = t.dimension(c.factor_mask);
      failed.kernel.assign(c.top_degree() + 1, 0);
      failed.ok = false;
      failed.error = e.what();
      table.rows.push_back(std::move(failed));
      table.partial = true;
    }
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const BettiRow& a, const BettiRow& b) {
    return a.dimension != b.dimension ? a.dimension < b.dimension : a.label < b.label;
  });
  for (const BettiRow& row : table.rows) {
    if (!row.ok) continue;
    long long sum = 0;
    for (std::size_t p = 0; p < row.kernel.size(); ++p)
      sum += (p % 2 ? -1 : 1) * static_cast<long long>(row.kernel[p]);
    if (sum != table.chi * static_cast<long long>(row.dimension)) table.euler_ok = false;
  }
  table.trend.assign(c.top_degree() + 1, {});
  for (std::size_t p = 0; p <= c.top_degree(); ++p) {
    DegreeTrend& tr = table.trend[p];
    tr.first_norm = table.rows.front().normalized(p);
    tr.last_norm = table.rows.back().normalized(p);
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
      if (!table.rows[i].ok || !table.rows[i + 1].ok) continue;
      if (compare_normalized(table.rows[i + 1].kernel[p], table.rows[i + 1].dimension,
                             table.rows[i].kernel[p], table.rows[i].dimension) > 0)
        tr.nonincreasing = false;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Hopf-sequence dimension accounting: dim h2(X) = 8 - dim h3(pi), with
// asymptotic targets 7 = 8 - 1.
// ---------------------------------------------------------------------------

struct HopfRow {
  std::string label;
  std::size_t dimension = 0;
  std::size_t b2_x = 0, b3_k = 0;
  double b2_x_normalized = 0, eight_minus_b3_k = 0, deviation = 0;
};

struct HopfReport {
  std::vector<HopfRow> rows;
  bool deviation_shrinks = false;  // strictly smaller at the largest quotient
  bool degenerate = false;         // no degree-2 cells: the accounting is empty
  double target_b2 = 7.0, target_b3 = 1.0;
};

inline HopfReport hopf_accounting(const BettiTable& betti_x, const BettiTable& betti_k) {
  if (betti_x.rows.size() != betti_k.rows.size())
    throw std::invalid_argument("hopf_accounting: mismatched families");
  HopfReport rep;
  for (std::size_t i = 0; i < betti_x.rows.size(); ++i) {
    const BettiRow& rx = betti_x.rows[i];
    const BettiRow& rk = betti_k.rows[i];
    if (rx.label != rk.label || rx.dimension != rk.dimension)
      throw std::invalid_argument("hopf_accounting: mismatched families");
    HopfRow row;
    row.label = rx.label;
    row.dimension = rx.dimension;
    if (rx.kernel.size() <= 2) {
      // No 2-cells: both sides collapse to 0 = 0.
      rep.degenerate = true;
      rep.rows.push_back(row);
      continue;
    }
    row.b2_x = rx.kernel.at(2);
    row.b3_k = rk.kernel.size() > 3 ? rk.kernel.at(3) : 0;
    row.b2_x_normalized = static_cast<double>(row.b2_x) / row.dimension;
    row.eight_minus_b3_k = 8.0 - static_cast<double>(row.b3_k) / row.dimension;
    // |b2/D - (8 - b3/D)| = |b2 + b3 - 8 D| / D, exact in integers.
    long long num = static_cast<long long>(row.b2_x) + static_cast<long long>(row.b3_k) -
                    8ll * static_cast<long long>(row.dimension);
    row.deviation = std::abs(static_cast<double>(num)) / row.dimension;
    rep.rows.push_back(row);
  }
  if (rep.degenerate) return rep;
  if (rep.rows.size() >= 2) {
    const HopfRow& first = rep.rows.front();
    const HopfRow& last = rep.rows.back();
    long long nf = std::llabs(static_cast<long long>(first.b2_x) +
                              static_cast<long long>(first.b3_k) - 8ll * first.dimension);
    long long nl = std::llabs(static_cast<long long>(last.b2_x) +
                              static_cast<long long>(last.b3_k) - 8ll * last.dimension);
    // nl/Dl < nf/Df exactly.
    rep.deviation_shrinks = static_cast<unsigned long long>(nl) * first.dimension <
                            static_cast<unsigned long long>(nf) * last.dimension;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Kunneth convolution check.
// ---------------------------------------------------------------------------

struct KunnethRow {
  std::string label;
  std::vector<std::size_t> product_betti;
  std::vector<std::size_t> convolution;
  bool equal = true;
};

struct KunnethReport {
  std::string left, right;
  std::vector<KunnethRow> rows;
  bool all_equal = true;
};

/// For every quotient: per-degree kernel dims of tensor_complex(c, c') must
/// equal the convolution of the factors' kernel dims, exactly.
inline KunnethReport kunneth_check(const ChainComplex& a, const ChainComplex& b,
                                   const std::vector<QuotientTriple>& family,
                                   const LabOptions& opt = {}) {
  ChainComplex prod = tensor_complex(a, b);
  BettiTable ta = luck_betti(a, family, opt);
  BettiTable tb = luck_betti(b, family, opt);
  BettiTable tp = luck_betti(prod, family, opt);
  KunnethReport rep;
  rep.left = a.name;
  rep.right = b.name;
  for (std::size_t i = 0; i < tp.rows.size(); ++i) {
    KunnethRow row;
    row.label = tp.rows[i].label;
    row.product_betti = tp.rows[i].kernel;
    row.convolution.assign(prod.top_degree() + 1, 0);
    for (std::size_t n = 0; n <= prod.top_degree(); ++n)
      for (std::size_t p = 0; p <= n; ++p) {
        if (p > a.top_degree() || n - p > b.top_degree()) continue;
        row.convolution[n] += ta.rows[i].kernel[p] * tb.rows[i].kernel[n - p];
      }
    row.equal = row.product_betti == row.convolution;
    rep.all_equal = rep.all_equal && row.equal;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Proposition-D kernel elements u1, u2 with u1(a1-1) + u2(a2-1) = 0.
// ---------------------------------------------------------------------------

struct FactorKernelPair {
  GroupRingElement u1, u2;        // lifted to the factor's words
  double residual = 0;            // |d u| in the finite model
  double symbolic_residual = 0;   // l2(F) norm of u1(a1-1)+u2(a2-1) as group-ring elements
  double identity_coefficient = 0;  // of u1
  std::size_t kernel_dim = 0;
  double projector_idempotence = -1, projector_symmetry = -1, contour_delta = -1;
  std::string scale;
};

struct KernelElements {
  std::array<FactorKernelPair, 3> factor;
  std::string mode;  // "quotient" | "ball"
};

namespace lab_detail {

/// Matrix of right multiplication by (a_i - 1) on C[G].
inline Eigen::MatrixXd right_mult_minus_one(const FiniteQuotient& q, int gen) {
  const std::size_t n = q.order();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const Permutation g = q.eval(FreeWord::generator(gen));
  for (std::size_t h = 0; h < n; ++h) {
    m(q.index_of(compose(q.elements()[h], g)), h) += 1.0;
    m(h, h) -= 1.0;
  }
  return m;
}

inline GroupRingElement lift_factor_function(const Eigen::VectorXd& coeffs,
                                             const FiniteQuotient& q, int factor) {
  GroupRingElement x;
  for (std::size_t h = 0; h < q.order(); ++h) {
    if (coeffs[h] == 0) continue;
    ProductWord w;
    w.factor(factor) = q.rep_word(h);
    x.add_term(w, Rational(coeffs[h]));
  }
  return x;
}

}  // namespace lab_detail

/// Quotient-mode solver for one factor.  `column` = 0 projects (1,0),
/// `column` = 1 projects (0,1); the canonical u-pair is column 0.
inline FactorKernelPair solve_factor_kernel_quotient(const FiniteQuotient& q, int factor,
                                                     int column = 0) {
  const std::size_t n = q.order();
  Eigen::MatrixXd d(n, 2 * n);
  d.block(0, 0, n, n) = lab_detail::right_mult_minus_one(q, 1);
  d.block(0, n, n, n) = lab_detail::right_mult_minus_one(q, 2);
  Eigen::MatrixXd dtd = d.transpose() * d;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> probe(dtd, Eigen::EigenvaluesOnly);
  const double lmax = probe.eigenvalues().maxCoeff();
  double smallest_nonzero = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < probe.eigenvalues().size(); ++i)
    if (probe.eigenvalues()[i] > 1e-9 * std::max(1.0, lmax))
      smallest_nonzero = std::min(smallest_nonzero, probe.eigenvalues()[i]);
  if (!std::isfinite(smallest_nonzero))
    throw std::runtime_error("no isolated zero detected at this scale");
  SpectralProjector proj = spectral_projector(dtd, smallest_nonzero / 2);

  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(2 * n);
  e0[column == 0 ? 0 : n] = 1.0;
  Eigen::VectorXd u = proj.projector * e0;

  FactorKernelPair out;
  out.kernel_dim = proj.kernel_dim;
  out.residual = (d * u).norm();
  out.projector_idempotence = (proj.projector * proj.projector - proj.projector).norm();
  out.projector_symmetry = (proj.projector - proj.projector.transpose()).norm();
  out.contour_delta = proj.contour_delta;
  out.identity_coefficient = u[column == 0 ? 0 : n];
  out.u1 = lab_detail::lift_factor_function(u.head(n), q, factor);
  out.u2 = lab_detail::lift_factor_function(u.tail(n), q, factor);
  out.scale = "quotient:" + q.label();

  GroupRingElement rel =
      out.u1 * (GroupRingElement::generator(factor, 1) - GroupRingElement::one()) +
      out.u2 * (GroupRingElement::generator(factor, 2) - GroupRingElement::one());
  out.symbolic_residual = rel.l2_norm();
  return out;
}

/// Ball-mode solver: the same operator compressed to the radius-r ball of F.
/// The compressed d stays surjective (d d^T inherits the Kesten gap
/// 4 - 2 sqrt(3) under compression), so its kernel is exact at every radius
/// and u = P(1,0) with P = I - d^T (d d^T)^{-1} d.  The Gram solve runs by
/// conjugate gradients on sparse structures, which keeps radius 8
/// (13121 words) cheap.
inline FactorKernelPair solve_factor_kernel_ball(std::size_t radius, int factor) {
  std::vector<FreeWord> ball = free_ball(radius);
  std::unordered_map<FreeWord, std::uint32_t, FreeWordHash> index;
  for (std::size_t i = 0; i < ball.size(); ++i) index.emplace(ball[i], i);
  const std::size_t n = ball.size();

  // d: columns (gen, w) with entries +1 at w*a_gen (if inside the ball) and
  // -1 at w.  Stored column-compressed for matvecs with d and d^T.
  struct Col {
    std::int32_t plus;  // -1 when the target leaves the ball
    std::uint32_t minus;
  };
  std::vector<Col> cols(2 * n);
  for (int gen = 1; gen <= 2; ++gen)
    for (std::size_t w = 0; w < n; ++w) {
      FreeWord t = ball[w] * FreeWord::generator(gen);
      auto it = index.find(t);
      cols[(gen - 1) * n + w] = {it == index.end() ? -1 : static_cast<std::int32_t>(it->second),
                                 static_cast<std::uint32_t>(w)};
    }
  auto apply_d = [&](const std::vector<double>& x, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t c = 0; c < 2 * n; ++c) {
      if (x[c] == 0) continue;
      if (cols[c].plus >= 0) y[cols[c].plus] += x[c];
      y[cols[c].minus] -= x[c];
    }
  };
  auto apply_dt = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t c = 0; c < 2 * n; ++c)
      y[c] = (cols[c].plus >= 0 ? x[cols[c].plus] : 0.0) - x[cols[c].minus];
  };
  auto apply_gram = [&](const std::vector<double>& x, std::vector<double>& y,
                        std::vector<double>& tmp) {
    apply_dt(x, tmp);
    apply_d(tmp, y);
  };

  // rhs = d e0 where e0 is the identity word in the first block.
  std::vector<double> rhs(n, 0.0);
  {
    std::vector<double> e0(2 * n, 0.0);
    e0[0] = 1.0;
    apply_d(e0, rhs);
  }
  // CG on the well-conditioned Gram operator.
  std::vector<double> z(n, 0.0), r = rhs, p = rhs, ap(n), tmp(2 * n);
  double rr = 0;
  for (double v : r) rr += v * v;
  for (int it = 0; it < 500 && rr > 1e-30; ++it) {
    apply_gram(p, ap, tmp);
    double pap = 0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rr2 = 0;
    for (double v : r) rr2 += v * v;
    double beta = rr2 / rr;
    rr = rr2;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  if (rr > 1e-20) throw std::runtime_error("no isolated zero detected at this scale");

  std::vector<double> u(2 * n, 0.0);
  apply_dt(z, u);
  for (auto& v : u) v = -v;
  u[0] += 1.0;  // u = e0 - d^T z

  FactorKernelPair out;
  out.kernel_dim = n;  // 2n minus the full row rank n
  {
    std::vector<double> du(n);
    apply_d(u, du);
    double s = 0;
    for (double v : du) s += v * v;
    out.residual = std::sqrt(s);
  }
  out.identity_coefficient = u[0];
  out.scale = "ball:" + std::to_string(radius);

  GroupRingElement u1, u2;
  for (std::size_t w = 0; w < n; ++w) {
    if (u[w] != 0) {
      ProductWord pw;
      pw.factor(factor) = ball[w];
      u1.add_term(pw, Rational(u[w]));
    }
    if (u[n + w] != 0) {
      ProductWord pw;
      pw.factor(factor) = ball[w];
      u2.add_term(pw, Rational(u[n + w]));
    }
  }
  out.u1 = std::move(u1);
  out.u2 = std::move(u2);
  GroupRingElement rel =
      out.u1 * (GroupRingElement::generator(factor, 1) - GroupRingElement::one()) +
      out.u2 * (GroupRingElement::generator(factor, 2) - GroupRingElement::one());
  out.symbolic_residual = rel.l2_norm();
  return out;
}

/// Kernel elements for all three factors at a common scale.
inline KernelElements solve_kernel_elements_quotient(const FiniteQuotient& q) {
  KernelElements ke;
  ke.mode = "quotient";
  for (int s = 1; s <= 3; ++s) ke.factor[s - 1] = solve_factor_kernel_quotient(q, s);
  return ke;
}

/// Same, with each factor solved at its own quotient.
inline KernelElements solve_kernel_elements_quotient(const QuotientTriple& t) {
  KernelElements ke;
  ke.mode = "quotient";
  for (int s = 1; s <= 3; ++s) ke.factor[s - 1] = solve_factor_kernel_quotient(t.factor(s), s);
  return ke;
}

inline KernelElements solve_kernel_elements_ball(std::size_t radius) {
  KernelElements ke;
  ke.mode = "ball";
  for (int s = 1; s <= 3; ++s) ke.factor[s - 1] = solve_factor_kernel_ball(radius, s);
  return ke;
}

// ---------------------------------------------------------------------------
// The generator y of ker h: y = sum u^1_i u^2_j u^3_k x_ijk.
// ---------------------------------------------------------------------------

struct YElement {
  std::array<GroupRingElement, 8> mu;  // coefficients, (i,j,k) lexicographic
  double residual = 0;                 // norm of the chain at the working scale
};

/// Builds the eight coefficients mu_ijk = u^1_i u^2_j u^3_k and evaluates the
/// norm of the degree-2 chain sum mu_ijk x_ijk at the given working scale
/// (folded through the quotient triple when given, else the symbolic l2 norm).
inline YElement build_y(const KernelElements& ke,
                        const QuotientTriple* working_scale = nullptr) {
  YElement y;
  std::size_t c = 0;
  for (auto [i, j, k] : pi2_index_order()) {
    const GroupRingElement& u1 = i == 1 ? ke.factor[0].u1 : ke.factor[0].u2;
    const GroupRingElement& u2 = j == 1 ? ke.factor[1].u1 : ke.factor[1].u2;
    const GroupRingElement& u3 = k == 1 ? ke.factor[2].u1 : ke.factor[2].u2;
    y.mu[c++] = u1 * u2 * u3;
  }
  const GroupRingMatrix basis = pi2_basis();
  double sq = 0;
  for (std::size_t r = 0; r < 12; ++r) {
    GroupRingElement chain_r;
    for (std::size_t cc = 0; cc < 8; ++cc) {
      if (basis.at(r, cc).is_zero()) continue;
      chain_r += y.mu[cc] * basis.at(r, cc);
    }
    if (working_scale) {
      double v = folded_l2_norm(chain_r, *working_scale, 0b111);
      sq += v * v;
    } else {
      sq += chain_r.l2_norm_sq().get_d();
    }
  }
  y.residual = std::sqrt(sq);
  return y;
}

// ---------------------------------------------------------------------------
// The attaching matrix gamma: eight group-ring columns spanning the
// complement of y-hat inside the 9-coordinate space {x_ijk, s2}.
// ---------------------------------------------------------------------------

struct AttachingMatrix {
  GroupRingMatrix gamma;  // 9 x 8
  std::string mode;       // "rational" | "integer"
  unsigned long scale_n = 1;
  unsigned long denominator_limit = 0;
  std::size_t truncation_radius = 0;
  std::string working_label;
  std::string kernel_scale;
  int dropped_coordinate = -1;
  double sigma_min = 0;  // of the induced gamma at the working scale
};

struct GammaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GammaOptions {
  std::string mode = "rational";       // or "integer"
  unsigned long denominator_limit = 64;
  std::size_t truncation_radius = 2;
  double sigma_min_floor = 1e-6;
};

namespace lab_detail {

/// Dense matrix of lambda(x) at the triple scale.
inline Eigen::MatrixXd induced_dense(const GroupRingElement& x, const QuotientTriple& t,
                                     unsigned mask) {
  detail::MaskLayout layout(mask, t);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(layout.dim, layout.dim);
  std::vector<std::size_t> h(layout.factors.size());
  for (const auto& [w, coeff] : x.terms()) {
    std::vector<std::vector<std::uint32_t>> tables;
    for (std::size_t i = 0; i < layout.factors.size(); ++i)
      tables.push_back(t.factor(layout.factors[i]).left_action(w.factor(layout.factors[i])));
    const double cv = coeff.get_d();
    for (std::size_t v = 0; v < layout.dim; ++v) {
      std::size_t rem = v, target = 0;
      for (std::size_t i = 0; i < layout.factors.size(); ++i) {
        h[i] = rem / layout.stride[i];
        rem %= layout.stride[i];
        target += tables[i][h[i]] * layout.stride[i];
      }
      m(target, v) += cv;
    }
  }
  return m;
}

/// The joint product word of the basis element with index v.
inline ProductWord basis_word(std::size_t v, const QuotientTriple& t, unsigned mask) {
  detail::MaskLayout layout(mask, t);
  ProductWord w;
  std::size_t rem = v;
  for (std::size_t i = 0; i < layout.factors.size(); ++i) {
    std::size_t h = rem / layout.stride[i];
    rem %= layout.stride[i];
    w.factor(layout.factors[i]) = t.factor(layout.factors[i]).rep_word(h);
  }
  return w;
}

}  // namespace lab_detail

/// Assembles the 9x9 complement projector Q1 = I - yh (yh* yh)^{-1} yh* at
/// the working scale, reads back eight of its columns as group-ring elements
/// (dropping the coordinate where y-hat is largest), truncates to the ball,
/// rounds coefficients, and validates the induced column rank.
inline AttachingMatrix construct_gamma(const KernelElements& ke, const QuotientTriple& working,
                                       const GammaOptions& gopt = {}) {
  YElement y = build_y(ke, &working);
  detail::MaskLayout layout(0b111, working);
  const std::size_t d = layout.dim;

  Eigen::MatrixXd yhat(9 * d, d);
  for (std::size_t b = 0; b < 8; ++b)
    yhat.block(b * d, 0, d, d) = lab_detail::induced_dense(y.mu[b], working, 0b111);
  yhat.block(8 * d, 0, d, d).setZero();

  Eigen::MatrixXd sigma = yhat.transpose() * yhat;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ses(sigma);
  const double smax = ses.eigenvalues().maxCoeff();
  if (!(smax > 1e-12))
    throw GammaError("kernel elements are zero: y-hat vanishes at the working scale");
  // The Gram operator is invertible over the C*-algebra but folding through a
  // finite quotient can (and does) introduce kernel vectors, so the projector
  // onto im(yhat) uses the pseudo-inverse.
  Eigen::VectorXd inv_ev = ses.eigenvalues();
  for (Eigen::Index i = 0; i < inv_ev.size(); ++i)
    inv_ev[i] = inv_ev[i] > 1e-10 * smax ? 1.0 / inv_ev[i] : 0.0;
  Eigen::MatrixXd sigma_inv =
      ses.eigenvectors() * inv_ev.asDiagonal() * ses.eigenvectors().transpose();

  // Dropped coordinate: where y-hat carries the most mass.
  int drop = 0;
  Rational best(-1);
  for (int b = 0; b < 8; ++b) {
    Rational m = y.mu[b].l2_norm_sq();
    if (m > best) {
      best = m;
      drop = b;
    }
  }

  AttachingMatrix am;
  am.mode = gopt.mode;
  am.denominator_limit = gopt.denominator_limit;
  am.truncation_radius = gopt.truncation_radius;
  am.working_label = working.label;
  am.kernel_scale = ke.factor[0].scale;
  am.dropped_coordinate = drop;
  am.gamma = GroupRingMatrix(9, 8);

  // Q1 column for coordinate b, evaluated at the identity basis vector.
  std::size_t col = 0;
  for (int b = 0; b < 9; ++b) {
    if (b == drop) continue;
    Eigen::VectorXd q1col;
    if (b == 8) {
      q1col = Eigen::VectorXd::Zero(9 * d);
      q1col[8 * d] = 1.0;  // e9 is orthogonal to y-hat
    } else {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
      e[0] = 1.0;
      Eigen::VectorXd w = sigma_inv * (yhat.block(b * d, 0, d, d).transpose() * e);
      q1col = -(yhat * w);
      q1col[b * d] += 1.0;
    }
    for (int r = 0; r < 9; ++r) {
      GroupRingElement entry;
      for (std::size_t h = 0; h < d; ++h) {
        const double v = q1col[r * d + h];
        if (std::abs(v) < 1e-13) continue;
        entry.add_term(lab_detail::basis_word(h, working, 0b111), Rational(v));
      }
      entry = entry.truncated_to_ball(gopt.truncation_radius).rounded(gopt.denominator_limit);
      am.gamma.at(r, col) = std::move(entry);
    }
    ++col;
  }

  if (gopt.mode == "integer") {
    // Smallest power of ten whose rounding keeps the induced columns far from
    // rank deficiency.
    for (unsigned long n = 1;; n *= 10) {
      GroupRingMatrix candidate(9, 8);
      for (int r = 0; r < 9; ++r)
        for (int c2 = 0; c2 < 8; ++c2) {
          GroupRingElement scaled = (Rational(static_cast<long>(n)) * am.gamma.at(r, c2));
          candidate.at(r, c2) = scaled.rounded(1);
        }
      Eigen::MatrixXd ind(9 * d, 8 * d);
      for (int r = 0; r < 9; ++r)
        for (int c2 = 0; c2 < 8; ++c2)
          ind.block(r * d, c2 * d, d, d) =
              lab_detail::induced_dense(candidate.at(r, c2), working, 0b111);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> g(ind.transpose() * ind,
                                                       Eigen::EigenvaluesOnly);
      const double sigma_min = std::sqrt(std::max(0.0, g.eigenvalues().minCoeff()));
      if (sigma_min > 1e-3) {
        am.gamma = std::move(candidate);
        am.scale_n = n;
        am.sigma_min = sigma_min;
        break;
      }
      if (n >= 1000000000ul) throw GammaError("no integer scale found up to 1e9");
    }
  }

  // Validation: induced gamma must have full column rank at the working scale.
  Eigen::MatrixXd ind(9 * d, 8 * d);
  for (int r = 0; r < 9; ++r)
    for (int c2 = 0; c2 < 8; ++c2)
      ind.block(r * d, c2 * d, d, d) =
          lab_detail::induced_dense(am.gamma.at(r, c2), working, 0b111);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> g(ind.transpose() * ind, Eigen::EigenvaluesOnly);
  am.sigma_min = std::sqrt(std::max(0.0, g.eigenvalues().minCoeff()));
  if (am.sigma_min < gopt.sigma_min_floor)
    throw GammaError("extracted columns are numerically rank-deficient (sigma_min = " +
                     std::to_string(am.sigma_min) + ")");
  return am;
}

/// The negative control: gamma = the eight x_ijk coordinate columns (the s2
/// row stays zero), which reproduces K v S^2.
inline GroupRingMatrix coordinate_gamma() {
  GroupRingMatrix g(9, 8);
  for (int b = 0; b < 8; ++b) g.at(b, b) = GroupRingElement::one();
  return g;
}

// ---------------------------------------------------------------------------
// Certification of Y.
// ---------------------------------------------------------------------------

struct CertifyRow {
  std::string label;
  std::size_t dimension = 0;
  std::vector<std::size_t> kernel;
  bool euler_zero = false;
  double sigma_min_composite = -1;  // smallest singular value of induced d3, -1 if skipped
  double max_normalized = 0;
  std::size_t max_kernel = 0;  // numerator of the max normalized value
  // Structural floor: any exact attaching map factors through pi2(X1), whose
  // induced matrix drops rank by the quotient b3 of K, so
  // b3(Y) >= b3(K) - D always.  excess = b3(Y) - floor measures gamma quality.
  std::size_t tor_floor = 0;
  long long b3_excess = 0;
};

struct CertifyReport {
  std::vector<CertifyRow> rows;  // ordered by (dimension, label)
  std::string verdict;           // PASS | FAIL | INCONCLUSIVE
  std::string reason;
  double threshold = 0.05;
  BettiTable betti;
};

/// PASS: >= 3 rows, every degree's normalized kernel nonincreasing, the
/// per-row max strictly decreasing, final max below the threshold, and the
/// exact chi = 0 identity in every row.  FAIL: the final max is >= 0.5 or the
/// trend is nonincreasing in the wrong direction.  Everything else is
/// INCONCLUSIVE.
inline CertifyReport certify_Y(const ChainComplex& y, const std::vector<QuotientTriple>& family,
                               const LabOptions& opt = {}) {
  if (y.top_degree() != 3 || y.degrees.size() != 4 || y.degrees[2] != 13)
    throw std::invalid_argument("certify_Y expects a complex built by attach_cells");
  CertifyReport rep;
  rep.threshold = opt.certify_threshold;
  rep.betti = luck_betti(y, family, opt);
  for (const BettiRow& br : rep.betti.rows) {
    if (!br.ok) continue;
    CertifyRow row;
    row.label = br.label;
    row.dimension = br.dimension;
    row.kernel = br.kernel;
    long long sum = 0;
    for (std::size_t p = 0; p < br.kernel.size(); ++p)
      sum += (p % 2 ? -1 : 1) * static_cast<long long>(br.kernel[p]);
    row.euler_zero = sum == 0;
    row.max_kernel = *std::max_element(br.kernel.begin(), br.kernel.end());
    row.max_normalized = static_cast<double>(row.max_kernel) / row.dimension;
    QuotientTriple t;
    for (const auto& q : family)
      if (q.label == br.label) t = q;
    {
      RankResult r = sparse_rank_cached(induce_scaled_int64(pi2_basis(), t, 0b111), opt.rank);
      const std::size_t b3k = 8 * br.dimension - r.rank;
      row.tor_floor = b3k > br.dimension ? b3k - br.dimension : 0;
      row.b3_excess = static_cast<long long>(br.kernel[3]) - static_cast<long long>(row.tor_floor);
    }
    if (y.degrees[3] * br.dimension <= opt.sigma_min_cap) {
      SparseCSC<double> d3 = induce_double(y.boundary(3), t, y.factor_mask);
      Eigen::MatrixXd gram = csc_to_dense(gram_csc(d3));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
      row.sigma_min_composite = std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
    }
    rep.rows.push_back(std::move(row));
  }

  if (rep.rows.empty()) {
    rep.verdict = "INCONCLUSIVE";
    rep.reason = "no family rows could be computed";
    return rep;
  }
  bool euler_all = true;
  for (const CertifyRow& r : rep.rows) euler_all = euler_all && r.euler_zero;
  bool per_degree_ok = true;
  for (const DegreeTrend& t : rep.betti.trend) per_degree_ok = per_degree_ok && t.nonincreasing;
  bool max_strict = rep.rows.size() >= 2;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
    if (compare_normalized(rep.rows[i + 1].max_kernel, rep.rows[i + 1].dimension,
                           rep.rows[i].max_kernel, rep.rows[i].dimension) >= 0)
      max_strict = false;
  const CertifyRow& last = rep.rows.back();
  const bool final_below =
      static_cast<double>(last.max_kernel) < rep.threshold * static_cast<double>(last.dimension);

  if (rep.betti.partial) {
    rep.verdict = "INCONCLUSIVE";
    rep.reason = "solver failures in some family rows";
  } else if (!euler_all) {
    rep.verdict = "FAIL";
    rep.reason = "exact Euler identity violated";
  } else if (rep.rows.size() >= 3 && per_degree_ok && max_strict && final_below) {
    rep.verdict = "PASS";
    rep.reason = "normalized kernels decrease and the final row is below threshold";
  } else if (last.max_normalized >= 0.5 || (rep.rows.size() >= 2 && !max_strict && !final_below)) {
    rep.verdict = "FAIL";
    rep.reason = "normalized kernel dimensions do not vanish along the family";
  } else {
    rep.verdict = "INCONCLUSIVE";
    rep.reason = rep.rows.size() < 3 ? "family too small for a verdict"
                                     : "trend decreasing but final row above threshold";
  }
  return rep;
}

}  // namespace l2betti
