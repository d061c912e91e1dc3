#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "l2betti/complexes.hpp"
#include "l2betti/induce.hpp"
#include "l2betti/modp.hpp"
#include "l2betti/rank.hpp"

namespace l2betti {

// ---------------------------------------------------------------------------
// Small sparse helpers (CSC, double or int64 scalars).
// ---------------------------------------------------------------------------

template <class T>
SparseCSC<T> transpose_csc(const SparseCSC<T>& a) {
  SparseCSC<T> r;
  r.rows = a.cols;
  r.cols = a.rows;
  r.colptr.assign(a.rows + 1, 0);
  for (std::uint32_t i : a.rowidx) ++r.colptr[i + 1];
  for (std::size_t i = 0; i < a.rows; ++i) r.colptr[i + 1] += r.colptr[i];
  r.rowidx.resize(a.nnz());
  r.values.resize(a.nnz());
  std::vector<std::uint64_t> next(r.colptr.begin(), r.colptr.end() - 1);
  for (std::size_t c = 0; c < a.cols; ++c)
    for (std::uint64_t k = a.colptr[c]; k < a.colptr[c + 1]; ++k) {
      std::uint64_t slot = next[a.rowidx[k]]++;
      r.rowidx[slot] = static_cast<std::uint32_t>(c);
      r.values[slot] = a.values[k];
    }
  return r;
}

/// A^T A for a CSC matrix.
template <class T>
SparseCSC<T> gram_csc(const SparseCSC<T>& a) {
  SparseCSC<T> at = transpose_csc(a);  // rows of a as columns
  SparseCSC<T> r;
  r.rows = a.cols;
  r.cols = a.cols;
  r.colptr.assign(a.cols + 1, 0);
  std::vector<T> work(a.cols, T{});
  std::vector<std::uint32_t> touched;
  for (std::size_t j = 0; j < a.cols; ++j) {
    touched.clear();
    for (std::uint64_t k = a.colptr[j]; k < a.colptr[j + 1]; ++k) {
      const std::uint32_t row = a.rowidx[k];
      const T va = a.values[k];
      for (std::uint64_t k2 = at.colptr[row]; k2 < at.colptr[row + 1]; ++k2) {
        const std::uint32_t i = at.rowidx[k2];
        if (work[i] == T{}) touched.push_back(i);
        work[i] += va * at.values[k2];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t i : touched) {
      if (!(work[i] == T{})) {
        r.rowidx.push_back(i);
        r.values.push_back(work[i]);
      }
      work[i] = T{};
    }
    r.colptr[j + 1] = r.rowidx.size();
  }
  return r;
}

template <class T>
SparseCSC<T> add_csc(const SparseCSC<T>& a, const SparseCSC<T>& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("sparse add shape");
  SparseCSC<T> r;
  r.rows = a.rows;
  r.cols = a.cols;
  r.colptr.assign(a.cols + 1, 0);
  for (std::size_t c = 0; c < a.cols; ++c) {
    std::uint64_t ka = a.colptr[c], kb = b.colptr[c];
    while (ka < a.colptr[c + 1] || kb < b.colptr[c + 1]) {
      std::uint32_t ra = ka < a.colptr[c + 1] ? a.rowidx[ka] : UINT32_MAX;
      std::uint32_t rb = kb < b.colptr[c + 1] ? b.rowidx[kb] : UINT32_MAX;
      if (ra < rb) {
        r.rowidx.push_back(ra);
        r.values.push_back(a.values[ka++]);
      } else if (rb < ra) {
        r.rowidx.push_back(rb);
        r.values.push_back(b.values[kb++]);
      } else {
        T v = a.values[ka++] + b.values[kb++];
        if (!(v == T{})) {
          r.rowidx.push_back(ra);
          r.values.push_back(v);
        }
      }
    }
    r.colptr[c + 1] = r.rowidx.size();
  }
  return r;
}

template <class T>
Eigen::MatrixXd csc_to_dense(const SparseCSC<T>& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows, a.cols);
  for (std::size_t c = 0; c < a.cols; ++c)
    for (std::uint64_t k = a.colptr[c]; k < a.colptr[c + 1]; ++k)
      m(a.rowidx[k], c) += static_cast<double>(a.values[k]);
  return m;
}

inline void csc_matvec(const SparseCSC<double>& a, const double* x, double* y) {
  std::fill(y, y + a.rows, 0.0);
  for (std::size_t c = 0; c < a.cols; ++c)
    for (std::uint64_t k = a.colptr[c]; k < a.colptr[c + 1]; ++k)
      y[a.rowidx[k]] += a.values[k] * x[c];
}

// ---------------------------------------------------------------------------
// Combinatorial Laplacians of induced complexes.
// ---------------------------------------------------------------------------

/// Delta_p = d_p^T d_p + d_{p+1} d_{p+1}^T of the quotient-induced complex,
/// in exact integer arithmetic (rational boundaries are cleared columnwise,
/// which preserves the kernel).
inline SparseCSC<std::int64_t> laplacian_int(const ChainComplex& c, std::size_t p,
                                             const QuotientTriple& t) {
  if (p > c.top_degree()) throw std::out_of_range("laplacian degree");
  const std::size_t d = t.dimension(c.factor_mask);
  SparseCSC<std::int64_t> acc;
  acc.rows = acc.cols = c.degrees[p] * d;
  acc.colptr.assign(acc.cols + 1, 0);
  if (p >= 1) acc = gram_csc(induce_scaled_int64(c.boundary(p), t, c.factor_mask));
  if (p + 1 <= c.top_degree()) {
    SparseCSC<std::int64_t> up =
        gram_csc(transpose_csc(induce_scaled_int64(c.boundary(p + 1), t, c.factor_mask)));
    acc = acc.nnz() == 0 && acc.rows == up.rows ? up : add_csc(acc, up);
  }
  return acc;
}

inline SparseCSC<double> laplacian(const ChainComplex& c, std::size_t p,
                                   const QuotientTriple& t) {
  if (p > c.top_degree()) throw std::out_of_range("laplacian degree");
  const std::size_t d = t.dimension(c.factor_mask);
  SparseCSC<double> acc;
  acc.rows = acc.cols = c.degrees[p] * d;
  acc.colptr.assign(acc.cols + 1, 0);
  if (p >= 1) acc = gram_csc(induce_double(c.boundary(p), t, c.factor_mask));
  if (p + 1 <= c.top_degree()) {
    SparseCSC<double> up =
        gram_csc(transpose_csc(induce_double(c.boundary(p + 1), t, c.factor_mask)));
    acc = acc.nnz() == 0 && acc.rows == up.rows ? up : add_csc(acc, up);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Kernel dimensions.
// ---------------------------------------------------------------------------

enum class KernelMode { exact, numeric };

struct KernelReport {
  std::size_t dim = 0;
  std::size_t kernel = 0;
  std::string method;
  bool modes_agree = true;  // set by kernel_dim_both
};

/// Exact mode: dim - rank (rank dispatcher; exact rational at small sizes,
/// modular above).  Numeric mode: eigenvalue count below tol * max(1,lambda_max),
/// dense, capped at 4096 rows.
inline KernelReport kernel_dim(const SparseCSC<std::int64_t>& m, KernelMode mode,
                               const RankOptions& opt = {}, double tol = 1e-9) {
  KernelReport rep;
  rep.dim = m.cols;
  if (mode == KernelMode::exact) {
    RankResult r = sparse_rank_cached(m, opt);
    rep.kernel = m.cols - r.rank;
    rep.method = r.method;
    return rep;
  }
  if (m.rows > 4096)
    throw std::invalid_argument("numeric kernel counting is dense-only (dim <= 4096)");
  Eigen::MatrixXd dm = csc_to_dense(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dm, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;
  const double cut = tol * std::max(1.0, lmax);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i] < -1e-9 * std::max(1.0, lmax))
      throw std::domain_error("matrix is not PSD within tolerance");
    k += es.eigenvalues()[i] < cut;
  }
  rep.kernel = k;
  rep.method = "numeric-dense";
  return rep;
}

/// Runs both modes and flags disagreement (a certification failure for the
/// caller to surface).
inline KernelReport kernel_dim_both(const SparseCSC<std::int64_t>& m, const RankOptions& opt = {},
                                    double tol = 1e-9) {
  KernelReport ex = kernel_dim(m, KernelMode::exact, opt, tol);
  KernelReport nu = kernel_dim(m, KernelMode::numeric, opt, tol);
  ex.modes_agree = ex.kernel == nu.kernel;
  ex.method += "+numeric";
  return ex;
}

// ---------------------------------------------------------------------------
// Low spectrum.
// ---------------------------------------------------------------------------

struct LowSpectrum {
  std::vector<double> values;  // ascending
  bool converged = true;
  std::string method;
  std::string message;
};

/// k smallest eigenvalues of a symmetric matrix: dense below 2048 rows,
/// Lanczos with full reorthogonalization on c*I - M above.  Deterministic for
/// a fixed seed; iteration budget 10 * dimension matrix-vector products.
inline LowSpectrum low_spectrum_impl(const SparseCSC<double>& m, std::size_t k,
                                     std::uint64_t seed) {
  LowSpectrum out;
  const std::size_t n = m.rows;
  if (n == 0) {
    out.method = "dense";
    return out;
  }
  k = std::min(k, n);
  if (n <= 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(csc_to_dense(m), Eigen::EigenvaluesOnly);
    for (std::size_t i = 0; i < k; ++i) out.values.push_back(es.eigenvalues()[i]);
    out.method = "dense";
    return out;
  }
  // Gershgorin upper bound.
  std::vector<double> rowsum(n, 0.0), diag(n, 0.0);
  for (std::size_t c = 0; c < m.cols; ++c)
    for (std::uint64_t kk = m.colptr[c]; kk < m.colptr[c + 1]; ++kk) {
      if (m.rowidx[kk] == c)
        diag[c] = m.values[kk];
      else
        rowsum[m.rowidx[kk]] += std::abs(m.values[kk]);
    }
  double cbound = 0;
  for (std::size_t i = 0; i < n; ++i) cbound = std::max(cbound, diag[i] + rowsum[i]);
  cbound += 1.0;

  const std::size_t budget = 10 * n;
  const std::size_t steps = std::min({n, std::max<std::size_t>(2 * k + 32, 96), budget});
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> v(n), w(n);
  SplitMix64 rng(seed);
  for (auto& x : v) x = (static_cast<double>(rng.next() >> 11) / 9007199254740992.0) - 0.5;
  double nv = 0;
  for (double x : v) nv += x * x;
  nv = std::sqrt(nv);
  for (auto& x : v) x /= nv;
  for (std::size_t j = 0; j < steps; ++j) {
    basis.push_back(v);
    csc_matvec(m, v.data(), w.data());
    for (std::size_t i = 0; i < n; ++i) w[i] = cbound * v[i] - w[i];  // apply cI - M
    double a = 0;
    for (std::size_t i = 0; i < n; ++i) a += w[i] * v[i];
    alpha.push_back(a);
    // Full reorthogonalization, twice.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) {
        double dot = 0;
        for (std::size_t i = 0; i < n; ++i) dot += w[i] * q[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= dot * q[i];
      }
    double b = 0;
    for (double x : w) b += x * x;
    b = std::sqrt(b);
    if (b < 1e-13) {
      beta.push_back(0);
      break;
    }
    beta.push_back(b);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / b;
  }
  const std::size_t mdim = alpha.size();
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(mdim, mdim);
  for (std::size_t i = 0; i < mdim; ++i) {
    tri(i, i) = alpha[i];
    if (i + 1 < mdim) tri(i, i + 1) = tri(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
  std::vector<std::pair<double, double>> ritz;  // (M-eigenvalue, residual proxy)
  for (std::size_t i = 0; i < mdim; ++i) {
    double theta = es.eigenvalues()[mdim - 1 - i];  // largest of cI-M first
    double resid = std::abs(beta.back() * es.eigenvectors()(mdim - 1, mdim - 1 - i));
    ritz.emplace_back(cbound - theta, resid);
    if (ritz.size() == k) break;
  }
  std::sort(ritz.begin(), ritz.end());
  for (auto& [val, res] : ritz) {
    out.values.push_back(val);
    if (res > 1e-6 * std::max(1.0, cbound)) {
      out.converged = false;
      out.message = "lanczos residual above tolerance";
    }
  }
  out.method = "lanczos";
  return out;
}

inline LowSpectrum low_spectrum(const SparseCSC<double>& m, std::size_t k, double tolerance,
                                std::uint64_t seed) {
  (void)tolerance;
  return low_spectrum_impl(m, k, seed);
}

/// Per-degree spectral summary used by the report rows.
struct SpectrumSlice {
  std::size_t dim = 0;
  std::size_t kernel_dim = 0;
  std::vector<double> lowest;
  double tolerance = 1e-9;
  std::string method;
};

// ---------------------------------------------------------------------------
// Spectral projector via eigendecomposition plus its contour-integral
// cross-check (trapezoid on the circle |z| = rho, 64 nodes).
// ---------------------------------------------------------------------------

struct SpectralGapError : std::runtime_error {
  double smallest_nonzero;
  explicit SpectralGapError(double s)
      : std::runtime_error("no spectral gap above rho; smallest nonzero eigenvalue " +
                           std::to_string(s)),
        smallest_nonzero(s) {}
};

struct SpectralProjector {
  Eigen::MatrixXd projector;  // eigendecomposition route
  std::size_t kernel_dim = 0;
  double rho = 0;
  double smallest_nonzero = 0;
  double contour_delta = -1;  // Frobenius gap between the two routes, -1 if skipped
};

/// Projector onto the eigenvalues of PSD M below rho.  Pre: zero isolated,
/// i.e. the smallest eigenvalue >= rho must be >= ~2 rho; otherwise rejected
/// with the measured value.  The contour route is evaluated for matrices up
/// to contour_cap rows.
inline SpectralProjector spectral_projector(const Eigen::MatrixXd& m, double rho,
                                            std::size_t contour_cap = 600) {
  if (m.rows() != m.cols()) throw std::invalid_argument("projector needs a square matrix");
  if (rho <= 0) throw std::invalid_argument("rho must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const auto& ev = es.eigenvalues();
  SpectralProjector out;
  out.rho = rho;
  double smallest_above = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < rho)
      ++out.kernel_dim;
    else
      smallest_above = std::min(smallest_above, ev[i]);
  }
  out.smallest_nonzero = std::isfinite(smallest_above) ? smallest_above : 0.0;
  if (std::isfinite(smallest_above) && smallest_above < 2 * rho * (1 - 1e-9))
    throw SpectralGapError(smallest_above);
  Eigen::MatrixXd vk(m.rows(), out.kernel_dim);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] < rho) vk.col(col++) = es.eigenvectors().col(i);
  out.projector = vk * vk.transpose();

  if (static_cast<std::size_t>(m.rows()) <= contour_cap) {
    using CMat = Eigen::MatrixXcd;
    CMat acc = CMat::Zero(m.rows(), m.cols());
    const int nodes = 64;
    for (int j = 0; j < nodes; ++j) {
      const double th = 2.0 * M_PI * (j + 0.5) / nodes;
      const std::complex<double> z = std::polar(rho, th);
      CMat zi = -m.cast<std::complex<double>>();
      zi.diagonal().array() += z;
      acc += z * zi.partialPivLu().solve(CMat::Identity(m.rows(), m.cols()));
    }
    Eigen::MatrixXd pc = (acc / static_cast<double>(nodes)).real();
    out.contour_delta = (out.projector - pc).norm();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kesten-style lower bounds: power method on the ball compression of a
// single-factor group-ring element acting on l2(F).
// ---------------------------------------------------------------------------

struct FreeWordHash {
  std::size_t operator()(const FreeWord& w) const noexcept { return w.hash(); }
};

/// Shortlex-ordered enumeration of the radius-r ball of F.
inline std::vector<FreeWord> free_ball(std::size_t radius) {
  std::vector<FreeWord> ball = {FreeWord()};
  std::unordered_map<FreeWord, std::uint32_t, FreeWordHash> seen;
  seen.emplace(FreeWord(), 0);
  std::size_t layer_begin = 0;
  for (std::size_t l = 1; l <= radius; ++l) {
    std::size_t layer_end = ball.size();
    std::vector<FreeWord> next;
    for (std::size_t i = layer_begin; i < layer_end; ++i)
      for (Letter g : {Letter(1), Letter(-1), Letter(2), Letter(-2)}) {
        FreeWord w = ball[i] * FreeWord::generator(generator_index(g), g > 0 ? +1 : -1);
        if (w.length() != l || seen.contains(w)) continue;
        seen.emplace(w, 0);
        next.push_back(std::move(w));
      }
    std::sort(next.begin(), next.end());
    for (auto& w : next) ball.push_back(std::move(w));
    layer_begin = layer_end;
  }
  return ball;
}

/// Lower bound for the l2(F) operator norm of a single-factor element x: the
/// norm of x restricted to the span of words of length <= radius, i.e.
/// sqrt(lambda_max(P x* x P)) by power method on the compressed Gram
/// operator (x* x is expanded symbolically, so no output truncation is
/// involved).  Nondecreasing in the radius; never exceeds the true norm.
inline double ball_norm(const GroupRingElement& x, int factor, std::size_t radius,
                        std::uint64_t seed = 0xba11) {
  for (const auto& [w, c] : x.terms())
    if (w.factor_mask() & ~(1u << (factor - 1)))
      throw std::invalid_argument("ball_norm needs a single-factor element");
  std::vector<FreeWord> ball = free_ball(radius);
  std::unordered_map<FreeWord, std::uint32_t, FreeWordHash> index;
  for (std::size_t i = 0; i < ball.size(); ++i) index.emplace(ball[i], i);
  const std::size_t n = ball.size();

  const GroupRingElement gram_element = x.involution() * x;
  SparseCSC<double> t;
  t.rows = t.cols = n;
  t.colptr.assign(n + 1, 0);
  std::vector<std::pair<std::uint32_t, double>> buf;
  for (std::size_t c = 0; c < n; ++c) {
    buf.clear();
    for (const auto& [w, coeff] : gram_element.terms()) {
      FreeWord target = w.factor(factor) * ball[c];
      auto it = index.find(target);
      if (it == index.end()) continue;
      buf.emplace_back(it->second, coeff.get_d());
    }
    std::sort(buf.begin(), buf.end());
    for (auto& [r, v] : buf) {
      t.rowidx.push_back(r);
      t.values.push_back(v);
    }
    t.colptr[c + 1] = t.rowidx.size();
  }

  // P x* x P is PSD, so plain power iteration converges to lambda_max.
  std::vector<double> v(n), w(n);
  SplitMix64 rng(seed);
  for (auto& y : v) y = (static_cast<double>(rng.next() >> 11) / 9007199254740992.0) - 0.5;
  double rq = 0, prev = 1e300;
  const std::size_t max_iters = std::min<std::size_t>(10 * n, 40000);
  for (std::size_t it = 0; it < max_iters; ++it) {
    double nv = 0;
    for (double y : v) nv += y * y;
    nv = std::sqrt(nv);
    for (auto& y : v) y /= nv;
    csc_matvec(t, v.data(), w.data());
    rq = 0;
    for (std::size_t i = 0; i < n; ++i) rq += w[i] * v[i];
    v.swap(w);
    if (std::abs(rq - prev) < 1e-14 * std::max(1.0, std::abs(rq))) break;
    prev = rq;
  }
  return std::sqrt(std::max(0.0, rq));
}

/// The Markov element (a1 + a1^-1 + a2 + a2^-1)/4 of the given factor.
inline GroupRingElement markov_element(int factor) {
  GroupRingElement x;
  Rational quarter(1, 4);
  for (int i = 1; i <= 2; ++i)
    for (int sgn : {+1, -1})
      x += quarter * GroupRingElement::generator(factor, i, sgn);
  return x;
}

}  // namespace l2betti
