#pragma once

#include <algorithm>
#include <cstdint>
#include <cstddef>
#include <mutex>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "l2betti/group_ring.hpp"
#include "l2betti/induce.hpp"
#include "l2betti/modp.hpp"

namespace l2betti {

struct RankOptions {
  std::size_t exact_cap = 420;             // dense rational elimination cap (max dimension)
  std::size_t elimination_cols_cap = 60000;  // sparse modular elimination cap (min dimension)
  std::size_t dense_tail_cap = 13000;      // Schur-complement densification cap
  double dense_switch_density = 0.10;
  std::uint64_t fill_budget = 50'000'000;  // stored entries before giving up on elimination
  int prime_agreement = 2;                 // modular elimination primes that must agree
  bool allow_blackbox = true;
  std::uint64_t seed = 0xC0FFEEull;
  int threads = 1;
};

struct RankResult {
  std::size_t rank = 0;
  std::string method;                 // graph | exact-rational | modular-elimination | blackbox-m61
  std::vector<std::uint64_t> primes;  // moduli used, empty for exact paths
};

namespace rank_detail {

struct FillBlowup : std::runtime_error {
  FillBlowup() : std::runtime_error("sparse elimination fill budget exceeded") {}
};

// ---------------------------------------------------------------------------
// Incidence fast path: every column has at most two +-1 entries of opposite
// sign (the shape of every degree-1 boundary).  Rank = number of successful
// unions, exact over Q and every F_p.
// ---------------------------------------------------------------------------

inline bool incidence_rank(const SparseCSC<std::int64_t>& a, std::size_t& rank_out) {
  for (std::size_t c = 0; c < a.cols; ++c) {
    std::uint64_t b = a.colptr[c], e = a.colptr[c + 1];
    if (e - b > 2) return false;
    if (e - b == 1) return false;  // single entry columns are fine for DSU only if...
    if (e - b == 2) {
      std::int64_t v0 = a.values[b], v1 = a.values[b + 1];
      if (!((v0 == 1 && v1 == -1) || (v0 == -1 && v1 == 1))) return false;
    }
  }
  std::vector<std::uint32_t> parent(a.rows);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t rank = 0;
  for (std::size_t c = 0; c < a.cols; ++c) {
    if (a.colptr[c + 1] - a.colptr[c] != 2) continue;
    std::uint32_t x = find(a.rowidx[a.colptr[c]]), y = find(a.rowidx[a.colptr[c] + 1]);
    if (x != y) {
      parent[x] = y;
      ++rank;
    }
  }
  rank_out = rank;
  return true;
}

// ---------------------------------------------------------------------------
// Dense exact rational elimination, for small matrices and cross-validation.
// ---------------------------------------------------------------------------

inline std::size_t dense_rational_rank(const SparseCSC<std::int64_t>& a) {
  std::vector<std::vector<Rational>> rows(a.rows, std::vector<Rational>(a.cols, Rational(0)));
  for (std::size_t c = 0; c < a.cols; ++c)
    for (std::uint64_t k = a.colptr[c]; k < a.colptr[c + 1]; ++k)
      rows[a.rowidx[k]][c] = Rational(static_cast<long>(a.values[k]));
  std::size_t rank = 0;
  for (std::size_t c = 0; c < a.cols && rank < a.rows; ++c) {
    std::size_t piv = rank;
    while (piv < a.rows && rows[piv][c] == 0) ++piv;
    if (piv == a.rows) continue;
    std::swap(rows[piv], rows[rank]);
    const Rational pv = rows[rank][c];
    for (std::size_t i = rank + 1; i < a.rows; ++i) {
      if (rows[i][c] == 0) continue;
      Rational f = rows[i][c] / pv;
      for (std::size_t k = c; k < a.cols; ++k) rows[i][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

// ---------------------------------------------------------------------------
// Dense elimination mod p (p < 2^26) with delayed reduction: a row absorbs up
// to ~4000 multiply-add updates in uint64 before a full reduction pass.
// ---------------------------------------------------------------------------

inline std::size_t dense_rank_mod_p(std::vector<std::vector<std::uint64_t>>& rows,
                                    const PrimeField& f) {
  if (rows.empty()) return 0;
  const std::size_t w = rows[0].size();
  std::vector<std::uint32_t> dirty(rows.size(), 0);
  std::size_t rank = 0;
  for (std::size_t c = 0; c < w && rank < rows.size(); ++c) {
    std::size_t piv = rows.size();
    for (std::size_t i = rank; i < rows.size(); ++i) {
      rows[i][c] %= f.p;
      if (rows[i][c] != 0) {
        piv = i;
        break;
      }
    }
    if (piv == rows.size()) continue;
    for (auto& v : rows[piv]) v %= f.p;
    dirty[piv] = 0;
    std::swap(rows[piv], rows[rank]);
    std::swap(dirty[piv], dirty[rank]);
    const std::uint64_t pinv = f.inv(rows[rank][c]);
    for (std::size_t i = rank + 1; i < rows.size(); ++i) {
      std::uint64_t fi = rows[i][c] % f.p;
      if (fi == 0) {
        rows[i][c] = 0;
        continue;
      }
      const std::uint64_t g = f.p - f.mul(fi, pinv);
      const std::uint64_t* pr = rows[rank].data();
      std::uint64_t* ri = rows[i].data();
      for (std::size_t k = c; k < w; ++k) ri[k] += g * pr[k];
      if (++dirty[i] >= 4000) {
        for (auto& v : rows[i]) v %= f.p;
        dirty[i] = 0;
      }
    }
    ++rank;
  }
  return rank;
}

// ---------------------------------------------------------------------------
// Sparse elimination mod p with Markowitz-flavored pivoting and an automatic
// dense Schur-complement tail.
// ---------------------------------------------------------------------------

struct SparseElimOptions {
  std::size_t dense_tail_cap;
  double dense_switch_density;
  std::uint64_t fill_budget;
};

inline std::size_t sparse_rank_mod_p(std::size_t nrows, std::size_t ncols,
                                     std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>&& rows,
                                     const PrimeField& f, const SparseElimOptions& opt) {
  std::vector<std::uint8_t> active(nrows, 1);
  std::vector<std::uint32_t> col_count(ncols, 0);
  std::vector<std::vector<std::uint32_t>> col_rows(ncols);
  std::uint64_t total_entries = 0;
  for (std::size_t r = 0; r < nrows; ++r)
    for (auto& [c, v] : rows[r]) {
      ++col_count[c];
      col_rows[c].push_back(static_cast<std::uint32_t>(r));
      ++total_entries;
    }

  using HeapItem = std::pair<std::uint32_t, std::uint32_t>;  // (nnz, row)
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
  for (std::size_t r = 0; r < nrows; ++r)
    if (!rows[r].empty())
      heap.emplace(static_cast<std::uint32_t>(rows[r].size()), static_cast<std::uint32_t>(r));
    else
      active[r] = 0;

  auto row_value_at = [&](std::uint32_t r, std::uint32_t c) -> std::uint32_t {
    const auto& row = rows[r];
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const auto& e, std::uint32_t col) { return e.first < col; });
    if (it == row.end() || it->first != c) return 0;
    return it->second;
  };

  std::size_t rank = 0;
  std::size_t live_rows = 0;
  for (std::size_t r = 0; r < nrows; ++r) live_rows += active[r];

  std::vector<std::pair<std::uint32_t, std::uint32_t>> merged;
  std::size_t pivots_since_check = 0;

  while (!heap.empty()) {
    auto [nnz, r] = heap.top();
    heap.pop();
    if (!active[r] || rows[r].size() != nnz) continue;
    if (rows[r].empty()) {
      active[r] = 0;
      --live_rows;
      continue;
    }

    // Periodically consider switching to a dense tail.
    if (++pivots_since_check >= 128 || total_entries > opt.fill_budget) {
      pivots_since_check = 0;
      std::size_t live_cols = 0;
      for (std::size_t c = 0; c < ncols; ++c) live_cols += col_count[c] > 0;
      const double density =
          live_rows && live_cols
              ? static_cast<double>(total_entries) / (static_cast<double>(live_rows) * live_cols)
              : 0.0;
      const bool fits = live_rows <= opt.dense_tail_cap && live_cols <= opt.dense_tail_cap &&
                        live_rows * live_cols <= 120'000'000ull;
      if (fits && (density >= opt.dense_switch_density || total_entries > opt.fill_budget ||
                   live_rows <= 1024)) {
        std::vector<std::uint32_t> col_map(ncols, UINT32_MAX);
        std::size_t w = 0;
        for (std::size_t c = 0; c < ncols; ++c)
          if (col_count[c] > 0) col_map[c] = static_cast<std::uint32_t>(w++);
        std::vector<std::vector<std::uint64_t>> dense;
        dense.reserve(live_rows);
        for (std::size_t i = 0; i < nrows; ++i) {
          if (!active[i]) continue;
          std::vector<std::uint64_t> dr(w, 0);
          for (auto& [c, v] : rows[i]) dr[col_map[c]] = v;
          dense.push_back(std::move(dr));
          rows[i].clear();
          active[i] = 0;
        }
        return rank + dense_rank_mod_p(dense, f);
      }
      if (total_entries > opt.fill_budget) throw FillBlowup();
    }

    // Pivot column: the sparsest live column of this row.
    std::uint32_t pc = rows[r][0].first;
    std::uint32_t best = col_count[pc];
    for (auto& [c, v] : rows[r])
      if (col_count[c] < best) {
        best = col_count[c];
        pc = c;
      }
    const std::uint32_t pv = row_value_at(r, pc);
    const std::uint64_t pinv = f.inv(pv);

    std::vector<std::uint32_t> victims;
    for (std::uint32_t i : col_rows[pc]) {
      if (i == r || !active[i]) continue;
      if (row_value_at(i, pc) != 0) victims.push_back(i);
    }
    col_rows[pc].clear();

    for (std::uint32_t i : victims) {
      const std::uint64_t fi = row_value_at(i, pc);
      const std::uint64_t g = f.p - f.mul(fi, pinv);  // row_i += g * row_r
      merged.clear();
      merged.reserve(rows[i].size() + rows[r].size());
      auto ia = rows[i].begin(), ea = rows[i].end();
      auto ib = rows[r].begin(), eb = rows[r].end();
      while (ia != ea || ib != eb) {
        if (ib == eb || (ia != ea && ia->first < ib->first)) {
          merged.push_back(*ia++);
        } else if (ia == ea || ib->first < ia->first) {
          const std::uint64_t nv = f.mul(g, ib->second);
          if (nv != 0) {
            merged.emplace_back(ib->first, static_cast<std::uint32_t>(nv));
            ++col_count[ib->first];
            col_rows[ib->first].push_back(i);
            ++total_entries;
          }
          ++ib;
        } else {
          const std::uint64_t nv = f.add(ia->second, f.mul(g, ib->second));
          if (nv != 0) {
            merged.emplace_back(ia->first, static_cast<std::uint32_t>(nv));
          } else {
            --col_count[ia->first];
            --total_entries;
          }
          ++ia;
          ++ib;
        }
      }
      rows[i].swap(merged);
      if (rows[i].empty()) {
        active[i] = 0;
        --live_rows;
      } else {
        heap.emplace(static_cast<std::uint32_t>(rows[i].size()), i);
      }
    }

    for (auto& [c, v] : rows[r]) {
      --col_count[c];
      --total_entries;
    }
    rows[r].clear();
    active[r] = 0;
    --live_rows;
    ++rank;
  }
  return rank;
}

// ---------------------------------------------------------------------------
// Black-box rank over F_{2^61-1}: Wiedemann minimal polynomial of the
// diagonally preconditioned Gram operator, Kaltofen-Saunders style.
// ---------------------------------------------------------------------------

/// Row-gather sparse matvec structure over M61 (y[i] = sum row_i * x).
struct GatherMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint64_t> rowptr;
  std::vector<std::uint32_t> colidx;
  std::vector<std::uint64_t> val;  // residues; empty if all entries are +-1
  std::vector<std::int8_t> sign;   // used when val is empty

  void multiply(const std::uint64_t* x, std::uint64_t* y, std::size_t r0, std::size_t r1) const {
    if (val.empty()) {
      // +-1 entries: summands stay below 2^61, so the accumulator cannot
      // overflow for any realistic row length.
      for (std::size_t i = r0; i < r1; ++i) {
        unsigned __int128 acc = 0;
        for (std::uint64_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
          acc += sign[k] > 0 ? x[colidx[k]] : M61::p - x[colidx[k]];
        y[i] = M61::reduce(acc);
      }
    } else {
      // General entries: products approach 2^122, so fold every 32 summands.
      for (std::size_t i = r0; i < r1; ++i) {
        unsigned __int128 acc = 0;
        std::uint32_t pending = 0;
        for (std::uint64_t k = rowptr[i]; k < rowptr[i + 1]; ++k) {
          acc += static_cast<unsigned __int128>(val[k]) * x[colidx[k]];
          if (++pending == 32) {
            acc = M61::reduce(acc);
            pending = 0;
          }
        }
        y[i] = M61::reduce(acc);
      }
    }
  }

  void multiply_parallel(const std::uint64_t* x, std::uint64_t* y, int threads) const {
    if (threads <= 1 || rows < 4096) {
      multiply(x, y, 0, rows);
      return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (rows + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::size_t r0 = std::min(rows, t * chunk), r1 = std::min(rows, (t + 1) * chunk);
      if (r0 < r1) pool.emplace_back([&, r0, r1] { multiply(x, y, r0, r1); });
    }
    for (auto& th : pool) th.join();
  }
};

inline GatherMatrix gather_from_csc(const SparseCSC<std::int64_t>& a, bool transpose) {
  // Gather structure for A (rows of A) needs CSR: build by counting.
  GatherMatrix g;
  if (transpose) {
    // Rows of A^T are columns of A: direct.
    g.rows = a.cols;
    g.cols = a.rows;
    g.rowptr.assign(a.colptr.begin(), a.colptr.end());
    g.colidx = a.rowidx;
    bool pm1 = true;
    for (auto v : a.values)
      if (v != 1 && v != -1) pm1 = false;
    if (pm1) {
      g.sign.resize(a.values.size());
      for (std::size_t k = 0; k < a.values.size(); ++k)
        g.sign[k] = static_cast<std::int8_t>(a.values[k]);
    } else {
      g.val.resize(a.values.size());
      for (std::size_t k = 0; k < a.values.size(); ++k) g.val[k] = M61::from_int64(a.values[k]);
    }
    return g;
  }
  g.rows = a.rows;
  g.cols = a.cols;
  g.rowptr.assign(a.rows + 1, 0);
  for (std::uint32_t r : a.rowidx) ++g.rowptr[r + 1];
  for (std::size_t i = 0; i < a.rows; ++i) g.rowptr[i + 1] += g.rowptr[i];
  std::vector<std::uint64_t> next(g.rowptr.begin(), g.rowptr.end() - 1);
  bool pm1 = true;
  for (auto v : a.values)
    if (v != 1 && v != -1) pm1 = false;
  g.colidx.resize(a.values.size());
  if (pm1)
    g.sign.resize(a.values.size());
  else
    g.val.resize(a.values.size());
  for (std::size_t c = 0; c < a.cols; ++c)
    for (std::uint64_t k = a.colptr[c]; k < a.colptr[c + 1]; ++k) {
      std::uint64_t slot = next[a.rowidx[k]]++;
      g.colidx[slot] = static_cast<std::uint32_t>(c);
      if (pm1)
        g.sign[slot] = static_cast<std::int8_t>(a.values[k]);
      else
        g.val[slot] = M61::from_int64(a.values[k]);
    }
  return g;
}

/// Berlekamp-Massey over M61.  Returns the connection polynomial C (C[0]=1);
/// the minimal polynomial of the sequence is its reversal of degree L.
inline std::vector<std::uint64_t> berlekamp_massey(const std::vector<std::uint64_t>& s,
                                                   std::size_t& deg_out) {
  std::vector<std::uint64_t> C = {1}, B = {1};
  std::size_t L = 0, m = 1;
  std::uint64_t b = 1;
  for (std::size_t n = 0; n < s.size(); ++n) {
    unsigned __int128 acc = s[n];
    std::uint32_t pending = 0;
    for (std::size_t i = 1; i <= L && i < C.size(); ++i) {
      acc += static_cast<unsigned __int128>(C[i]) * s[n - i];
      if (++pending == 32) {
        acc = M61::reduce(acc);
        pending = 0;
      }
    }
    std::uint64_t d = M61::reduce(acc);
    if (d == 0) {
      ++m;
      continue;
    }
    std::uint64_t coef = M61::mul(d, M61::inv(b));
    if (2 * L <= n) {
      std::vector<std::uint64_t> T = C;
      if (C.size() < B.size() + m) C.resize(B.size() + m, 0);
      for (std::size_t i = 0; i < B.size(); ++i)
        C[i + m] = M61::sub(C[i + m], M61::mul(coef, B[i]));
      L = n + 1 - L;
      B = std::move(T);
      b = d;
      m = 1;
    } else {
      if (C.size() < B.size() + m) C.resize(B.size() + m, 0);
      for (std::size_t i = 0; i < B.size(); ++i)
        C[i + m] = M61::sub(C[i + m], M61::mul(coef, B[i]));
      ++m;
    }
  }
  deg_out = L;
  return C;
}

inline std::size_t wiedemann_rank(const SparseCSC<std::int64_t>& a, std::uint64_t seed,
                                  int threads) {
  const bool use_gram_on_cols = a.cols <= a.rows;  // B = A^T A if cols is the small side
  const std::size_t n = use_gram_on_cols ? a.cols : a.rows;
  if (n == 0 || a.nnz() == 0) return 0;

  GatherMatrix fwd = gather_from_csc(a, false);  // y = A x
  GatherMatrix bwd = gather_from_csc(a, true);   // y = A^T x

  SplitMix64 rng(seed ^ 0x517cc1b727220a95ull);
  std::vector<std::uint64_t> dl(a.rows), dr(a.cols);
  for (auto& v : dl) v = rng.nonzero_mod(M61::p);
  for (auto& v : dr) v = rng.nonzero_mod(M61::p);
  std::vector<std::uint64_t> u(n), v(n);
  for (auto& x : u) x = rng.next() % M61::p;
  for (auto& x : v) x = rng.next() % M61::p;

  std::vector<std::uint64_t> t1(a.rows), t2(a.cols), cur = v;
  const std::size_t max_terms = 2 * n + 8;
  std::vector<std::uint64_t> seq;
  seq.reserve(max_terms);

  // B v = Dc A^T Dl^2 A Dc v (cols side) or Dl A Dc^2 A^T Dl v (rows side);
  // the squared inner diagonal is harmless and saves a scaling pass.
  auto apply = [&](std::vector<std::uint64_t>& x) {
    if (use_gram_on_cols) {
      for (std::size_t i = 0; i < a.cols; ++i) t2[i] = M61::mul(x[i], dr[i]);
      fwd.multiply_parallel(t2.data(), t1.data(), threads);
      for (std::size_t i = 0; i < a.rows; ++i)
        t1[i] = M61::mul(t1[i], M61::mul(dl[i], dl[i]));
      bwd.multiply_parallel(t1.data(), t2.data(), threads);
      for (std::size_t i = 0; i < a.cols; ++i) x[i] = M61::mul(t2[i], dr[i]);
    } else {
      for (std::size_t i = 0; i < a.rows; ++i) t1[i] = M61::mul(x[i], dl[i]);
      bwd.multiply_parallel(t1.data(), t2.data(), threads);
      for (std::size_t i = 0; i < a.cols; ++i)
        t2[i] = M61::mul(t2[i], M61::mul(dr[i], dr[i]));
      fwd.multiply_parallel(t2.data(), t1.data(), threads);
      for (std::size_t i = 0; i < a.rows; ++i) x[i] = M61::mul(t1[i], dl[i]);
    }
  };

  auto dot = [&](const std::vector<std::uint64_t>& x, const std::vector<std::uint64_t>& y) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) acc = M61::add(acc, M61::mul(x[i], y[i]));
    return acc;
  };

  std::vector<std::size_t> checkpoints = {max_terms * 2 / 5, max_terms * 3 / 5,
                                          max_terms * 3 / 4, max_terms * 22 / 25, max_terms};
  std::size_t deg = 0;
  std::vector<std::uint64_t> conn;
  for (std::size_t next_cp = 0; next_cp < checkpoints.size(); ++next_cp) {
    while (seq.size() < std::min(checkpoints[next_cp], max_terms)) {
      seq.push_back(dot(u, cur));
      apply(cur);
    }
    conn = berlekamp_massey(seq, deg);
    if (seq.size() >= max_terms) break;
    if (2 * deg + 64 <= seq.size()) break;  // recurrence confirmed with slack
  }
  const std::uint64_t constant_term = deg < conn.size() ? conn[deg] : 0;
  if (constant_term != 0) return n;  // Gram operator nonsingular: full rank
  return deg == 0 ? 0 : deg - 1;
}

}  // namespace rank_detail

/// Rank of an integer sparse matrix.  Dispatch: exact incidence fast path,
/// exact dense rational for small inputs, modular sparse elimination with
/// prime agreement, black-box Wiedemann over 2^61-1 for the giants.  The
/// modular and black-box paths are Monte Carlo with failure probability
/// well below 1e-9; methods and moduli are recorded in the result.
inline RankResult sparse_rank(const SparseCSC<std::int64_t>& a, const RankOptions& opt = {}) {
  RankResult res;
  if (a.nnz() == 0) {
    res.method = "graph";
    return res;
  }
  if (rank_detail::incidence_rank(a, res.rank)) {
    res.method = "graph";
    return res;
  }
  if (std::max(a.rows, a.cols) <= opt.exact_cap) {
    res.rank = rank_detail::dense_rational_rank(a);
    res.method = "exact-rational";
    return res;
  }
  const bool transpose = a.rows > a.cols;  // eliminate along the smaller side
  const std::size_t small_side = std::min(a.rows, a.cols);
  if (small_side <= opt.elimination_cols_cap) {
    try {
      std::vector<std::size_t> ranks;
      for (int pi = 0; pi < opt.prime_agreement + 2; ++pi) {
        if (pi >= 4) break;
        PrimeField f(kEliminationPrimes[pi]);
        std::size_t nrows = transpose ? a.cols : a.rows;
        std::size_t ncols = transpose ? a.rows : a.cols;
        std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> rows(nrows);
        for (std::size_t c = 0; c < a.cols; ++c)
          for (std::uint64_t k = a.colptr[c]; k < a.colptr[c + 1]; ++k) {
            std::uint64_t v = f.from_int64(a.values[k]);
            if (v == 0) continue;
            if (transpose)
              rows[c].emplace_back(a.rowidx[k], static_cast<std::uint32_t>(v));
            else
              rows[a.rowidx[k]].emplace_back(static_cast<std::uint32_t>(c),
                                             static_cast<std::uint32_t>(v));
          }
        if (!transpose)
          for (auto& r : rows)
            std::sort(r.begin(), r.end());
        rank_detail::SparseElimOptions eopt{opt.dense_tail_cap, opt.dense_switch_density,
                                            opt.fill_budget};
        ranks.push_back(rank_detail::sparse_rank_mod_p(nrows, ncols, std::move(rows), f, eopt));
        res.primes.push_back(f.p);
        if (ranks.size() >= static_cast<std::size_t>(opt.prime_agreement)) {
          std::size_t mx = *std::max_element(ranks.begin(), ranks.end());
          std::size_t agree = 0;
          for (std::size_t r : ranks) agree += r == mx;
          if (agree >= static_cast<std::size_t>(opt.prime_agreement)) {
            res.rank = mx;
            res.method = "modular-elimination";
            return res;
          }
        }
      }
      // No agreement: keep the max (modular ranks only undershoot).
      res.rank = *std::max_element(ranks.begin(), ranks.end());
      res.method = "modular-elimination";
      return res;
    } catch (const rank_detail::FillBlowup&) {
      if (!opt.allow_blackbox) throw;
      res.primes.clear();
    }
  }
  if (!opt.allow_blackbox)
    throw std::runtime_error("matrix too large for the enabled rank paths");
  res.rank = rank_detail::wiedemann_rank(a, opt.seed, opt.threads);
  res.method = "blackbox-m61";
  res.primes = {M61::p};
  return res;
}

/// Content hash for the rank cache.  Column signs are normalized (the first
/// nonzero of each column is made positive), so sign-convention twins share
/// cache entries.
inline std::uint64_t matrix_content_hash(const SparseCSC<std::int64_t>& a) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(a.rows);
  mix(a.cols);
  for (std::size_t c = 0; c < a.cols; ++c) {
    mix(0x706976ull);
    std::uint64_t b = a.colptr[c], e = a.colptr[c + 1];
    if (b == e) continue;
    std::int64_t s = a.values[b] < 0 ? -1 : 1;
    for (std::uint64_t k = b; k < e; ++k) {
      mix(a.rowidx[k]);
      mix(static_cast<std::uint64_t>(s * a.values[k]));
    }
  }
  return h;
}

/// Process-wide memo for rank results keyed by content hash.
inline RankResult sparse_rank_cached(const SparseCSC<std::int64_t>& a, const RankOptions& opt = {}) {
  static std::mutex mu;
  static std::unordered_map<std::uint64_t, RankResult> cache;
  const std::uint64_t key = matrix_content_hash(a);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  RankResult r = sparse_rank(a, opt);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, r);
  return r;
}

}  // namespace l2betti
