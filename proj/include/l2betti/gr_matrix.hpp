#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "l2betti/group_ring.hpp"

namespace l2betti {

/// Dense matrix with Q[pi] entries, row major.  Chains are column vectors and
/// matrices act by group-ring multiplication on the left.
class GroupRingMatrix {
 public:
  GroupRingMatrix() = default;
  GroupRingMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  GroupRingElement& at(std::size_t r, std::size_t c) {
    check(r, c);
    return data_[r * cols_ + c];
  }
  const GroupRingElement& at(std::size_t r, std::size_t c) const {
    check(r, c);
    return data_[r * cols_ + c];
  }

  bool is_zero() const {
    for (const auto& e : data_)
      if (!e.is_zero()) return false;
    return true;
  }

  std::size_t nonzero_entries() const {
    std::size_t n = 0;
    for (const auto& e : data_) n += !e.is_zero();
    return n;
  }

  friend GroupRingMatrix operator*(const GroupRingMatrix& a, const GroupRingMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("group-ring matrix shape mismatch");
    GroupRingMatrix r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const GroupRingElement& aik = a.at(i, k);
        if (aik.is_zero()) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          const GroupRingElement& bkj = b.at(k, j);
          if (bkj.is_zero()) continue;
          r.at(i, j) += aik * bkj;
        }
      }
    return r;
  }

  friend GroupRingMatrix operator+(const GroupRingMatrix& a, const GroupRingMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw std::invalid_argument("group-ring matrix shape mismatch");
    GroupRingMatrix r = a;
    for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] += b.data_[i];
    return r;
  }

  friend bool operator==(const GroupRingMatrix& a, const GroupRingMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  /// Adjoint: transpose with the *-involution applied entrywise.
  GroupRingMatrix adjoint() const {
    GroupRingMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j).involution();
    return r;
  }

 private:
  void check(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("group-ring matrix index");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<GroupRingElement> data_;
};

}  // namespace l2betti
