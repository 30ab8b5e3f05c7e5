#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace windoffer {

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense full-tableau simplex for
//
//   maximize c^T x  subject to  A x <= b,  x >= 0,  with b >= 0,
//
// so the slack basis is an initial feasible point. Structural columns can be
// fixed at zero after an optimal solve; reoptimize() then restores
// optimality with dual simplex pivots from the previous basis, which is the
// warm start the breakpoint search relies on. Copies are independent.
class DenseTableau {
 public:
  // `a` is row-major, rows x cols.
  DenseTableau(std::size_t rows, std::size_t cols, std::span<const double> a, std::span<const double> b,
               std::span<const double> c);

  // Primal simplex from the current primal feasible basis. Dantzig pricing,
  // switching to Bland's rule after a run of degenerate pivots.
  void optimize();

  // Restricts structural column `col` to zero. Takes effect on reoptimize().
  void fix_at_zero(std::size_t col);
  bool is_fixed(std::size_t col) const { return fixed_[col] != 0; }

  // Dual simplex until primal feasible, then a primal cleanup pass.
  void reoptimize();

  double objective() const;
  double value(std::size_t col) const;

  std::size_t rows() const { return rows_; }
  std::size_t structural_cols() const { return cols_; }
  std::size_t pivot_count() const { return pivots_; }

 private:
  double& at(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }
  bool eligible(std::size_t col) const { return row_of_[col] < 0 && !fixed_[col]; }
  void pivot(std::size_t r, std::size_t q);
  void guard_iterations(std::size_t& count) const;

  std::size_t rows_;
  std::size_t cols_;   // structural columns
  std::size_t total_;  // structural + slack columns
  std::size_t width_;  // total_ + rhs
  std::vector<double> data_;  // (rows_ + 1) x width_, last row holds reduced costs and -z
  std::vector<std::size_t> basis_;
  std::vector<long> row_of_;
  std::vector<char> fixed_;
  std::size_t pivots_ = 0;
};

}  // namespace windoffer
