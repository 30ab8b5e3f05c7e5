#include "windoffer/simplex.hpp"

#include <cmath>
#include <string>

namespace windoffer {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr std::size_t kDegenerateRunBeforeBland = 50;

}  // namespace

DenseTableau::DenseTableau(std::size_t rows, std::size_t cols, std::span<const double> a, std::span<const double> b,
                           std::span<const double> c)
    : rows_(rows),
      cols_(cols),
      total_(cols + rows),
      width_(cols + rows + 1),
      data_((rows + 1) * (cols + rows + 1), 0.0),
      basis_(rows),
      row_of_(cols + rows, -1),
      fixed_(cols + rows, 0) {
  if (a.size() != rows * cols || b.size() != rows || c.size() != cols) {
    throw LpError("DenseTableau: dimension mismatch");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (!(b[r] >= 0.0)) throw LpError("DenseTableau: right-hand side must be nonnegative");
    for (std::size_t j = 0; j < cols; ++j) at(r, j) = a[r * cols + j];
    at(r, cols + r) = 1.0;
    at(r, total_) = b[r];
    basis_[r] = cols + r;
    row_of_[cols + r] = static_cast<long>(r);
  }
  for (std::size_t j = 0; j < cols; ++j) at(rows, j) = c[j];
}

void DenseTableau::pivot(std::size_t r, std::size_t q) {
  double* pr = &data_[r * width_];
  const double inv = 1.0 / pr[q];
  for (std::size_t j = 0; j < width_; ++j) pr[j] *= inv;
  pr[q] = 1.0;
  for (std::size_t i = 0; i <= rows_; ++i) {
    if (i == r) continue;
    double* pi = &data_[i * width_];
    const double f = pi[q];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < width_; ++j) pi[j] -= f * pr[j];
    pi[q] = 0.0;
  }
  row_of_[basis_[r]] = -1;
  basis_[r] = q;
  row_of_[q] = static_cast<long>(r);
  ++pivots_;
}

void DenseTableau::guard_iterations(std::size_t& count) const {
  if (++count > 200 * (rows_ + total_)) throw LpError("simplex iteration limit exceeded");
}

void DenseTableau::optimize() {
  bool bland = false;
  std::size_t degenerate_run = 0;
  std::size_t iterations = 0;
  while (true) {
    std::size_t q = total_;
    double best = kOptTol;
    for (std::size_t j = 0; j < total_; ++j) {
      if (!eligible(j)) continue;
      const double d = at(rows_, j);
      if (d > best) {
        q = j;
        best = d;
        if (bland) break;
      }
    }
    if (q == total_) return;

    std::size_t r = rows_;
    double min_ratio = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double a = at(i, q);
      const double rhs = at(i, total_);
      double ratio;
      if (fixed_[basis_[i]]) {
        // A fixed basic variable may not move in either direction.
        if (std::abs(a) <= kPivotTol) continue;
        ratio = std::abs(rhs) / std::abs(a);
      } else {
        if (a <= kPivotTol) continue;
        ratio = std::max(rhs, 0.0) / a;
      }
      const bool take = r == rows_ || ratio < min_ratio - 1e-12 ||
                        (ratio <= min_ratio + 1e-12 && basis_[i] < basis_[r]);
      if (take) {
        min_ratio = r == rows_ ? ratio : std::min(min_ratio, ratio);
        r = i;
      }
    }
    if (r == rows_) throw LpError("linear program is unbounded");

    if (min_ratio <= 1e-12) {
      if (++degenerate_run > kDegenerateRunBeforeBland) bland = true;
    } else {
      degenerate_run = 0;
    }
    pivot(r, q);
    guard_iterations(iterations);
  }
}

void DenseTableau::fix_at_zero(std::size_t col) {
  if (col >= cols_) throw LpError("fix_at_zero: not a structural column");
  fixed_[col] = 1;
}

void DenseTableau::reoptimize() {
  std::size_t iterations = 0;
  while (true) {
    std::size_t r = rows_;
    double worst = kFeasTol;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double rhs = at(i, total_);
      const double violation = fixed_[basis_[i]] ? std::abs(rhs) : -rhs;
      if (violation > worst) {
        worst = violation;
        r = i;
      }
    }
    if (r == rows_) break;

    // Move the leaving variable toward zero; the entering column must have a
    // row entry of the same sign as the current value.
    const double sign = at(r, total_) > 0.0 ? 1.0 : -1.0;
    std::size_t q = total_;
    double min_ratio = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      if (!eligible(j)) continue;
      const double a = sign * at(r, j);
      if (a <= kPivotTol) continue;
      const double ratio = std::max(0.0, -at(rows_, j)) / a;
      if (q == total_ || ratio < min_ratio - 1e-12) {
        q = j;
        min_ratio = ratio;
      }
    }
    if (q == total_) throw LpError("linear program became infeasible");
    pivot(r, q);
    guard_iterations(iterations);
  }
  optimize();
}

double DenseTableau::objective() const { return -at(rows_, total_); }

double DenseTableau::value(std::size_t col) const {
  if (fixed_[col]) return 0.0;
  const long r = row_of_[col];
  return r < 0 ? 0.0 : at(static_cast<std::size_t>(r), total_);
}

}  // namespace windoffer
