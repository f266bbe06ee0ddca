#ifndef FPACC_QR_WINDOW_HPP
#define FPACC_QR_WINDOW_HPP

#include <Eigen/Dense>

#include <deque>
#include <stdexcept>

namespace fpacc {

class empty_window_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class capacity_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class singular_window_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/**
 * Thin QR factorization of a sliding column window.
 *
 * Holds Q (n x c, orthonormal columns) and R (c x c, upper triangular with
 * nonnegative diagonal) for up to `capacity` columns of dimension n. Columns
 * are appended at the back (Gram-Schmidt against the existing basis, with one
 * full reorthogonalization pass) and expired at the front (first column of R
 * deleted, triangularity restored with Givens rotations applied to both
 * factors). Least-squares solves against the stored columns reduce to a
 * c x c triangular back substitution.
 */
class QrWindow {
public:
  using Index = Eigen::Index;

  QrWindow(Index dimension, Index capacity);

  Index dimension() const { return dimension_; }
  Index capacity() const { return capacity_; }
  Index count() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool full() const { return count_ == capacity_; }

  /// Appends one column. Returns true when the orthogonalized remainder was
  /// below the dependence threshold; the column is still stored (with its
  /// tiny diagonal entry) and the caller's condition guard decides any drops.
  bool append_column(const Eigen::VectorXd& v);

  /// Deletes the oldest stored column; the remaining columns shift left.
  void drop_oldest_column();

  /// Minimizes ||rhs - A*gamma|| over the stored columns A, via
  /// R*gamma = Q^T*rhs. Throws singular_window_error when a diagonal entry
  /// of R is below the dependence threshold relative to ||R||_F.
  Eigen::VectorXd solve_least_squares(const Eigen::VectorXd& rhs) const;

  /// Cheap condition estimate of R: ratio of largest to smallest absolute
  /// diagonal entry (+inf when the smallest is zero).
  double condition_estimate() const;

  /// Rebuilds both factors with a dense Householder QR of Q*R. Restores
  /// orthogonality lost to repeated updates; dependence flags are recomputed
  /// from the new diagonal.
  void refactorize();

  Eigen::MatrixXd q_factor() const { return q_.leftCols(count_); }
  Eigen::MatrixXd r_factor() const { return r_.topLeftCorner(count_, count_); }

  /// Q * y for a length-count vector y.
  Eigen::VectorXd apply_q(const Eigen::VectorXd& y) const;
  /// R * gamma for a length-count vector gamma.
  Eigen::VectorXd apply_r(const Eigen::VectorXd& gamma) const;

  /// The stored column set, reconstructed as Q*R.
  Eigen::MatrixXd reconstruct() const;

  bool column_dependent(Index j) const { return flags_.at(static_cast<size_t>(j)); }
  bool any_dependent() const;

  /// Remainder-norm threshold (relative to the appended column) below which
  /// a column counts as linearly dependent.
  static constexpr double dependence_threshold = 1e-14;

private:
  Index dimension_;
  Index capacity_;
  Index count_;
  Eigen::MatrixXd q_; // n x capacity, first count_ columns valid
  Eigen::MatrixXd r_; // capacity x capacity, top-left count_ block valid
  std::deque<bool> flags_;

  Eigen::VectorXd orthogonal_probe() const;
  void fix_diagonal_sign(Index j);
};

} // namespace fpacc

#endif
