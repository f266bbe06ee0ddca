#include "fpacc/qr_window.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fpacc {

QrWindow::QrWindow(Index dimension, Index capacity)
    : dimension_(dimension),
      capacity_(capacity),
      count_(0),
      q_(Eigen::MatrixXd::Zero(dimension, std::max<Index>(capacity, 1))),
      r_(Eigen::MatrixXd::Zero(std::max<Index>(capacity, 1), std::max<Index>(capacity, 1))) {
  if (dimension < 1) {
    throw std::invalid_argument("QrWindow: dimension must be positive");
  }
  if (capacity < 0) {
    throw std::invalid_argument("QrWindow: capacity must be nonnegative");
  }
}

bool QrWindow::append_column(const Eigen::VectorXd& v) {
  if (v.size() != dimension_) {
    throw std::invalid_argument("QrWindow::append_column: dimension mismatch");
  }
  if (count_ == capacity_) {
    throw capacity_error("QrWindow::append_column: window is full");
  }

  const Index c = count_;
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(c);
  Eigen::VectorXd w = v;
  if (c > 0) {
    // Classical Gram-Schmidt with one full reorthogonalization pass.
    Eigen::VectorXd r1 = q_.leftCols(c).transpose() * w;
    w.noalias() -= q_.leftCols(c) * r1;
    Eigen::VectorXd r2 = q_.leftCols(c).transpose() * w;
    w.noalias() -= q_.leftCols(c) * r2;
    coeff = r1 + r2;
  }

  const double rho = w.norm();
  const bool dependent = rho <= dependence_threshold * v.norm();

  Eigen::VectorXd q_new;
  double diag = rho;
  if (!dependent) {
    q_new = w / rho;
  } else if (rho > 0.0) {
    // Remainder is noise-level; normalize it, then project once more so the
    // orthonormality invariant survives the division by a tiny rho.
    q_new = w / rho;
    if (c > 0) {
      Eigen::VectorXd p = q_.leftCols(c).transpose() * q_new;
      if (p.cwiseAbs().maxCoeff() > 1e-12) {
        q_new.noalias() -= q_.leftCols(c) * p;
        const double nn = q_new.norm();
        if (nn > 1e-8) {
          q_new /= nn;
        } else {
          q_new = orthogonal_probe();
        }
      }
    }
  } else {
    // Exactly dependent column: store a zero diagonal entry and extend the
    // basis with a fresh orthogonal direction so Q stays orthonormal.
    q_new = orthogonal_probe();
    diag = 0.0;
  }

  q_.col(c) = q_new;
  if (c > 0) {
    r_.col(c).head(c) = coeff;
  }
  r_(c, c) = diag;
  flags_.push_back(dependent);
  ++count_;
  return dependent;
}

Eigen::VectorXd QrWindow::orthogonal_probe() const {
  // First canonical basis vector with a usable component outside span(Q).
  for (Index i = 0; i < dimension_; ++i) {
    Eigen::VectorXd u = Eigen::VectorXd::Unit(dimension_, i);
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd p = q_.leftCols(count_).transpose() * u;
      u.noalias() -= q_.leftCols(count_) * p;
    }
    const double nu = u.norm();
    if (nu >= 0.5) {
      return u / nu;
    }
  }
  // count_ >= dimension_: no orthogonal direction exists.
  return Eigen::VectorXd::Zero(dimension_);
}

void QrWindow::drop_oldest_column() {
  if (count_ == 0) {
    throw empty_window_error("QrWindow::drop_oldest_column: window is empty");
  }
  const Index c = count_;
  // Delete the first column of R; the rest shifts left and becomes upper
  // Hessenberg.
  for (Index j = 0; j + 1 < c; ++j) {
    r_.col(j).head(c) = r_.col(j + 1).head(c);
  }
  r_.col(c - 1).setZero();

  // Givens rotations on row pairs (j, j+1) restore triangularity; the same
  // rotations are accumulated into Q from the right.
  for (Index j = 0; j + 1 < c; ++j) {
    const double a = r_(j, j);
    const double b = r_(j + 1, j);
    if (b == 0.0 && a >= 0.0) {
      continue;
    }
    const double rad = std::hypot(a, b);
    double cs = 1.0;
    double sn = 0.0;
    if (rad > 0.0) {
      cs = a / rad;
      sn = b / rad;
    }
    for (Index col = j; col + 1 < c; ++col) {
      const double t0 = r_(j, col);
      const double t1 = r_(j + 1, col);
      r_(j, col) = cs * t0 + sn * t1;
      r_(j + 1, col) = -sn * t0 + cs * t1;
    }
    Eigen::VectorXd qj = q_.col(j);
    q_.col(j) = cs * qj + sn * q_.col(j + 1);
    q_.col(j + 1) = -sn * qj + cs * q_.col(j + 1);
    r_(j + 1, j) = 0.0;
  }

  --count_;
  q_.col(count_).setZero();
  r_.row(count_).setZero();
  r_.col(count_).setZero();
  flags_.pop_front();
  for (Index j = 0; j < count_; ++j) {
    fix_diagonal_sign(j);
  }
}

void QrWindow::fix_diagonal_sign(Index j) {
  if (r_(j, j) < 0.0) {
    r_.row(j).head(count_) *= -1.0;
    // Flipping row j of R and column j of Q preserves the product while the
    // sign moves entirely into the orthogonal factor.
    r_.col(j).head(count_) *= -1.0;
    r_(j, j) = std::abs(r_(j, j));
    q_.col(j) *= -1.0;
  }
}

Eigen::VectorXd QrWindow::solve_least_squares(const Eigen::VectorXd& rhs) const {
  if (count_ == 0) {
    throw empty_window_error("QrWindow::solve_least_squares: window is empty");
  }
  if (rhs.size() != dimension_) {
    throw std::invalid_argument("QrWindow::solve_least_squares: dimension mismatch");
  }
  const Index c = count_;
  const double r_norm = r_.topLeftCorner(c, c).norm();
  for (Index i = 0; i < c; ++i) {
    if (std::abs(r_(i, i)) <= dependence_threshold * r_norm) {
      throw singular_window_error("QrWindow::solve_least_squares: R is numerically singular");
    }
  }
  Eigen::VectorXd y = q_.leftCols(c).transpose() * rhs;
  Eigen::VectorXd gamma(c);
  for (Index i = c - 1; i >= 0; --i) {
    double s = y(i);
    for (Index j = i + 1; j < c; ++j) {
      s -= r_(i, j) * gamma(j);
    }
    gamma(i) = s / r_(i, i);
  }
  return gamma;
}

double QrWindow::condition_estimate() const {
  if (count_ == 0) {
    throw empty_window_error("QrWindow::condition_estimate: window is empty");
  }
  double dmax = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < count_; ++i) {
    const double d = std::abs(r_(i, i));
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
  }
  if (dmin == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return dmax / dmin;
}

void QrWindow::refactorize() {
  if (count_ == 0) {
    return;
  }
  const Index c = count_;
  Eigen::MatrixXd a = reconstruct();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(dimension_, c);
  Eigen::MatrixXd rr = qr.matrixQR().topLeftCorner(c, c).triangularView<Eigen::Upper>();
  q_.leftCols(c) = thin_q;
  r_.topLeftCorner(c, c) = rr;
  for (Index j = 0; j < c; ++j) {
    fix_diagonal_sign(j);
  }
  const double r_norm = r_.topLeftCorner(c, c).norm();
  for (Index j = 0; j < c; ++j) {
    flags_[static_cast<size_t>(j)] = std::abs(r_(j, j)) <= dependence_threshold * r_norm;
  }
}

Eigen::VectorXd QrWindow::apply_q(const Eigen::VectorXd& y) const {
  if (y.size() != count_) {
    throw std::invalid_argument("QrWindow::apply_q: size mismatch");
  }
  return q_.leftCols(count_) * y;
}

Eigen::VectorXd QrWindow::apply_r(const Eigen::VectorXd& gamma) const {
  if (gamma.size() != count_) {
    throw std::invalid_argument("QrWindow::apply_r: size mismatch");
  }
  return r_.topLeftCorner(count_, count_).triangularView<Eigen::Upper>() * gamma;
}

Eigen::MatrixXd QrWindow::reconstruct() const {
  return q_.leftCols(count_) * r_.topLeftCorner(count_, count_);
}

bool QrWindow::any_dependent() const {
  for (bool f : flags_) {
    if (f) {
      return true;
    }
  }
  return false;
}

} // namespace fpacc
