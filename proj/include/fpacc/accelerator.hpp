#ifndef FPACC_ACCELERATOR_HPP
#define FPACC_ACCELERATOR_HPP

#include "fpacc/fixed_point.hpp"
#include "fpacc/qr_window.hpp"

#include <deque>
#include <utility>

namespace fpacc {

/// Sliding history for one accelerated solve: the QR of residual differences
/// and the matching dense g-differences, always holding the same columns.
/// Single-owner mutable state; never mutated concurrently.
struct AaState {
  QrWindow window;
  std::deque<Vector> dg_history;

  AaState(Eigen::Index dimension, Eigen::Index capacity)
      : window(dimension, capacity) {}
};

/// Converts the projection coefficients gamma of the unconstrained
/// least-squares form into the mixing coefficients alpha of the constrained
/// form: alpha_0 = gamma_0, alpha_i = gamma_i - gamma_{i-1},
/// alpha_c = 1 - gamma_{c-1}. The entries telescope to sum 1.
Vector gamma_to_alpha(const Vector& gamma);

/// Candidate iterate from the solved window: g(x_k) - G*gamma, corrected by
/// -(1-beta)*(f_k - Q*R*gamma) when beta < 1. beta = 1 returns the undamped
/// candidate exactly.
Vector aa_candidate(const AaState& state, const Vector& g_xk, const Vector& f_k,
                    const Vector& gamma, double beta);

/// The two mixing averages behind the damped update, computed without extra
/// g-evaluations: x_tilde = g(x_k) - G*gamma (averaged evaluation) and
/// x_bar = x_tilde - (f_k - Q*R*gamma) (averaged iterate).
/// Returns {x_bar, x_tilde}.
std::pair<Vector, Vector> mixed_averages(const AaState& state, const Vector& g_xk,
                                         const Vector& f_k, const Vector& gamma);

struct DampingEstimate {
  double beta_raw = 1.0;
  bool degenerate = false;
};

/// Residual-minimizing damping factor from the two auxiliary residuals
/// r_p = x_bar - g(x_bar) and r_q = x_tilde - g(x_tilde):
/// beta* = (r_p - r_q)^T r_p / ||r_p - r_q||^2, returned as |beta*| capped at
/// 1. Both vectors are scaled by 1/||r_p - r_q|| before the dot product.
/// A degenerate difference direction yields beta_raw = 1 with the flag set.
DampingEstimate optimize_damping(const Vector& r_p, const Vector& r_q);

/// Safeguarded damping factor: Raw passes beta through (0 becomes 1),
/// ClampFloor(eta) takes max(beta, eta), FlipBelow(eta) replaces beta < eta
/// by 1 - beta.
double apply_safeguard(double beta_raw, const SafeguardStrategy& strategy);

/// Gain ratio ||sum_i alpha_i f_i|| / ||f_last|| over a residual history;
/// 0 when the current residual is exactly zero. Diagnostic only.
double theta_ratio(const Vector& alpha, const std::vector<Vector>& residual_history);

struct ConstrainedLsSolution {
  Vector alpha;
  bool rank_deficient = false;
  double optimal_value = 0.0; // ||F * alpha||
};

/// Reference solver for min ||F*alpha|| s.t. sum(alpha) = 1 over a small
/// column set, via constraint elimination and a dense SVD solve. Intended for
/// validating the incremental path; rank-deficient systems get the min-norm
/// solution and the flag.
ConstrainedLsSolution constrained_ls_oracle(const std::vector<Vector>& residual_columns);

/// Plain fixed-point iteration x_{k+1} = g(x_k). One g-evaluation per
/// iteration; stops when ||g(x)-x|| <= tolerance.
SolveReport solve_picard(const FixedPointProblem& problem, const SolverConfig& config);

/// Windowed Anderson acceleration with the configured damping policy.
/// window_size = 0 reproduces solve_picard exactly. One g-evaluation per
/// iteration, plus two per iteration whose damping factor is optimized.
SolveReport solve_aa(const FixedPointProblem& problem, const SolverConfig& config);

} // namespace fpacc

#endif
