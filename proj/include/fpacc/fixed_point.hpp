#ifndef FPACC_FIXED_POINT_HPP
#define FPACC_FIXED_POINT_HPP

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fpacc {

using Vector = Eigen::VectorXd;

/// Thrown by a problem's evaluate when the map is undefined at the requested
/// point (e.g. a nonpositive denominator). The solver converts it into a
/// divergence_error carrying the partial trace.
class evaluation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A fixed-point problem x = g(x), g: R^n -> R^n. `evaluate` must be pure and
/// deterministic; it may be called concurrently from several solves.
struct FixedPointProblem {
  Eigen::Index dimension = 0;
  std::function<Vector(const Vector&)> evaluate;
  Vector initial_guess;
  std::optional<Vector> known_solution;
  std::optional<double> contraction_bound; // Lipschitz constant in (0,1), when known
};

/// Keeps the optimized damping factor away from zero.
struct SafeguardStrategy {
  enum class Kind { raw, clamp_floor, flip_below };

  Kind kind = Kind::raw;
  double eta = 0.3; // only meaningful for clamp_floor / flip_below

  static SafeguardStrategy Raw() { return {}; }

  static SafeguardStrategy ClampFloor(double eta) {
    check_eta(eta);
    return {Kind::clamp_floor, eta};
  }

  static SafeguardStrategy FlipBelow(double eta) {
    check_eta(eta);
    return {Kind::flip_below, eta};
  }

private:
  static void check_eta(double eta) {
    if (!(eta > 0.0 && eta < 0.5)) {
      throw std::invalid_argument("SafeguardStrategy: eta must lie in (0, 0.5)");
    }
  }
};

/// Selects the damping factor beta_k in (0,1] used to mix the averaged
/// iterate with the averaged evaluation: none (beta = 1), a constant beta,
/// or the per-iteration optimized beta with a safeguard.
struct DampingPolicy {
  enum class Kind { undamped, constant, optimized };

  Kind kind = Kind::undamped;
  double beta = 1.0;            // constant
  SafeguardStrategy safeguard{}; // optimized

  static DampingPolicy Undamped() { return {}; }

  static DampingPolicy Constant(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("DampingPolicy: constant beta must lie in (0, 1]");
    }
    DampingPolicy p;
    p.kind = Kind::constant;
    p.beta = beta;
    return p;
  }

  static DampingPolicy Optimized(SafeguardStrategy s = SafeguardStrategy::Raw()) {
    DampingPolicy p;
    p.kind = Kind::optimized;
    p.safeguard = s;
    return p;
  }
};

struct SolverConfig {
  int window_size = 0; // 0 means pure Picard iteration
  double tolerance = 1e-10;
  int max_iterations = 200;
  DampingPolicy damping{};
  // Oldest columns are dropped while the window's condition estimate exceeds
  // this threshold (down to a single column). nullopt disables the guard.
  std::optional<double> condition_guard = 1e14;

  void validate() const {
    if (window_size < 0) {
      throw std::invalid_argument("SolverConfig: window_size must be >= 0");
    }
    if (!(tolerance > 0.0)) {
      throw std::invalid_argument("SolverConfig: tolerance must be positive");
    }
    if (max_iterations < 1) {
      throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
    }
  }
};

/// One row of the per-iteration trace. Optional fields are absent for plain
/// steps (no least-squares solve) and for non-optimized damping.
struct IterationRecord {
  int iteration = 0;          // 1-based; one record per g-evaluation pass
  double residual_norm = 0.0; // ||g(x_k) - x_k||_2 at the iterate this pass measured
  std::optional<double> beta_raw;
  double beta_applied = 1.0;
  std::optional<double> theta; // combined-residual gain ratio, <= 1 up to roundoff
  int active_window = 0;       // columns used by this pass's least-squares solve
  long g_evaluations = 0;      // cumulative
  double elapsed_ms = 0.0;     // since solve start
  bool degenerate_damping = false;
};

struct SolveReport {
  bool converged = false;
  int iterations_used = 0;
  Vector final_iterate;
  double final_residual_norm = std::numeric_limits<double>::quiet_NaN();
  std::vector<IterationRecord> trace;
};

/// Raised when an iterate (or its residual) stops being finite. Carries the
/// trace accumulated so far.
class divergence_error : public std::runtime_error {
public:
  divergence_error(const std::string& what, SolveReport partial)
      : std::runtime_error(what), report_(std::move(partial)) {}

  const SolveReport& partial_report() const { return report_; }

private:
  SolveReport report_;
};

} // namespace fpacc

#endif
