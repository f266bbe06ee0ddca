#include "fpacc/accelerator.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>

namespace fpacc {

Vector gamma_to_alpha(const Vector& gamma) {
  const Eigen::Index c = gamma.size();
  Vector alpha(c + 1);
  if (c == 0) {
    alpha(0) = 1.0;
    return alpha;
  }
  alpha(0) = gamma(0);
  for (Eigen::Index i = 1; i < c; ++i) {
    alpha(i) = gamma(i) - gamma(i - 1);
  }
  alpha(c) = 1.0 - gamma(c - 1);
  return alpha;
}

namespace {

Vector g_difference_combination(const AaState& state, const Vector& g_xk,
                                const Vector& gamma) {
  Vector x = g_xk;
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    x.noalias() -= gamma(j) * state.dg_history[static_cast<size_t>(j)];
  }
  return x;
}

Vector ls_residual(const AaState& state, const Vector& f_k, const Vector& gamma) {
  return f_k - state.window.apply_q(state.window.apply_r(gamma));
}

void check_state(const AaState& state, const Vector& gamma) {
  if (static_cast<Eigen::Index>(state.dg_history.size()) != state.window.count() ||
      gamma.size() != state.window.count()) {
    throw std::logic_error("accelerator: window and g-difference history out of sync");
  }
}

} // namespace

Vector aa_candidate(const AaState& state, const Vector& g_xk, const Vector& f_k,
                    const Vector& gamma, double beta) {
  check_state(state, gamma);
  Vector x = g_difference_combination(state, g_xk, gamma);
  if (beta == 1.0) {
    return x;
  }
  x.noalias() -= (1.0 - beta) * ls_residual(state, f_k, gamma);
  return x;
}

std::pair<Vector, Vector> mixed_averages(const AaState& state, const Vector& g_xk,
                                         const Vector& f_k, const Vector& gamma) {
  check_state(state, gamma);
  Vector x_tilde = g_difference_combination(state, g_xk, gamma);
  Vector x_bar = x_tilde - ls_residual(state, f_k, gamma);
  return {std::move(x_bar), std::move(x_tilde)};
}

DampingEstimate optimize_damping(const Vector& r_p, const Vector& r_q) {
  if (r_p.size() != r_q.size()) {
    throw std::invalid_argument("optimize_damping: dimension mismatch");
  }
  if (!r_p.allFinite() || !r_q.allFinite()) {
    return {1.0, true};
  }
  const Vector d = r_p - r_q;
  const double scale = d.norm();
  if (scale <= 1e-14 * std::max(r_p.norm(), 1.0)) {
    return {1.0, true};
  }
  // Scale both factors by 1/||d|| before the dot product; the quotient is the
  // exact least-squares minimizer with the squared norm in the denominator.
  const double beta = (d / scale).dot(r_p / scale);
  return {std::min(std::abs(beta), 1.0), false};
}

double apply_safeguard(double beta_raw, const SafeguardStrategy& strategy) {
  switch (strategy.kind) {
  case SafeguardStrategy::Kind::raw:
    return beta_raw == 0.0 ? 1.0 : beta_raw;
  case SafeguardStrategy::Kind::clamp_floor:
    return std::max(beta_raw, strategy.eta);
  case SafeguardStrategy::Kind::flip_below:
    return beta_raw >= strategy.eta ? beta_raw : 1.0 - beta_raw;
  }
  return beta_raw;
}

double theta_ratio(const Vector& alpha, const std::vector<Vector>& residual_history) {
  if (static_cast<size_t>(alpha.size()) != residual_history.size() ||
      residual_history.empty()) {
    throw std::invalid_argument("theta_ratio: alpha and history lengths must match");
  }
  const double denom = residual_history.back().norm();
  if (denom == 0.0) {
    return 0.0;
  }
  Vector combined = Vector::Zero(residual_history.front().size());
  for (size_t i = 0; i < residual_history.size(); ++i) {
    combined.noalias() += alpha(static_cast<Eigen::Index>(i)) * residual_history[i];
  }
  return combined.norm() / denom;
}

ConstrainedLsSolution constrained_ls_oracle(const std::vector<Vector>& residual_columns) {
  if (residual_columns.empty()) {
    throw std::invalid_argument("constrained_ls_oracle: needs at least one column");
  }
  const Eigen::Index n = residual_columns.front().size();
  const Eigen::Index cols = static_cast<Eigen::Index>(residual_columns.size());

  ConstrainedLsSolution out;
  if (cols == 1) {
    out.alpha = Vector::Ones(1);
    out.optimal_value = residual_columns.front().norm();
    return out;
  }

  // Eliminate the constraint through alpha_0 = 1 - sum(alpha_1..alpha_{c-1}):
  // F*alpha = f_0 + B*mu with B_j = f_{j+1} - f_0.
  Eigen::MatrixXd b(n, cols - 1);
  for (Eigen::Index j = 0; j + 1 < cols; ++j) {
    b.col(j) = residual_columns[static_cast<size_t>(j + 1)] - residual_columns.front();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  Vector mu = svd.solve(-residual_columns.front());
  out.rank_deficient = svd.rank() < cols - 1;

  out.alpha = Vector(cols);
  out.alpha(0) = 1.0 - mu.sum();
  out.alpha.tail(cols - 1) = mu;

  Vector combined = residual_columns.front() + b * mu;
  out.optimal_value = combined.norm();
  return out;
}

namespace {

struct History {
  Vector f_prev;
  Vector g_prev;
  bool valid = false;
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

void drop_oldest(AaState& state) {
  state.window.drop_oldest_column();
  state.dg_history.pop_front();
}

SolveReport solve_impl(const FixedPointProblem& problem, const SolverConfig& config,
                       int window_size) {
  config.validate();
  if (!problem.evaluate) {
    throw std::invalid_argument("solve: problem has no evaluate function");
  }
  if (problem.initial_guess.size() != problem.dimension) {
    throw std::invalid_argument("solve: initial guess does not match problem dimension");
  }

  const auto t0 = std::chrono::steady_clock::now();
  SolveReport report;
  report.final_iterate = problem.initial_guess;

  AaState state(problem.dimension, window_size);
  History hist;
  long evals = 0;

  auto eval_g = [&](const Vector& point) {
    ++evals;
    return problem.evaluate(point);
  };

  auto fail = [&](const std::string& why) -> divergence_error {
    report.converged = false;
    report.iterations_used = static_cast<int>(report.trace.size());
    if (!report.trace.empty()) {
      report.final_residual_norm = report.trace.back().residual_norm;
    }
    return divergence_error(why, report);
  };

  Vector x = problem.initial_guess;
  for (int it = 1; it <= config.max_iterations; ++it) {
    Vector gx;
    try {
      gx = eval_g(x);
    } catch (const evaluation_error& e) {
      throw fail(e.what());
    }
    if (gx.size() != problem.dimension) {
      throw std::logic_error("solve: evaluate returned a vector of wrong dimension");
    }
    Vector f = gx - x;
    const double res = f.norm();
    if (!std::isfinite(res)) {
      throw fail("non-finite residual at iteration " + std::to_string(it));
    }

    if (window_size > 0 && hist.valid) {
      if (state.window.full()) {
        drop_oldest(state);
      }
      state.window.append_column(f - hist.f_prev);
      state.dg_history.push_back(gx - hist.g_prev);
      if (config.condition_guard) {
        while (state.window.count() > 1 &&
               state.window.condition_estimate() > *config.condition_guard) {
          drop_oldest(state);
        }
      }
    }

    IterationRecord rec;
    rec.iteration = it;
    rec.residual_norm = res;

    if (res <= config.tolerance) {
      rec.g_evaluations = evals;
      rec.elapsed_ms = ms_since(t0);
      report.trace.push_back(rec);
      report.converged = true;
      report.iterations_used = it;
      report.final_iterate = x;
      report.final_residual_norm = res;
      return report;
    }

    Vector x_next;
    if (state.window.count() == 0) {
      x_next = gx; // no history yet (or pure Picard): take the plain step
    } else {
      Vector gamma;
      bool have_gamma = false;
      bool refactorized = false;
      while (state.window.count() >= 1) {
        try {
          gamma = state.window.solve_least_squares(f);
          have_gamma = true;
          break;
        } catch (const singular_window_error&) {
          if (!refactorized) {
            state.window.refactorize();
            refactorized = true;
            continue;
          }
          if (state.window.count() > 1) {
            drop_oldest(state);
            continue;
          }
          break; // single column, still singular: Picard step this iteration
        }
      }

      if (!have_gamma) {
        x_next = gx;
      } else {
        rec.active_window = static_cast<int>(state.window.count());
        Vector correction = ls_residual(state, f, gamma);
        rec.theta = correction.norm() / res;
        Vector x_tilde = g_difference_combination(state, gx, gamma);

        double beta = 1.0;
        switch (config.damping.kind) {
        case DampingPolicy::Kind::undamped:
          break;
        case DampingPolicy::Kind::constant:
          beta = config.damping.beta;
          break;
        case DampingPolicy::Kind::optimized: {
          Vector x_bar = x_tilde - correction;
          DampingEstimate est{1.0, true};
          try {
            Vector g_bar = eval_g(x_bar);
            Vector g_tilde = eval_g(x_tilde);
            est = optimize_damping(x_bar - g_bar, x_tilde - g_tilde);
          } catch (const evaluation_error&) {
            // g undefined at an auxiliary point: keep the undamped step.
          }
          rec.beta_raw = est.beta_raw;
          rec.degenerate_damping = est.degenerate;
          beta = apply_safeguard(est.beta_raw, config.damping.safeguard);
          break;
        }
        }

        rec.beta_applied = beta;
        x_next = std::move(x_tilde);
        if (beta != 1.0) {
          x_next.noalias() -= (1.0 - beta) * correction;
        }
      }
    }

    rec.g_evaluations = evals;
    rec.elapsed_ms = ms_since(t0);
    report.trace.push_back(rec);

    if (!x_next.allFinite()) {
      report.final_iterate = x;
      throw fail("non-finite iterate at iteration " + std::to_string(it));
    }

    report.final_iterate = x; // last measured point
    report.final_residual_norm = res;
    hist.f_prev = std::move(f);
    hist.g_prev = std::move(gx);
    hist.valid = true;
    x = std::move(x_next);
  }

  report.converged = false;
  report.iterations_used = config.max_iterations;
  return report;
}

} // namespace

SolveReport solve_picard(const FixedPointProblem& problem, const SolverConfig& config) {
  return solve_impl(problem, config, 0);
}

SolveReport solve_aa(const FixedPointProblem& problem, const SolverConfig& config) {
  return solve_impl(problem, config, config.window_size);
}

} // namespace fpacc
