#ifndef FPACC_PROBLEMS_HPP
#define FPACC_PROBLEMS_HPP

#include "fpacc/fixed_point.hpp"

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace fpacc {

/// Uniform grid on the unit square with zero Dirichlet boundary: n_g interior
/// points per side, mesh width h = 1/(n_g + 1), unknowns ordered row-major.
struct Grid2D {
  int interior_points_per_side = 2;

  double mesh_width() const { return 1.0 / (interior_points_per_side + 1); }
  Eigen::Index unknowns() const {
    return static_cast<Eigen::Index>(interior_points_per_side) * interior_points_per_side;
  }
};

/// Bratu problem: 5-point discretization of Delta(u) + lambda*exp(u) = 0 on
/// the unit square with u = 0 on the boundary, as the Jacobi-preconditioned
/// map g(u) = u - (A*u - lambda*h^2*exp(u)) / 4. Zero initial guess.
FixedPointProblem bratu_problem(const Grid2D& grid, double lambda);

/// Nonlinear convection-diffusion problem
/// -u_xx - u_yy + u_x + u_y + k*u^2 = 2*pi^2*sin(pi x)*sin(pi y), zero
/// boundary values, centered differences throughout, preconditioned the same
/// way as the Bratu map. All-ones initial guess.
FixedPointProblem convection_diffusion_problem(const Grid2D& grid, double k);

/// Linear system A*x = b with A = tridiag(-1, 2, -1) and b all ones, as the
/// Richardson map g(x) = x - (A*x - b). Zero initial guess; known_solution is
/// the direct solve. Plain Picard diverges on this map.
FixedPointProblem linear_problem(int n);

/// Midpoint-rule discretization of the Chandrasekhar H-equation,
/// g(x)_i = 1 / (1 - (c/(2N)) * sum_j mu_i x_j / (mu_i + mu_j)) with
/// mu_i = (i - 1/2)/N. All-ones initial guess; for c < 1 the contraction
/// bound 1 - sqrt(1-c) is attached.
FixedPointProblem chandrasekhar_problem(int n_points, double c);

/// The N x N kernel mu_i / (mu_i + mu_j); satisfies K_ij + K_ji = 1.
Eigen::MatrixXd chandrasekhar_kernel(int n_points);

struct ProblemCatalogEntry {
  std::string name;
  std::string family;
  std::vector<std::pair<std::string, double>> parameters;
  std::function<FixedPointProblem()> make;
  int suggested_window = 1;
  SafeguardStrategy suggested_safeguard{};
};

/// All benchmark configurations by name: bratu-32/64/128, convdiff-32/64,
/// linear-10/100, chandrasekhar-0.5/0.99/1.0.
const std::vector<ProblemCatalogEntry>& catalog();

/// Throws std::out_of_range for names not in the catalog.
const ProblemCatalogEntry& catalog_lookup(const std::string& name);

} // namespace fpacc

#endif
