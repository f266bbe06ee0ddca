#include "fpacc/problems.hpp"

#include <cmath>
#include <memory>
#include <numbers>

namespace fpacc {

namespace {

// Unscaled 5-point stencil (4 on the diagonal, -1 for grid neighbors),
// zero Dirichlet boundary.
Vector apply_laplacian_stencil(const Vector& u, int ng) {
  Vector out(u.size());
  for (int row = 0; row < ng; ++row) {
    for (int col = 0; col < ng; ++col) {
      const Eigen::Index i = static_cast<Eigen::Index>(row) * ng + col;
      double v = 4.0 * u(i);
      if (col > 0) v -= u(i - 1);
      if (col + 1 < ng) v -= u(i + 1);
      if (row > 0) v -= u(i - ng);
      if (row + 1 < ng) v -= u(i + ng);
      out(i) = v;
    }
  }
  return out;
}

// Centered first differences in both directions, summed:
// (u_E - u_W) + (u_N - u_S) with zero boundary values.
Vector apply_convection_stencil(const Vector& u, int ng) {
  Vector out(u.size());
  for (int row = 0; row < ng; ++row) {
    for (int col = 0; col < ng; ++col) {
      const Eigen::Index i = static_cast<Eigen::Index>(row) * ng + col;
      double v = 0.0;
      if (col + 1 < ng) v += u(i + 1);
      if (col > 0) v -= u(i - 1);
      if (row + 1 < ng) v += u(i + ng);
      if (row > 0) v -= u(i - ng);
      out(i) = v;
    }
  }
  return out;
}

Vector tridiag_apply(const Vector& x) {
  const Eigen::Index n = x.size();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = 2.0 * x(i);
    if (i > 0) v -= x(i - 1);
    if (i + 1 < n) v -= x(i + 1);
    out(i) = v;
  }
  return out;
}

// Thomas algorithm for tridiag(-1, 2, -1) * x = rhs.
Vector tridiag_solve(const Vector& rhs) {
  const Eigen::Index n = rhs.size();
  Vector c(n), d(n), x(n);
  c(0) = -1.0 / 2.0;
  d(0) = rhs(0) / 2.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double denom = 2.0 - (-1.0) * c(i - 1);
    c(i) = -1.0 / denom;
    d(i) = (rhs(i) + d(i - 1)) / denom;
  }
  x(n - 1) = d(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    x(i) = d(i) - c(i) * x(i + 1);
  }
  return x;
}

void check_grid(const Grid2D& grid) {
  if (grid.interior_points_per_side < 2) {
    throw std::invalid_argument("Grid2D: need at least 2 interior points per side");
  }
}

} // namespace

FixedPointProblem bratu_problem(const Grid2D& grid, double lambda) {
  check_grid(grid);
  if (lambda < 0.0) {
    throw std::invalid_argument("bratu_problem: lambda must be nonnegative");
  }
  const int ng = grid.interior_points_per_side;
  const double h = grid.mesh_width();
  const double lh2 = lambda * h * h;

  FixedPointProblem p;
  p.dimension = grid.unknowns();
  p.initial_guess = Vector::Zero(p.dimension);
  p.evaluate = [ng, lh2](const Vector& u) {
    Vector residual = apply_laplacian_stencil(u, ng);
    residual.array() -= lh2 * u.array().exp();
    return Vector(u - 0.25 * residual);
  };
  return p;
}

FixedPointProblem convection_diffusion_problem(const Grid2D& grid, double k) {
  check_grid(grid);
  if (k < 0.0) {
    throw std::invalid_argument("convection_diffusion_problem: k must be nonnegative");
  }
  const int ng = grid.interior_points_per_side;
  const double h = grid.mesh_width();
  const double kh2 = k * h * h;

  // Source term 2*pi^2*sin(pi x)*sin(pi y), already scaled by h^2.
  auto source = std::make_shared<Vector>(grid.unknowns());
  for (int row = 0; row < ng; ++row) {
    for (int col = 0; col < ng; ++col) {
      const double x = (col + 1) * h;
      const double y = (row + 1) * h;
      (*source)(static_cast<Eigen::Index>(row) * ng + col) =
          h * h * 2.0 * std::numbers::pi * std::numbers::pi *
          std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
    }
  }

  FixedPointProblem p;
  p.dimension = grid.unknowns();
  p.initial_guess = Vector::Ones(p.dimension);
  p.evaluate = [ng, h, kh2, source](const Vector& u) {
    Vector residual = apply_laplacian_stencil(u, ng);
    residual.noalias() += 0.5 * h * apply_convection_stencil(u, ng);
    residual.array() += kh2 * u.array().square();
    residual -= *source;
    return Vector(u - 0.25 * residual);
  };
  return p;
}

FixedPointProblem linear_problem(int n) {
  if (n < 2) {
    throw std::invalid_argument("linear_problem: n must be >= 2");
  }
  const Vector b = Vector::Ones(n);

  FixedPointProblem p;
  p.dimension = n;
  p.initial_guess = Vector::Zero(n);
  p.known_solution = tridiag_solve(b);
  p.evaluate = [b](const Vector& x) { return Vector(x - (tridiag_apply(x) - b)); };
  return p;
}

Eigen::MatrixXd chandrasekhar_kernel(int n_points) {
  if (n_points < 1) {
    throw std::invalid_argument("chandrasekhar_kernel: need at least one node");
  }
  Eigen::VectorXd mu(n_points);
  for (int i = 0; i < n_points; ++i) {
    mu(i) = (i + 0.5) / n_points;
  }
  Eigen::MatrixXd kernel(n_points, n_points);
  for (int i = 0; i < n_points; ++i) {
    for (int j = 0; j < n_points; ++j) {
      kernel(i, j) = mu(i) / (mu(i) + mu(j));
    }
  }
  return kernel;
}

FixedPointProblem chandrasekhar_problem(int n_points, double c) {
  if (c < 0.0 || c > 1.0) {
    throw std::invalid_argument("chandrasekhar_problem: c must lie in [0, 1]");
  }
  auto kernel = std::make_shared<Eigen::MatrixXd>(chandrasekhar_kernel(n_points));
  const double weight = c / (2.0 * n_points);

  FixedPointProblem p;
  p.dimension = n_points;
  p.initial_guess = Vector::Ones(n_points);
  if (c > 0.0 && c < 1.0) {
    p.contraction_bound = 1.0 - std::sqrt(1.0 - c);
  }
  p.evaluate = [kernel, weight](const Vector& x) {
    Vector denom = Vector::Ones(x.size()) - weight * (*kernel * x);
    if ((denom.array() <= 0.0).any()) {
      throw evaluation_error("chandrasekhar: nonpositive denominator");
    }
    return Vector(denom.cwiseInverse());
  };
  return p;
}

const std::vector<ProblemCatalogEntry>& catalog() {
  static const std::vector<ProblemCatalogEntry> entries = [] {
    std::vector<ProblemCatalogEntry> v;
    auto bratu = [](const std::string& name, int ng, int m) {
      return ProblemCatalogEntry{
          name,
          "bratu",
          {{"lambda", 6.0}, {"grid", static_cast<double>(ng)}},
          [ng] { return bratu_problem(Grid2D{ng}, 6.0); },
          m,
          SafeguardStrategy::FlipBelow(0.3)};
    };
    auto convdiff = [](const std::string& name, int ng, int m) {
      return ProblemCatalogEntry{
          name,
          "convdiff",
          {{"k", 3.0}, {"grid", static_cast<double>(ng)}},
          [ng] { return convection_diffusion_problem(Grid2D{ng}, 3.0); },
          m,
          SafeguardStrategy::FlipBelow(0.25)};
    };
    auto linear = [](const std::string& name, int n, int m) {
      return ProblemCatalogEntry{
          name,
          "linear",
          {{"n", static_cast<double>(n)}},
          [n] { return linear_problem(n); },
          m,
          SafeguardStrategy::Raw()};
    };
    auto chandrasekhar = [](const std::string& name, double c, int m) {
      return ProblemCatalogEntry{
          name,
          "chandrasekhar",
          {{"c", c}, {"N", 500.0}},
          [c] { return chandrasekhar_problem(500, c); },
          m,
          SafeguardStrategy::Raw()};
    };
    v.push_back(bratu("bratu-32", 32, 10));
    v.push_back(bratu("bratu-64", 64, 30));
    v.push_back(bratu("bratu-128", 128, 40));
    v.push_back(convdiff("convdiff-32", 32, 5));
    v.push_back(convdiff("convdiff-64", 64, 20));
    v.push_back(linear("linear-10", 10, 10));
    v.push_back(linear("linear-100", 100, 25));
    v.push_back(chandrasekhar("chandrasekhar-0.5", 0.5, 1));
    v.push_back(chandrasekhar("chandrasekhar-0.99", 0.99, 3));
    v.push_back(chandrasekhar("chandrasekhar-1.0", 1.0, 1));
    return v;
  }();
  return entries;
}

const ProblemCatalogEntry& catalog_lookup(const std::string& name) {
  for (const auto& entry : catalog()) {
    if (entry.name == name) {
      return entry;
    }
  }
  throw std::out_of_range("unknown problem: " + name);
}

} // namespace fpacc
