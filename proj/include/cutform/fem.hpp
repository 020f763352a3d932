#pragma once

// P1 finite elements on cut domains.
//
// Element kernels are templated on the scalar so that the same code assembles
// double-valued systems and, with dual numbers, differentiates element
// residuals with respect to the three nodal level-set values of a cut cell.

#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cutform/cut.hpp"
#include "cutform/functional.hpp"
#include "cutform/mesh.hpp"
#include "cutform/quadrature.hpp"

namespace cutform {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Constant P1 shape-function gradients of a background cell.
struct P1Cell {
  std::array<Point, 3> x;
  std::array<Point, 3> grad;
  double area = 0.0;
};

P1Cell p1_cell(const Mesh2D& mesh, int c);

template <class T>
std::array<T, 3> shape_values(const P1Cell& cell, const Vec2<T>& p) {
  return barycentric(cell.x, p);
}

/// The part of a background cell lying in one phase, as triangles.
template <class T>
struct PhasePart {
  std::vector<std::array<Vec2<T>, 3>> triangles;
};

template <class T>
PhasePart<T> phase_part(const Mesh2D& mesh, int c, const std::array<T, 3>& phi, Phase phase) {
  PhasePart<T> part;
  const CellState state = classify(phi);
  if (state == CellState::Cut) {
    const auto cc = cut_triangle(mesh.corners(c), phi);
    for (const auto& s : cc.subs)
      if (s.phase == phase) part.triangles.push_back(s.corners);
  } else if ((state == CellState::In) == (phase == Phase::In)) {
    const auto x = mesh.corners(c);
    part.triangles.push_back({promote<T>(x[0]), promote<T>(x[1]), promote<T>(x[2])});
  }
  return part;
}

/// Calls fn(point, weight) for every quadrature point of the part.
template <class T, class Fn>
void for_each_point(const PhasePart<T>& part, int order, Fn&& fn) {
  const auto& rule = triangle_rule(order);
  for (const auto& t : part.triangles) {
    const Vec2<T> e1 = t[1] - t[0], e2 = t[2] - t[0];
    const T jac = cross(e1, e2);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Vec2<T> p = t[0] + T(rule.points[q][0]) * e1 + T(rule.points[q][1]) * e2;
      fn(p, T(rule.weights[q]) * jac);
    }
  }
}

template <class T>
T part_measure(const PhasePart<T>& part) {
  T a(0.0);
  for (const auto& t : part.triangles) a += T(0.5) * cross(t[1] - t[0], t[2] - t[0]);
  return a;
}

template <class T, int N>
using ElementMatrix = std::array<std::array<T, N>, N>;

/// int_part N_a N_b
template <class T>
ElementMatrix<T, 3> mass_element(const P1Cell& cell, const PhasePart<T>& part) {
  ElementMatrix<T, 3> m{};
  for (auto& r : m) r.fill(T(0.0));
  for_each_point(part, 2, [&](const Vec2<T>& p, const T& w) {
    const auto n = shape_values(cell, p);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m[a][b] += w * n[a] * n[b];
  });
  return m;
}

/// k int_part grad N_a . grad N_b
template <class T>
ElementMatrix<T, 3> laplace_element(const P1Cell& cell, const PhasePart<T>& part, double k) {
  const T area = part_measure(part);
  ElementMatrix<T, 3> m{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m[a][b] = area * (k * dot(cell.grad[a], cell.grad[b]));
  return m;
}

/// int_part f N_a
template <class T>
std::array<T, 3> load_element(const P1Cell& cell, const PhasePart<T>& part, const Integrand& f, int c) {
  std::array<T, 3> b{T(0.0), T(0.0), T(0.0)};
  for_each_point(part, 2, [&](const Vec2<T>& p, const T& w) {
    const auto n = shape_values(cell, p);
    const T fv = f(EvalPoint<T>{p, Vec2<T>{T(0.0), T(0.0)}, c});
    for (int a = 0; a < 3; ++a) b[a] += w * fv * n[a];
  });
  return b;
}

/// Plane linear elasticity, dofs ordered (node a, component i) -> 2a + i.
template <class T>
ElementMatrix<T, 6> elasticity_element(const P1Cell& cell, const PhasePart<T>& part, double lambda, double mu) {
  // Constant strain: the integrand is the area times a fixed 6x6 matrix.
  double k[6][6];
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 2; ++i) {
      for (int b = 0; b < 3; ++b) {
        for (int j = 0; j < 2; ++j) {
          // eps(N_a e_i) : sigma(N_b e_j)
          const double ga[2] = {cell.grad[a].x, cell.grad[a].y};
          const double gb[2] = {cell.grad[b].x, cell.grad[b].y};
          double v = lambda * ga[i] * gb[j] + mu * ga[j] * gb[i];
          if (i == j) v += mu * dot(cell.grad[a], cell.grad[b]);
          k[2 * a + i][2 * b + j] = v;
        }
      }
    }
  }
  const T area = part_measure(part);
  ElementMatrix<T, 6> m{};
  for (int r = 0; r < 6; ++r)
    for (int s = 0; s < 6; ++s) m[r][s] = area * k[r][s];
  return m;
}

/// Dof layout and constraints of a (possibly vector-valued) P1 space.
///
/// Dofs are node * components + component. A dof is active when its node
/// belongs to a cell touching the selected phase; inactive dofs and Dirichlet
/// dofs are constrained and removed from solved systems.
struct FESpace {
  const Mesh2D* mesh = nullptr;
  int components = 1;
  std::vector<char> active;
  std::vector<char> dirichlet;
  /// Prescribed value per dof (used on Dirichlet dofs, zero elsewhere).
  std::vector<double> values;
  /// Compact index of each free dof, or -1.
  std::vector<int> free_index;
  std::vector<int> free_dofs;

  std::size_t num_dofs() const { return active.size(); }
  std::size_t num_free() const { return free_dofs.size(); }
  bool is_free(int dof) const { return free_index[dof] >= 0; }
};

using DirichletValue = std::function<double(const Point&, int component)>;

FESpace make_space(const Mesh2D& mesh, int components, std::span<const CellState> states,
                   const std::vector<std::string>& dirichlet_tags, Phase phase = Phase::In,
                   const DirichletValue& value = {});

/// Full-size operator and load before constraints are applied.
struct Assembly {
  SparseMatrix matrix;
  Vector rhs;
};

/// Constrained system on the free dofs.
struct LinearSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::vector<int> free_dofs;
  /// Full-size vector carrying the prescribed values.
  Vector lift;
};

LinearSystem reduce(const Assembly& assembly, const FESpace& space);
/// Full-size vector from free-dof values.
Vector expand(const LinearSystem& system, const Vector& free_values);

struct PoissonParams {
  double conductivity = 1.0;
  Integrand source;
  double gamma = 1e-7;
  double psi_coefficient = 1.0;
};

struct ElasticityParams {
  double lambda = 1.0;
  double mu = 1.0;
  double gamma = 1e-7;
  double psi_coefficient = 1.0;
};

/// Facets where the ghost penalty acts: interior, both cells active in the
/// phase, at least one of them cut.
std::vector<int> ghost_facets(const FacetSkeleton& skeleton, std::span<const CellState> states, Phase phase);

/// Cut Poisson operator: conductivity form on the phase, k_psi mass on flagged
/// cells (psi per background cell, may be empty), ghost penalty gamma h^3.
Assembly assemble_cut_poisson(const Mesh2D& mesh, const CutTopology<double>& cut, std::span<const double> psi,
                              const PoissonParams& params, Phase phase = Phase::In);

/// Cut elasticity operator, ghost penalty scaled by (lambda + mu).
Assembly assemble_cut_elasticity(const Mesh2D& mesh, const CutTopology<double>& cut,
                                 std::span<const double> psi, const ElasticityParams& params,
                                 Phase phase = Phase::In);

/// int_phase N_a N_b, repeated per component.
Assembly assemble_cut_mass(const Mesh2D& mesh, const CutTopology<double>& cut, int components,
                           Phase phase = Phase::In);

/// Adds int_edges t . v to a vector-valued load.
void add_traction(Assembly& assembly, const Mesh2D& mesh, std::span<const int> edges, const Point& traction);

/// Whole-background P1 stiffness and mass matrices.
SparseMatrix stiffness_matrix(const Mesh2D& mesh);
SparseMatrix mass_matrix(const Mesh2D& mesh);

enum class SolveMethod { Direct, CG };

struct SolveOptions {
  SolveMethod method = SolveMethod::Direct;
  double tolerance = 1e-10;
  int max_iterations = 10000;
  /// Pivot ratio below which a direct factorization is declared singular.
  double singular_ratio = 1e-14;
};

/// Solves a constrained system and returns the full-size solution.
Vector solve(const LinearSystem& system, const SolveOptions& options = {});
/// Solves A x = b; A symmetric positive (semi)definite.
Vector solve_spd(const SparseMatrix& a, const Vector& b, const SolveOptions& options = {});

/// Jacobi-preconditioned conjugate gradients. Throws SolverError with the
/// residual history when max_iterations is reached.
Vector conjugate_gradient(const SparseMatrix& a, const Vector& b, double tolerance, int max_iterations,
                          std::vector<double>* history = nullptr);

/// Solves (alpha^2 K + M) g = dJ over the whole background mesh; the
/// factorization is computed once.
class HilbertianExtension {
 public:
  HilbertianExtension(const Mesh2D& mesh, double alpha);
  std::vector<double> apply(const GradientVector& dj) const;
  double alpha() const { return alpha_; }
  const SparseMatrix& matrix() const { return matrix_; }

 private:
  double alpha_;
  SparseMatrix matrix_;
  std::shared_ptr<void> factor_;
};

/// Area-weighted average of the P1 gradients of the cells around each node.
std::vector<Point> nodal_gradients(const Mesh2D& mesh, std::span<const double> values);

/// beta_i = g_i grad phi_i / max(|grad phi_i|, 1e-10)
std::vector<Point> compute_velocity(std::span<const double> g, const LevelSet& phi, const Mesh2D& mesh);

/// Shortest edge length (the grid spacing on structured meshes).
double mesh_size(const Mesh2D& mesh);

}  // namespace cutform
