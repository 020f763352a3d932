#pragma once

// Staggered forward solves and their reverse-order adjoint.
//
// Stage i solves R_i(u_1, ..., u_i; v_i, phi) = 0 for u_i, given the earlier
// stages. The adjoint runs backwards:
//   (dR_i/du_i)^T lambda_i = dJ/du_i - sum_{j>i} (dR_j/du_i)^T lambda_j
// and the total derivative is dJ/dphi - sum_i dR_i/dphi[lambda_i].
//
// All residuals here are affine in u. Constrained dofs (Dirichlet or outside
// the active region) carry the identity equation u = 0 and are eliminated
// symmetrically from the Jacobians.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cutform/fem.hpp"
#include "cutform/functional.hpp"
#include "cutform/levelset.hpp"
#include "cutform/mesh.hpp"

namespace cutform {

class StaggeredProblem {
 public:
  virtual ~StaggeredProblem() = default;

  virtual int stages() const = 0;
  /// Number of dofs of stage i.
  virtual int stage_size(int i) const = 0;
  /// Rebuilds every phi-dependent quantity.
  virtual void set_level_set(const LevelSet& phi) = 0;
  virtual const LevelSet& level_set() const = 0;

  /// R_i evaluated at u (entries of later stages are ignored).
  virtual Vector residual(int i, std::span<const Vector> u) const = 0;
  /// dR_i / du_j for j <= i.
  virtual SparseMatrix jacobian(int i, int j) const = 0;
  virtual bool symmetric(int /*i*/) const { return true; }

  virtual double objective(std::span<const Vector> u) const = 0;
  virtual Vector objective_du(int i, std::span<const Vector> u) const = 0;
  /// Partial derivative of J with respect to the nodal values at frozen u.
  virtual GradientVector objective_dphi(std::span<const Vector> u) const = 0;
  /// dR_i/dphi contracted with lambda_i at frozen u.
  virtual GradientVector residual_dphi(int i, std::span<const Vector> u, const Vector& lambda) const = 0;
};

struct AdjointOptions {
  SolveOptions solver;
  int threads = 1;
};

/// Solves stages 1..k in order. Failures name the stage.
std::vector<Vector> solve_forward(const StaggeredProblem& problem, const AdjointOptions& options = {});
/// Solves the adjoint stages k..1.
std::vector<Vector> solve_adjoint(const StaggeredProblem& problem, std::span<const Vector> u,
                                  const AdjointOptions& options = {});
GradientVector total_derivative(const StaggeredProblem& problem, std::span<const Vector> u,
                                std::span<const Vector> lambda, const AdjointOptions& options = {});
/// J(u) - sum_i lambda_i . R_i(u)
double lagrangian(const StaggeredProblem& problem, std::span<const Vector> u, std::span<const Vector> lambda);

struct Sensitivity {
  double value = 0.0;
  GradientVector gradient;
  std::vector<Vector> u;
  std::vector<Vector> lambda;
};

/// Forward, adjoint and total derivative at the problem's current level set.
Sensitivity evaluate_sensitivity(const StaggeredProblem& problem, const AdjointOptions& options = {});

/// Boundary conditions and material data shared by the demo problems.
struct CutProblemSetup {
  const Mesh2D* mesh = nullptr;
  std::vector<std::string> dirichlet_tags{"left"};
  /// Penalize volumes not connected to the Dirichlet boundary.
  bool detect_isolated = true;
  double gamma = 1e-7;
  double psi_coefficient = 1.0;
  int threads = 1;
};

/// One stage: -div(grad u) = f on Omega, u = 0 on the Dirichlet tags;
/// J = int_Omega f u.
std::unique_ptr<StaggeredProblem> make_poisson_compliance(const CutProblemSetup& setup, double source = 1.0);

/// Two stages: a temperature theta from -div(grad theta) = f, then a
/// displacement loaded by thermal expansion alpha theta div v;
/// J = int_Omega theta^2 + |u|^2.
std::unique_ptr<StaggeredProblem> make_thermoelastic(const CutProblemSetup& setup, double source = 1.0,
                                                     double expansion = 1.0, double lambda = 1.0, double mu = 1.0);

/// One stage: plane elasticity with a traction on the given edges;
/// J = int_Omega sigma(u) : eps(u).
std::unique_ptr<StaggeredProblem> make_elastic_compliance(const CutProblemSetup& setup, std::vector<int> load_edges,
                                                          Point traction, double lambda = 1.0, double mu = 1.0);

/// Isolated-volume indicator per background cell for the IN phase.
std::vector<double> isolated_indicator(const Mesh2D& mesh, const CutTopology<double>& cut,
                                       const std::vector<std::string>& dirichlet_tags);

}  // namespace cutform
