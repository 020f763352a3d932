#pragma once

// Level-set transport and reinitialization on the background mesh.

#include <span>
#include <string>
#include <vector>

#include "cutform/fem.hpp"
#include "cutform/levelset.hpp"
#include "cutform/mesh.hpp"

namespace cutform {

struct EvolveConfig {
  /// Interior-penalty coefficient.
  double c_e = 0.01;
  double dt = 0.0;
  int steps = 1;
  /// Scale the facet penalty by |n_F . beta|. When false the penalty uses the
  /// constant max|beta| instead, as in formulations without that factor.
  bool velocity_weighted = true;
};

struct EvolveResult {
  LevelSet phi;
  /// dt * max|beta| / h
  double courant = 0.0;
  /// Set when dt exceeds h / max|beta|; the step is still taken.
  std::string advisory;
};

/// Crank-Nicolson transport d phi/dt + beta . grad phi = 0 with a
/// continuous interior penalty on interior facets.
EvolveResult evolve(const LevelSet& phi, std::span<const Point> beta, const EvolveConfig& config,
                    const Mesh2D& mesh, const FacetSkeleton& skeleton);

/// Advection and facet-penalty operators A(beta), S(beta) for inspection.
SparseMatrix advection_matrix(const Mesh2D& mesh, std::span<const Point> beta);
SparseMatrix transport_penalty_matrix(const Mesh2D& mesh, const FacetSkeleton& skeleton,
                                      std::span<const Point> beta, double c_e, bool velocity_weighted);

enum class ReinitVariant { Viscosity, InteriorPenalty };

struct ReinitConfig {
  double c_r1 = 0.5;
  double c_r2 = 0.1;
  double gamma_d = 20.0;
  ReinitVariant variant = ReinitVariant::Viscosity;
  double picard_tol = 1e-6;
  int picard_maxit = 50;
};

struct ReinitResult {
  LevelSet phi;
  bool converged = false;
  int iterations = 0;
  /// Relative nodal change per Picard iteration.
  std::vector<double> changes;
};

/// phi / sqrt(phi^2 + h^2 |grad phi|^2)
double approximate_sign(double phi, double h, double grad_norm);

/// Picard iteration for |grad phi| = 1 with the interface of phi0 held in
/// place by a surface penalty. Returns the last iterate with a flag when the
/// iteration does not converge.
ReinitResult reinitialize(const LevelSet& phi0, const ReinitConfig& config, const Mesh2D& mesh,
                          const CutTopology<double>& cut0);

}  // namespace cutform
