#pragma once

// Augmented-Lagrangian loop for min J(phi) subject to Vol(Omega) = V_f Vol(D):
// gradient -> Hilbertian extension -> normal velocity -> transport, with
// periodic reinitialization.

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cutform/adjoint.hpp"
#include "cutform/evolve.hpp"

namespace cutform {

struct OptProblem {
  const Mesh2D* mesh = nullptr;
  /// State-constrained objective; null means J = 0.
  StaggeredProblem* state = nullptr;
  double volume_fraction = 0.5;
  /// Nodes whose velocity is forced to zero.
  std::vector<char> non_designable;
  int threads = 1;
};

struct ALConfig {
  /// Initial penalty; <= 0 selects 0.1 max(|J0|, |C0|) / max(|C0|, 0.1 Vol(D))^2.
  double rho0 = 0.0;
  double rho_growth = 1.1;
  double rho_max = 1e8;
  /// Maximum CFL fraction of h / max|beta|.
  double cfl = 0.1;
  /// The fraction is halved (down to this floor) when a step raises the merit
  /// function or flips the sign of C with an overshoot above half of |C|, and regrows by cfl_regrowth otherwise.
  double cfl_min = 0.005;
  double cfl_regrowth = 1.1;
  /// Smoothing length of the extension; <= 0 selects 2h.
  double alpha = 0.0;
  int reinit_every = 5;
  EvolveConfig evolve;
  ReinitConfig reinit;
};

struct HistoryRow {
  int iter = 0;
  double J = 0.0;
  double C = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  double cfl = 0.0;
  /// <g, dL>, non-negative for a descent direction.
  double descent = 0.0;
  /// max_i |phi' - phi| of the transport step.
  double step_norm = 0.0;
  /// Relative J change caused by reinitialization after this step (0 if none).
  double reinit_change = 0.0;
};

struct ALState {
  double lambda = 0.0;
  double rho = 0.0;
  double cfl = 0.0;
  /// Largest max|beta| seen so far; dt = cfl h / velocity_ref, so the step
  /// shrinks with the gradient instead of moving a fixed distance.
  double velocity_ref = 0.0;
  int iteration = 0;
  std::vector<HistoryRow> history;
  // Merit of the previous step, measured with that step's lambda and rho.
  std::optional<double> pending_merit;
  double pending_lambda = 0.0, pending_rho = 0.0, pending_constraint = 0.0;
};

/// J and dJ at phi (zero when the problem has no state).
struct ObjectiveValue {
  double J = 0.0;
  GradientVector dJ;
};
ObjectiveValue evaluate_objective(const OptProblem& problem, const LevelSet& phi);

/// C(phi) = Vol(Omega) - V_f Vol(D) and its derivative.
double volume_constraint(const OptProblem& problem, const LevelSet& phi);
GradientVector volume_constraint_gradient(const OptProblem& problem, const LevelSet& phi);

class Optimizer {
 public:
  Optimizer(const OptProblem& problem, const ALConfig& config);

  /// Initial multiplier state at phi0.
  ALState initialize(const LevelSet& phi0) const;
  /// One AL iteration; appends a history row.
  LevelSet step(const LevelSet& phi, ALState& state) const;

  const ALConfig& config() const { return config_; }
  const OptProblem& problem() const { return problem_; }
  double mesh_size() const { return h_; }

 private:
  OptProblem problem_;
  ALConfig config_;
  FacetSkeleton skeleton_;
  double h_;
  std::shared_ptr<HilbertianExtension> extension_;
};

struct StopCriteria {
  int max_iters = 300;
  double constraint_tol = 1e-3;
  /// Stop once |C| <= tol and J changed by less than this (relative) over the window.
  double stagnation_tol = 1e-3;
  int stagnation_window = 10;
};

struct RunResult {
  LevelSet phi;
  ALState state;
  bool converged = false;
  /// J at the returned phi.
  double J = 0.0;
  double C = 0.0;
};

using SnapshotHook = std::function<void(int iteration, const LevelSet& phi)>;

/// Iterates Optimizer::step. Throws NumericalFailure on non-finite J or C.
RunResult run(const Optimizer& optimizer, const LevelSet& phi0, const StopCriteria& stop,
              const SnapshotHook& snapshot = {});

}  // namespace cutform
