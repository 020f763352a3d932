#include "cutform/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cutform {

namespace {

Functional volume_functional() {
  return Functional::volume(Integrand([](const auto& p) { return decltype(p.x.x)(1.0); }));
}

void require_finite(double v, const char* what, int iteration) {
  if (std::isfinite(v)) return;
  std::ostringstream msg;
  msg << what << " is not finite at iteration " << iteration;
  throw NumericalFailure(msg.str());
}

double objective_only(const OptProblem& problem, const LevelSet& phi) {
  if (problem.state == nullptr) return 0.0;
  problem.state->set_level_set(phi);
  AdjointOptions opts;
  opts.threads = problem.threads;
  return problem.state->objective(solve_forward(*problem.state, opts));
}

}  // namespace

ObjectiveValue evaluate_objective(const OptProblem& problem, const LevelSet& phi) {
  ObjectiveValue out;
  if (problem.state == nullptr) {
    out.dJ = GradientVector(problem.mesh->num_vertices());
    return out;
  }
  problem.state->set_level_set(phi);
  AdjointOptions opts;
  opts.threads = problem.threads;
  auto s = evaluate_sensitivity(*problem.state, opts);
  out.J = s.value;
  out.dJ = std::move(s.gradient);
  return out;
}

double volume_constraint(const OptProblem& problem, const LevelSet& phi) {
  const Mesh2D& mesh = *problem.mesh;
  return evaluate(volume_functional(), mesh, phi) - problem.volume_fraction * mesh.total_area();
}

GradientVector volume_constraint_gradient(const OptProblem& problem, const LevelSet& phi) {
  return ad_gradient(volume_functional(), *problem.mesh, phi, {problem.threads});
}

Optimizer::Optimizer(const OptProblem& problem, const ALConfig& config)
    : problem_(problem), config_(config) {
  if (problem.mesh == nullptr) throw InvalidArgument("optimization problem needs a mesh");
  if (!(config.cfl > 0.0) || !(config.cfl_min > 0.0) || config.cfl_min > config.cfl)
    throw InvalidArgument("CFL fractions must satisfy 0 < cfl_min <= cfl");
  if (!(config.rho_growth >= 1.0)) throw InvalidArgument("penalty growth must be at least 1");
  const Mesh2D& mesh = *problem.mesh;
  if (!problem_.non_designable.empty() && problem_.non_designable.size() != mesh.num_vertices())
    throw InvalidArgument("non-designable mask size mismatch");
  skeleton_ = build_skeleton(mesh);
  h_ = cutform::mesh_size(mesh);
  const double alpha = config.alpha > 0.0 ? config.alpha : 2.0 * h_;
  extension_ = std::make_shared<HilbertianExtension>(mesh, alpha);
}

ALState Optimizer::initialize(const LevelSet& phi0) const {
  ALState st;
  const double j0 = objective_only(problem_, phi0);
  const double c0 = volume_constraint(problem_, phi0);
  require_finite(j0, "objective", 0);
  require_finite(c0, "constraint", 0);
  if (config_.rho0 > 0.0) {
    st.rho = config_.rho0;
  } else {
    const double floor = 0.1 * problem_.mesh->total_area();
    const double denom = std::max(std::abs(c0), floor);
    st.rho = 0.1 * std::max({std::abs(j0), std::abs(c0), floor}) / (denom * denom);
  }
  st.rho = std::min(st.rho, config_.rho_max);
  st.cfl = config_.cfl;
  return st;
}

LevelSet Optimizer::step(const LevelSet& phi, ALState& st) const {
  const Mesh2D& mesh = *problem_.mesh;
  const auto obj = evaluate_objective(problem_, phi);
  const double c = volume_constraint(problem_, phi);
  require_finite(obj.J, "objective", st.iteration);
  require_finite(c, "constraint", st.iteration);

  if (st.pending_merit) {
    // Halve the step when the previous one raised the merit or overshot the
    // constraint by more than half its previous size (the multiplier lags, so
    // crossings tend to oscillate).
    const double merit = obj.J + st.pending_lambda * c + 0.5 * st.pending_rho * c * c;
    const bool crossed = c * st.pending_constraint < 0.0 && std::abs(c) > 0.5 * std::abs(st.pending_constraint);
    st.cfl = (merit > *st.pending_merit || crossed) ? std::max(0.5 * st.cfl, config_.cfl_min)
                                                    : std::min(config_.cfl_regrowth * st.cfl, config_.cfl);
  }

  const auto dc = volume_constraint_gradient(problem_, phi);
  const double weight = st.lambda + st.rho * c;
  require_finite(weight, "multiplier weight lambda + rho C", st.iteration);
  GradientVector dl(mesh.num_vertices());
  for (std::size_t i = 0; i < dl.size(); ++i) dl[i] = obj.dJ[i] + weight * dc[i];

  auto g = extension_->apply(dl);
  if (!problem_.non_designable.empty())
    for (std::size_t i = 0; i < g.size(); ++i)
      if (problem_.non_designable[i]) g[i] = 0.0;

  HistoryRow row;
  row.iter = st.iteration;
  row.J = obj.J;
  row.C = c;
  row.lambda = st.lambda;
  row.rho = st.rho;
  row.cfl = st.cfl;
  for (std::size_t i = 0; i < g.size(); ++i) row.descent += g[i] * dl[i];

  // Moving the interface along +g n lowers phi-weighted L: d/dt phi = -g |grad phi|.
  const auto beta = compute_velocity(g, phi, mesh);
  double vmax = 0.0;
  for (const auto& b : beta) vmax = std::max(vmax, norm(b));
  LevelSet next = phi;
  st.velocity_ref = std::max(st.velocity_ref, vmax);
  if (vmax > 0.0) {
    EvolveConfig ec = config_.evolve;
    ec.dt = st.cfl * h_ / st.velocity_ref;
    if (!std::isfinite(ec.dt) || !(ec.dt > 0.0)) {
      std::ostringstream msg;
      msg << "time step " << ec.dt << " is not usable at iteration " << st.iteration;
      throw NumericalFailure(msg.str());
    }
    ec.steps = 1;
    next = evolve(phi, beta, ec, mesh, skeleton_).phi;
  }
  for (std::size_t i = 0; i < next.size(); ++i) {
    require_finite(next[i], "level set", st.iteration);
    row.step_norm = std::max(row.step_norm, std::abs(next[i] - phi[i]));
  }

  st.pending_merit = obj.J + st.lambda * c + 0.5 * st.rho * c * c;
  st.pending_lambda = st.lambda;
  st.pending_constraint = c;
  st.pending_rho = st.rho;
  st.lambda += st.rho * c;
  st.rho = std::min(st.rho * config_.rho_growth, config_.rho_max);
  ++st.iteration;

  if (config_.reinit_every > 0 && st.iteration % config_.reinit_every == 0) {
    const double before = objective_only(problem_, next);
    next = reinitialize(next, config_.reinit, mesh, build_cut(mesh, next)).phi;
    const double after = objective_only(problem_, next);
    if (before != 0.0) row.reinit_change = std::abs(after - before) / std::abs(before);
  }
  st.history.push_back(row);
  return next;
}

RunResult run(const Optimizer& optimizer, const LevelSet& phi0, const StopCriteria& stop,
              const SnapshotHook& snapshot) {
  RunResult out;
  out.state = optimizer.initialize(phi0);
  LevelSet phi = phi0;
  if (snapshot) snapshot(0, phi);
  for (int it = 0; it < stop.max_iters; ++it) {
    LevelSet next = optimizer.step(phi, out.state);
    const auto& h = out.state.history;
    const auto& last = h.back();
    if (std::abs(last.C) <= stop.constraint_tol && static_cast<int>(h.size()) > stop.stagnation_window) {
      const double ref = h[h.size() - 1 - stop.stagnation_window].J;
      const double scale = std::max(std::abs(last.J), std::abs(ref));
      const double change = scale > 0.0 ? std::abs(last.J - ref) / scale : 0.0;
      if (change <= stop.stagnation_tol) {
        // The evaluated iterate satisfies the stopping test; keep it.
        out.converged = true;
        out.J = last.J;
        out.C = last.C;
        out.phi = phi;
        return out;
      }
    }
    phi = std::move(next);
    if (snapshot) snapshot(out.state.iteration, phi);
  }
  out.phi = phi;
  out.J = objective_only(optimizer.problem(), phi);
  out.C = volume_constraint(optimizer.problem(), phi);
  return out;
}

}  // namespace cutform
