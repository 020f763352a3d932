#include "cutform/adjoint.hpp"

#include <Eigen/SparseLU>
#include <sstream>

#include "cutform/isolated.hpp"

namespace cutform {

namespace {

Vector stage_solve(const StaggeredProblem& p, int i, const SparseMatrix& a, const Vector& b,
                   const AdjointOptions& options, const char* what) {
  try {
    if (p.symmetric(i)) return solve_spd(a, b, options.solver);
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed");
    return lu.solve(b);
  } catch (const SolverError& e) {
    std::ostringstream msg;
    msg << what << " stage " << i + 1 << ": " << e.what();
    throw SolverError(msg.str(), e.residual_history());
  }
}

}  // namespace

std::vector<Vector> solve_forward(const StaggeredProblem& problem, const AdjointOptions& options) {
  const int k = problem.stages();
  std::vector<Vector> u(k);
  for (int i = 0; i < k; ++i) u[i] = Vector::Zero(problem.stage_size(i));
  for (int i = 0; i < k; ++i) {
    // Affine stages: u_i = -K_ii^{-1} R_i(u_1, ..., u_{i-1}, 0).
    const Vector r = problem.residual(i, u);
    u[i] = -stage_solve(problem, i, problem.jacobian(i, i), r, options, "forward");
  }
  return u;
}

std::vector<Vector> solve_adjoint(const StaggeredProblem& problem, std::span<const Vector> u,
                                  const AdjointOptions& options) {
  const int k = problem.stages();
  std::vector<Vector> lambda(k);
  for (int i = k - 1; i >= 0; --i) {
    Vector rhs = problem.objective_du(i, u);
    for (int j = i + 1; j < k; ++j) rhs -= problem.jacobian(j, i).transpose() * lambda[j];
    const SparseMatrix kt = problem.jacobian(i, i).transpose();
    lambda[i] = stage_solve(problem, i, kt, rhs, options, "adjoint");
  }
  return lambda;
}

GradientVector total_derivative(const StaggeredProblem& problem, std::span<const Vector> u,
                                std::span<const Vector> lambda, const AdjointOptions& /*options*/) {
  GradientVector g = problem.objective_dphi(u);
  for (int i = 0; i < problem.stages(); ++i) {
    const GradientVector r = problem.residual_dphi(i, u, lambda[i]);
    for (std::size_t n = 0; n < g.size(); ++n) g[n] -= r[n];
  }
  return g;
}

double lagrangian(const StaggeredProblem& problem, std::span<const Vector> u, std::span<const Vector> lambda) {
  double l = problem.objective(u);
  for (int i = 0; i < problem.stages(); ++i) l -= lambda[i].dot(problem.residual(i, u));
  return l;
}

Sensitivity evaluate_sensitivity(const StaggeredProblem& problem, const AdjointOptions& options) {
  Sensitivity s;
  s.u = solve_forward(problem, options);
  s.value = problem.objective(s.u);
  s.lambda = solve_adjoint(problem, s.u, options);
  s.gradient = total_derivative(problem, s.u, s.lambda, options);
  return s;
}

std::vector<double> isolated_indicator(const Mesh2D& mesh, const CutTopology<double>& cut,
                                       const std::vector<std::string>& dirichlet_tags) {
  const auto graph = build_cut_graph(mesh, cut);
  const auto colouring = colour_graph(graph.graph);
  return mark_isolated(graph, colouring, mesh, edges_with_tags(mesh, dirichlet_tags), Phase::In);
}

namespace {

/// Keeps entries with free row and free column; puts 1 on the diagonal of
/// constrained rows when `identity` is set.
SparseMatrix eliminate(const SparseMatrix& k, const FESpace& rows, const FESpace& cols, bool identity) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(k.nonZeros());
  for (int o = 0; o < k.outerSize(); ++o)
    for (SparseMatrix::InnerIterator it(k, o); it; ++it)
      if (rows.is_free(static_cast<int>(it.row())) && cols.is_free(static_cast<int>(it.col())))
        trip.emplace_back(it.row(), it.col(), it.value());
  if (identity)
    for (int d = 0; d < static_cast<int>(rows.num_dofs()); ++d)
      if (!rows.is_free(d)) trip.emplace_back(d, d, 1.0);
  SparseMatrix out(k.rows(), k.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Vector mask(const Vector& v, const FESpace& sp) {
  Vector out = v;
  for (int d = 0; d < static_cast<int>(sp.num_dofs()); ++d)
    if (!sp.is_free(d)) out[d] = 0.0;
  return out;
}

Integrand constant(double s) {
  return Integrand([s](const auto& p) { return decltype(p.x.x)(s); });
}

/// Cell-local values of a nodal vector with `comps` components.
template <int N>
std::array<double, N> gather(const Mesh2D& mesh, int c, const Vector& v) {
  constexpr int comps = N / 3;
  std::array<double, N> out{};
  const auto& t = mesh.triangle(c);
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < comps; ++i) out[comps * a + i] = v[t[a] * comps + i];
  return out;
}

template <class T, std::size_t N>
T bilinear(const std::array<std::array<T, N>, N>& m, const std::array<double, N>& x, const std::array<double, N>& y) {
  T s(0.0);
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) s += m[a][b] * (x[a] * y[b]);
  return s;
}

/// Shared state of the demo problems: cut, isolated-volume indicator.
class CutProblem : public StaggeredProblem {
 public:
  explicit CutProblem(const CutProblemSetup& setup) : setup_(setup) {
    if (setup.mesh == nullptr) throw InvalidArgument("problem setup needs a mesh");
  }
  const LevelSet& level_set() const override { return phi_; }

 protected:
  void rebuild_cut(const LevelSet& phi) {
    phi_ = phi;
    cut_ = build_cut(mesh(), phi_);
    psi_ = setup_.detect_isolated ? isolated_indicator(mesh(), cut_, setup_.dirichlet_tags)
                                  : std::vector<double>(mesh().num_cells(), 0.0);
  }
  const Mesh2D& mesh() const { return *setup_.mesh; }
  double psi(int c) const { return psi_[c]; }
  GradientVector cell_gradient(const CellFunction& f) const {
    return ad_cell_gradient(mesh(), phi_, f, {setup_.threads});
  }

  CutProblemSetup setup_;
  LevelSet phi_;
  CutTopology<double> cut_;
  std::vector<double> psi_;
};

/// Scalar diffusion operator pieces for one cell in scalar type T.
template <class T>
ElementMatrix<T, 3> poisson_cell(const P1Cell& cell, const PhasePart<T>& part, double psi_scale) {
  auto k = laplace_element(cell, part, 1.0);
  if (psi_scale != 0.0) {
    const auto m = mass_element(cell, part);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) k[a][b] += psi_scale * m[a][b];
  }
  return k;
}

template <class T>
ElementMatrix<T, 6> elastic_cell(const P1Cell& cell, const PhasePart<T>& part, double lambda, double mu,
                                 double psi_scale) {
  auto k = elasticity_element(cell, part, lambda, mu);
  if (psi_scale != 0.0) {
    const auto m = mass_element(cell, part);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 2; ++i) k[2 * a + i][2 * b + i] += psi_scale * m[a][b];
  }
  return k;
}

/// alpha int N_b d_i N_a: rows (a, i), columns b.
template <class T>
std::array<std::array<T, 3>, 6> coupling_cell(const P1Cell& cell, const PhasePart<T>& part, double alpha) {
  std::array<T, 3> integral{T(0.0), T(0.0), T(0.0)};
  for_each_point(part, 2, [&](const Vec2<T>& p, const T& w) {
    const auto n = shape_values(cell, p);
    for (int b = 0; b < 3; ++b) integral[b] += w * n[b];
  });
  std::array<std::array<T, 3>, 6> out{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      out[2 * a][b] = integral[b] * (alpha * cell.grad[a].x);
      out[2 * a + 1][b] = integral[b] * (alpha * cell.grad[a].y);
    }
  return out;
}

class PoissonCompliance final : public CutProblem {
 public:
  PoissonCompliance(const CutProblemSetup& setup, double source) : CutProblem(setup), source_(source) {}

  int stages() const override { return 1; }
  int stage_size(int) const override { return static_cast<int>(mesh().num_vertices()); }

  void set_level_set(const LevelSet& phi) override {
    rebuild_cut(phi);
    space_ = make_space(mesh(), 1, cut_.states, setup_.dirichlet_tags);
    PoissonParams params;
    params.source = constant(source_);
    params.gamma = setup_.gamma;
    params.psi_coefficient = setup_.psi_coefficient;
    const auto a = assemble_cut_poisson(mesh(), cut_, psi_, params);
    k_ = eliminate(a.matrix, space_, space_, true);
    b_ = mask(a.rhs, space_);
  }

  Vector residual(int, std::span<const Vector> u) const override { return k_ * u[0] - b_; }
  SparseMatrix jacobian(int, int) const override { return k_; }
  double objective(std::span<const Vector> u) const override { return b_.dot(u[0]); }
  Vector objective_du(int, std::span<const Vector>) const override { return b_; }

  GradientVector objective_dphi(std::span<const Vector> u) const override {
    const Integrand f = constant(source_);
    return cell_gradient([&](int c, const std::array<Dual1, 3>& phi) {
      const P1Cell cell = p1_cell(mesh(), c);
      const auto part = phase_part(mesh(), c, phi, Phase::In);
      const auto b = load_element(cell, part, f, c);
      const auto uc = gather<3>(mesh(), c, u[0]);
      return b[0] * uc[0] + b[1] * uc[1] + b[2] * uc[2];
    });
  }

  GradientVector residual_dphi(int, std::span<const Vector> u, const Vector& lambda) const override {
    const Integrand f = constant(source_);
    return cell_gradient([&](int c, const std::array<Dual1, 3>& phi) {
      const P1Cell cell = p1_cell(mesh(), c);
      const auto part = phase_part(mesh(), c, phi, Phase::In);
      const auto k = poisson_cell(cell, part, setup_.psi_coefficient * psi(c));
      const auto b = load_element(cell, part, f, c);
      const auto uc = gather<3>(mesh(), c, u[0]);
      const auto lc = gather<3>(mesh(), c, lambda);
      Dual1 r = bilinear(k, lc, uc);
      for (int a = 0; a < 3; ++a) r -= b[a] * lc[a];
      return r;
    });
  }

 private:
  double source_;
  FESpace space_;
  SparseMatrix k_;
  Vector b_;
};

class ThermoElastic final : public CutProblem {
 public:
  ThermoElastic(const CutProblemSetup& setup, double source, double expansion, double lambda, double mu)
      : CutProblem(setup), source_(source), alpha_(expansion), lambda_(lambda), mu_(mu) {}

  int stages() const override { return 2; }
  int stage_size(int i) const override { return static_cast<int>(mesh().num_vertices()) * (i + 1); }

  void set_level_set(const LevelSet& phi) override {
    rebuild_cut(phi);
    theta_space_ = make_space(mesh(), 1, cut_.states, setup_.dirichlet_tags);
    u_space_ = make_space(mesh(), 2, cut_.states, setup_.dirichlet_tags);
    PoissonParams pp;
    pp.source = constant(source_);
    pp.gamma = setup_.gamma;
    pp.psi_coefficient = setup_.psi_coefficient;
    const auto a1 = assemble_cut_poisson(mesh(), cut_, psi_, pp);
    k1_ = eliminate(a1.matrix, theta_space_, theta_space_, true);
    b1_ = mask(a1.rhs, theta_space_);
    ElasticityParams ep;
    ep.lambda = lambda_;
    ep.mu = mu_;
    ep.gamma = setup_.gamma;
    ep.psi_coefficient = setup_.psi_coefficient;
    k2_ = eliminate(assemble_cut_elasticity(mesh(), cut_, psi_, ep).matrix, u_space_, u_space_, true);
    c_ = eliminate(coupling(), u_space_, theta_space_, false);
    m1_ = assemble_cut_mass(mesh(), cut_, 1).matrix;
    m2_ = assemble_cut_mass(mesh(), cut_, 2).matrix;
  }

  Vector residual(int i, std::span<const Vector> u) const override {
    if (i == 0) return k1_ * u[0] - b1_;
    return k2_ * u[1] - c_ * u[0];
  }
  SparseMatrix jacobian(int i, int j) const override {
    if (i == 0) return k1_;
    return j == 1 ? k2_ : SparseMatrix(-c_);
  }
  double objective(std::span<const Vector> u) const override {
    return u[0].dot(m1_ * u[0]) + u[1].dot(m2_ * u[1]);
  }
  Vector objective_du(int i, std::span<const Vector> u) const override {
    return i == 0 ? mask(2.0 * (m1_ * u[0]), theta_space_) : mask(2.0 * (m2_ * u[1]), u_space_);
  }

  GradientVector objective_dphi(std::span<const Vector> u) const override {
    return cell_gradient([&](int c, const std::array<Dual1, 3>& phi) {
      const P1Cell cell = p1_cell(mesh(), c);
      const auto part = phase_part(mesh(), c, phi, Phase::In);
      const auto m = mass_element(cell, part);
      const auto th = gather<3>(mesh(), c, u[0]);
      const auto d = gather<6>(mesh(), c, u[1]);
      Dual1 j = bilinear(m, th, th);
      for (int i = 0; i < 2; ++i) {
        const std::array<double, 3> di{d[i], d[2 + i], d[4 + i]};
        j += bilinear(m, di, di);
      }
      return j;
    });
  }

  GradientVector residual_dphi(int i, std::span<const Vector> u, const Vector& lambda) const override {
    if (i == 0) {
      const Integrand f = constant(source_);
      return cell_gradient([&](int c, const std::array<Dual1, 3>& phi) {
        const P1Cell cell = p1_cell(mesh(), c);
        const auto part = phase_part(mesh(), c, phi, Phase::In);
        const auto k = poisson_cell(cell, part, setup_.psi_coefficient * psi(c));
        const auto b = load_element(cell, part, f, c);
        const auto th = gather<3>(mesh(), c, u[0]);
        const auto lc = gather<3>(mesh(), c, lambda);
        Dual1 r = bilinear(k, lc, th);
        for (int a = 0; a < 3; ++a) r -= b[a] * lc[a];
        return r;
      });
    }
    return cell_gradient([&](int c, const std::array<Dual1, 3>& phi) {
      const P1Cell cell = p1_cell(mesh(), c);
      const auto part = phase_part(mesh(), c, phi, Phase::In);
      const auto k = elastic_cell(cell, part, lambda_, mu_, setup_.psi_coefficient * psi(c));
      const auto cp = coupling_cell(cell, part, alpha_);
      const auto th = gather<3>(mesh(), c, u[0]);
      const auto d = gather<6>(mesh(), c, u[1]);
      auto lc = gather<6>(mesh(), c, lambda);
      // Constrained rows carry no phi dependence.
      const auto& t = mesh().triangle(c);
      for (int r = 0; r < 6; ++r)
        if (!u_space_.is_free(2 * t[r / 2] + r % 2)) lc[r] = 0.0;
      Dual1 r = bilinear(k, lc, d);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 3; ++b)
          if (theta_space_.is_free(t[b])) r -= cp[a][b] * (lc[a] * th[b]);
      return r;
    });
  }

 private:
  SparseMatrix coupling() const {
    const int nv = static_cast<int>(mesh().num_vertices());
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < static_cast<int>(mesh().num_cells()); ++c) {
      PhasePart<double> part;
      if (const auto* cc = cut_.cut_of(c)) {
        for (const auto& s : cc->subs)
          if (s.phase == Phase::In) part.triangles.push_back(s.corners);
      } else if (cut_.states[c] == CellState::In) {
        part.triangles.push_back(mesh().corners(c));
      }
      if (part.triangles.empty()) continue;
      const auto cp = coupling_cell(p1_cell(mesh(), c), part, alpha_);
      const auto& t = mesh().triangle(c);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 3; ++b) trip.emplace_back(2 * t[a / 2] + a % 2, t[b], cp[a][b]);
    }
    SparseMatrix m(2 * nv, nv);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

  double source_, alpha_, lambda_, mu_;
  FESpace theta_space_, u_space_;
  SparseMatrix k1_, k2_, c_, m1_, m2_;
  Vector b1_;
};

class ElasticCompliance final : public CutProblem {
 public:
  ElasticCompliance(const CutProblemSetup& setup, std::vector<int> load_edges, Point traction, double lambda,
                    double mu)
      : CutProblem(setup), edges_(std::move(load_edges)), traction_(traction), lambda_(lambda), mu_(mu) {}

  int stages() const override { return 1; }
  int stage_size(int) const override { return static_cast<int>(mesh().num_vertices()) * 2; }

  void set_level_set(const LevelSet& phi) override {
    rebuild_cut(phi);
    space_ = make_space(mesh(), 2, cut_.states, setup_.dirichlet_tags);
    ElasticityParams ep;
    ep.lambda = lambda_;
    ep.mu = mu_;
    ep.gamma = setup_.gamma;
    ep.psi_coefficient = setup_.psi_coefficient;
    auto a = assemble_cut_elasticity(mesh(), cut_, psi_, ep);
    add_traction(a, mesh(), edges_, traction_);
    k_ = eliminate(a.matrix, space_, space_, true);
    f_ = mask(a.rhs, space_);
    ep.gamma = 0.0;
    physical_ = assemble_cut_elasticity(mesh(), cut_, {}, ep).matrix;
  }

  Vector residual(int, std::span<const Vector> u) const override { return k_ * u[0] - f_; }
  SparseMatrix jacobian(int, int) const override { return k_; }
  double objective(std::span<const Vector> u) const override { return u[0].dot(physical_ * u[0]); }
  Vector objective_du(int, std::span<const Vector> u) const override {
    return mask(2.0 * (physical_ * u[0]), space_);
  }

  GradientVector objective_dphi(std::span<const Vector> u) const override {
    return cell_gradient([&](int c, const std::array<Dual1, 3>& phi) {
      const P1Cell cell = p1_cell(mesh(), c);
      const auto part = phase_part(mesh(), c, phi, Phase::In);
      const auto d = gather<6>(mesh(), c, u[0]);
      return bilinear(elasticity_element(cell, part, lambda_, mu_), d, d);
    });
  }

  GradientVector residual_dphi(int, std::span<const Vector> u, const Vector& lambda) const override {
    return cell_gradient([&](int c, const std::array<Dual1, 3>& phi) {
      const P1Cell cell = p1_cell(mesh(), c);
      const auto part = phase_part(mesh(), c, phi, Phase::In);
      const auto d = gather<6>(mesh(), c, u[0]);
      const auto lc = gather<6>(mesh(), c, lambda);
      return bilinear(elastic_cell(cell, part, lambda_, mu_, setup_.psi_coefficient * psi(c)), lc, d);
    });
  }

 private:
  std::vector<int> edges_;
  Point traction_;
  double lambda_, mu_;
  FESpace space_;
  SparseMatrix k_, physical_;
  Vector f_;
};

}  // namespace

std::unique_ptr<StaggeredProblem> make_poisson_compliance(const CutProblemSetup& setup, double source) {
  return std::make_unique<PoissonCompliance>(setup, source);
}

std::unique_ptr<StaggeredProblem> make_thermoelastic(const CutProblemSetup& setup, double source, double expansion,
                                                     double lambda, double mu) {
  return std::make_unique<ThermoElastic>(setup, source, expansion, lambda, mu);
}

std::unique_ptr<StaggeredProblem> make_elastic_compliance(const CutProblemSetup& setup, std::vector<int> load_edges,
                                                          Point traction, double lambda, double mu) {
  return std::make_unique<ElasticCompliance>(setup, std::move(load_edges), traction, lambda, mu);
}

}  // namespace cutform
