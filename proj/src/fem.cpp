#include "cutform/fem.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace cutform {

using Triplet = Eigen::Triplet<double>;

P1Cell p1_cell(const Mesh2D& mesh, int c) {
  P1Cell cell;
  cell.x = mesh.corners(c);
  const Point e1 = cell.x[1] - cell.x[0], e2 = cell.x[2] - cell.x[0];
  const double det = cross(e1, e2);
  cell.area = 0.5 * det;
  cell.grad[1] = Point{e2.y, -e2.x} / det;
  cell.grad[2] = Point{-e1.y, e1.x} / det;
  cell.grad[0] = -(cell.grad[1] + cell.grad[2]);
  return cell;
}

FESpace make_space(const Mesh2D& mesh, int components, std::span<const CellState> states,
                   const std::vector<std::string>& dirichlet_tags, Phase phase, const DirichletValue& value) {
  if (components < 1 || components > 2) throw InvalidArgument("P1 spaces have 1 or 2 components");
  if (states.size() != mesh.num_cells()) throw InvalidArgument("cell states do not match the mesh");
  FESpace sp;
  sp.mesh = &mesh;
  sp.components = components;
  const std::size_t n = mesh.num_vertices() * components;
  sp.active.assign(n, 0);
  sp.dirichlet.assign(n, 0);
  sp.values.assign(n, 0.0);
  const CellState whole = phase == Phase::In ? CellState::In : CellState::Out;
  for (std::size_t c = 0; c < states.size(); ++c) {
    if (states[c] != whole && states[c] != CellState::Cut) continue;
    for (int v : mesh.triangle(static_cast<int>(c)))
      for (int i = 0; i < components; ++i) sp.active[v * components + i] = 1;
  }
  for (const auto& tag : dirichlet_tags) {
    for (int e : mesh.tagged_edges(tag)) {
      for (int v : mesh.edge(e)) {
        for (int i = 0; i < components; ++i) {
          const int dof = v * components + i;
          sp.dirichlet[dof] = 1;
          if (value) sp.values[dof] = value(mesh.vertex(v), i);
        }
      }
    }
  }
  sp.free_index.assign(n, -1);
  for (std::size_t d = 0; d < n; ++d) {
    if (sp.active[d] && !sp.dirichlet[d]) {
      sp.free_index[d] = static_cast<int>(sp.free_dofs.size());
      sp.free_dofs.push_back(static_cast<int>(d));
    }
  }
  return sp;
}

LinearSystem reduce(const Assembly& assembly, const FESpace& space) {
  const int n = static_cast<int>(space.num_dofs());
  if (assembly.matrix.rows() != n) throw InvalidArgument("assembly does not match the space");
  LinearSystem sys;
  sys.free_dofs = space.free_dofs;
  sys.lift = Vector::Zero(n);
  for (int d = 0; d < n; ++d)
    if (space.dirichlet[d] && space.active[d]) sys.lift[d] = space.values[d];
  // Move prescribed values to the right-hand side.
  const Vector shifted = assembly.rhs - assembly.matrix * sys.lift;
  const int m = static_cast<int>(space.num_free());
  std::vector<Triplet> trip;
  trip.reserve(assembly.matrix.nonZeros());
  for (int k = 0; k < assembly.matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(assembly.matrix, k); it; ++it) {
      const int r = space.free_index[it.row()], c = space.free_index[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  }
  sys.matrix.resize(m, m);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs.resize(m);
  for (int i = 0; i < m; ++i) sys.rhs[i] = shifted[space.free_dofs[i]];
  return sys;
}

Vector expand(const LinearSystem& system, const Vector& free_values) {
  Vector full = system.lift;
  for (std::size_t i = 0; i < system.free_dofs.size(); ++i) full[system.free_dofs[i]] = free_values[i];
  return full;
}

std::vector<int> ghost_facets(const FacetSkeleton& skeleton, std::span<const CellState> states, Phase phase) {
  const CellState whole = phase == Phase::In ? CellState::In : CellState::Out;
  auto active = [&](int c) { return states[c] == whole || states[c] == CellState::Cut; };
  std::vector<int> out;
  for (std::size_t f = 0; f < skeleton.interior.size(); ++f) {
    const auto& F = skeleton.interior[f];
    if (!active(F.left) || !active(F.right)) continue;
    if (states[F.left] == CellState::Cut || states[F.right] == CellState::Cut) out.push_back(static_cast<int>(f));
  }
  return out;
}

namespace {

std::array<double, 3> node_values(const Mesh2D& mesh, int c, std::span<const double> phi) {
  const auto& t = mesh.triangle(c);
  return {phi[t[0]], phi[t[1]], phi[t[2]]};
}

PhasePart<double> part_from_cut(const Mesh2D& mesh, const CutTopology<double>& cut, int c, Phase phase) {
  PhasePart<double> part;
  const CellState whole = phase == Phase::In ? CellState::In : CellState::Out;
  if (const auto* cc = cut.cut_of(c)) {
    for (const auto& s : cc->subs)
      if (s.phase == phase) part.triangles.push_back(s.corners);
  } else if (cut.states[c] == whole) {
    part.triangles.push_back(mesh.corners(c));
  }
  return part;
}

/// Ghost penalty gamma h^3 |F| [n.grad u][n.grad v], per component.
void add_ghost(std::vector<Triplet>& trip, const Mesh2D& mesh, const FacetSkeleton& sk,
               std::span<const int> facets, double gamma, int components) {
  for (int f : facets) {
    const auto& F = sk.interior[f];
    const P1Cell l = p1_cell(mesh, F.left), r = p1_cell(mesh, F.right);
    std::array<int, 6> nodes{};
    std::array<double, 6> jump{};
    for (int a = 0; a < 3; ++a) {
      nodes[a] = mesh.triangle(F.left)[a];
      jump[a] = dot(F.normal, l.grad[a]);
      nodes[3 + a] = mesh.triangle(F.right)[a];
      jump[3 + a] = -dot(F.normal, r.grad[a]);
    }
    const double w = gamma * std::pow(F.length, 3) * F.length;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int i = 0; i < components; ++i)
          trip.emplace_back(nodes[a] * components + i, nodes[b] * components + i, w * jump[a] * jump[b]);
  }
}

}  // namespace

Assembly assemble_cut_poisson(const Mesh2D& mesh, const CutTopology<double>& cut, std::span<const double> psi,
                              const PoissonParams& params, Phase phase) {
  const int n = static_cast<int>(mesh.num_vertices());
  std::vector<Triplet> trip;
  Assembly out;
  out.rhs = Vector::Zero(n);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const auto part = part_from_cut(mesh, cut, c, phase);
    if (part.triangles.empty()) continue;
    const P1Cell cell = p1_cell(mesh, c);
    const auto& t = mesh.triangle(c);
    auto k = laplace_element(cell, part, params.conductivity);
    if (!psi.empty() && psi[c] != 0.0) {
      const auto m = mass_element(cell, part);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) k[a][b] += params.psi_coefficient * psi[c] * m[a][b];
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.emplace_back(t[a], t[b], k[a][b]);
    if (params.source) {
      const auto b = load_element(cell, part, params.source, c);
      for (int a = 0; a < 3; ++a) out.rhs[t[a]] += b[a];
    }
  }
  const auto sk = build_skeleton(mesh);
  add_ghost(trip, mesh, sk, ghost_facets(sk, cut.states, phase), params.gamma, 1);
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Assembly assemble_cut_elasticity(const Mesh2D& mesh, const CutTopology<double>& cut,
                                 std::span<const double> psi, const ElasticityParams& params, Phase phase) {
  const int n = static_cast<int>(mesh.num_vertices()) * 2;
  std::vector<Triplet> trip;
  Assembly out;
  out.rhs = Vector::Zero(n);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const auto part = part_from_cut(mesh, cut, c, phase);
    if (part.triangles.empty()) continue;
    const P1Cell cell = p1_cell(mesh, c);
    const auto& t = mesh.triangle(c);
    auto k = elasticity_element(cell, part, params.lambda, params.mu);
    if (!psi.empty() && psi[c] != 0.0) {
      const auto m = mass_element(cell, part);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int i = 0; i < 2; ++i) k[2 * a + i][2 * b + i] += params.psi_coefficient * psi[c] * m[a][b];
    }
    for (int r = 0; r < 6; ++r)
      for (int s = 0; s < 6; ++s) trip.emplace_back(2 * t[r / 2] + r % 2, 2 * t[s / 2] + s % 2, k[r][s]);
  }
  const auto sk = build_skeleton(mesh);
  add_ghost(trip, mesh, sk, ghost_facets(sk, cut.states, phase), params.gamma * (params.lambda + params.mu), 2);
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Assembly assemble_cut_mass(const Mesh2D& mesh, const CutTopology<double>& cut, int components, Phase phase) {
  const int n = static_cast<int>(mesh.num_vertices()) * components;
  std::vector<Triplet> trip;
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const auto part = part_from_cut(mesh, cut, c, phase);
    if (part.triangles.empty()) continue;
    const auto m = mass_element(p1_cell(mesh, c), part);
    const auto& t = mesh.triangle(c);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int i = 0; i < components; ++i)
          trip.emplace_back(t[a] * components + i, t[b] * components + i, m[a][b]);
  }
  Assembly out;
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.rhs = Vector::Zero(n);
  return out;
}

void add_traction(Assembly& assembly, const Mesh2D& mesh, std::span<const int> edges, const Point& traction) {
  if (assembly.rhs.size() != static_cast<Eigen::Index>(2 * mesh.num_vertices()))
    throw InvalidArgument("traction needs a vector-valued assembly");
  for (int e : edges) {
    const auto& ed = mesh.edge(e);
    const double half = 0.5 * norm(mesh.vertex(ed[1]) - mesh.vertex(ed[0]));
    for (int v : ed) {
      assembly.rhs[2 * v] += half * traction.x;
      assembly.rhs[2 * v + 1] += half * traction.y;
    }
  }
}

namespace {

SparseMatrix whole_mesh_matrix(const Mesh2D& mesh, bool stiffness) {
  const int n = static_cast<int>(mesh.num_vertices());
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_cells() * 9);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const P1Cell cell = p1_cell(mesh, c);
    const auto& t = mesh.triangle(c);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double v = stiffness ? cell.area * dot(cell.grad[a], cell.grad[b])
                                   : cell.area * (a == b ? 1.0 / 6.0 : 1.0 / 12.0);
        trip.emplace_back(t[a], t[b], v);
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SparseMatrix stiffness_matrix(const Mesh2D& mesh) { return whole_mesh_matrix(mesh, true); }
SparseMatrix mass_matrix(const Mesh2D& mesh) { return whole_mesh_matrix(mesh, false); }

Vector conjugate_gradient(const SparseMatrix& a, const Vector& b, double tolerance, int max_iterations,
                          std::vector<double>* history) {
  const Eigen::Index n = b.size();
  Vector diag = a.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = diag[i] != 0.0 ? 1.0 / diag[i] : 1.0;
  Vector x = Vector::Zero(n);
  Vector r = b;
  const double bnorm = b.norm();
  std::vector<double> hist;
  if (bnorm == 0.0) return x;
  Vector z = diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iterations; ++it) {
    const Vector ap = a * p;
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rel = r.norm() / bnorm;
    hist.push_back(rel);
    if (rel <= tolerance) {
      if (history) *history = std::move(hist);
      return x;
    }
    z = diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream msg;
  msg << "conjugate gradients did not reach relative residual " << tolerance << " in " << max_iterations
      << " iterations (last " << (hist.empty() ? 0.0 : hist.back()) << ")";
  throw SolverError(msg.str(), std::move(hist));
}

Vector solve_spd(const SparseMatrix& a, const Vector& b, const SolveOptions& options) {
  if (a.rows() != b.size()) throw InvalidArgument("matrix and right-hand side sizes differ");
  if (a.rows() == 0) return Vector();
  if (options.method == SolveMethod::CG)
    return conjugate_gradient(a, b, options.tolerance, options.max_iterations);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverError("sparse factorization failed");
  const Vector d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double dmin = d.cwiseAbs().minCoeff();
  if (!(dmax > 0.0) || dmin < options.singular_ratio * dmax) {
    std::ostringstream msg;
    msg << "system is singular to working precision (pivot ratio " << (dmax > 0.0 ? dmin / dmax : 0.0)
        << "); an untagged isolated volume is the usual cause";
    throw SolverError(msg.str());
  }
  return ldlt.solve(b);
}

Vector solve(const LinearSystem& system, const SolveOptions& options) {
  return expand(system, solve_spd(system.matrix, system.rhs, options));
}

HilbertianExtension::HilbertianExtension(const Mesh2D& mesh, double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument("smoothing length must be non-negative");
  matrix_ = alpha * alpha * stiffness_matrix(mesh) + mass_matrix(mesh);
  auto llt = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(matrix_);
  if (llt->info() != Eigen::Success) throw SolverError("Hilbertian extension matrix is not positive definite");
  factor_ = llt;
}

std::vector<double> HilbertianExtension::apply(const GradientVector& dj) const {
  if (static_cast<Eigen::Index>(dj.size()) != matrix_.rows()) throw InvalidArgument("gradient size mismatch");
  const auto& llt = *static_cast<const Eigen::SimplicialLLT<SparseMatrix>*>(factor_.get());
  const Eigen::Map<const Vector> rhs(dj.values.data(), static_cast<Eigen::Index>(dj.size()));
  const Vector g = llt.solve(rhs);
  return {g.data(), g.data() + g.size()};
}

std::vector<Point> nodal_gradients(const Mesh2D& mesh, std::span<const double> values) {
  std::vector<Point> grad(mesh.num_vertices(), Point{0.0, 0.0});
  std::vector<double> weight(mesh.num_vertices(), 0.0);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const P1Cell cell = p1_cell(mesh, c);
    const auto v = node_values(mesh, c, values);
    const Point g = v[0] * cell.grad[0] + v[1] * cell.grad[1] + v[2] * cell.grad[2];
    for (int n : mesh.triangle(c)) {
      grad[n] += cell.area * g;
      weight[n] += cell.area;
    }
  }
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (weight[i] > 0.0) grad[i] = grad[i] / weight[i];
  return grad;
}

std::vector<Point> compute_velocity(std::span<const double> g, const LevelSet& phi, const Mesh2D& mesh) {
  if (g.size() != mesh.num_vertices() || phi.size() != mesh.num_vertices())
    throw InvalidArgument("velocity inputs do not match the mesh");
  const auto grad = nodal_gradients(mesh, phi.values());
  std::vector<Point> beta(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) beta[i] = (g[i] / std::max(norm(grad[i]), 1e-10)) * grad[i];
  return beta;
}

double mesh_size(const Mesh2D& mesh) {
  double h = 1e300;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edge(static_cast<int>(e));
    h = std::min(h, norm(mesh.vertex(ed[1]) - mesh.vertex(ed[0])));
  }
  return h;
}

}  // namespace cutform
