#include "cutform/evolve.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace cutform {

using Triplet = Eigen::Triplet<double>;

namespace {

/// int_F |l| ds for l linear along F with end values a, b.
double abs_linear_integral(double a, double b, double length) {
  if ((a >= 0.0) == (b >= 0.0)) return 0.5 * length * (std::abs(a) + std::abs(b));
  return 0.5 * length * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

/// Adds w [n.grad u][n.grad v] for one interior facet.
void add_facet_jump(std::vector<Triplet>& trip, const Mesh2D& mesh, const Facet& f, double w) {
  const P1Cell l = p1_cell(mesh, f.left), r = p1_cell(mesh, f.right);
  std::array<int, 6> nodes{};
  std::array<double, 6> jump{};
  for (int a = 0; a < 3; ++a) {
    nodes[a] = mesh.triangle(f.left)[a];
    jump[a] = dot(f.normal, l.grad[a]);
    nodes[3 + a] = mesh.triangle(f.right)[a];
    jump[3 + a] = -dot(f.normal, r.grad[a]);
  }
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) trip.emplace_back(nodes[a], nodes[b], w * jump[a] * jump[b]);
}

double facet_h(const Mesh2D& mesh, const Facet& f) {
  return 0.5 * (mesh.cell_diameter(f.left) + mesh.cell_diameter(f.right));
}

SparseMatrix from_triplets(int n, const std::vector<Triplet>& trip) {
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Vector solve_general(const SparseMatrix& a, const Vector& b, const char* what) {
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw SolverError(std::string(what) + ": sparse LU factorization failed");
  return lu.solve(b);
}

}  // namespace

SparseMatrix advection_matrix(const Mesh2D& mesh, std::span<const Point> beta) {
  const int n = static_cast<int>(mesh.num_vertices());
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_cells() * 9);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const P1Cell cell = p1_cell(mesh, c);
    const auto& t = mesh.triangle(c);
    // int N_i beta dx with beta = sum_k beta_k N_k
    for (int i = 0; i < 3; ++i) {
      Point b{0.0, 0.0};
      for (int k = 0; k < 3; ++k) b += (cell.area * (i == k ? 1.0 / 6.0 : 1.0 / 12.0)) * beta[t[k]];
      for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], dot(b, cell.grad[j]));
    }
  }
  return from_triplets(n, trip);
}

SparseMatrix transport_penalty_matrix(const Mesh2D& mesh, const FacetSkeleton& skeleton,
                                      std::span<const Point> beta, double c_e, bool velocity_weighted) {
  double beta_max = 0.0;
  for (const auto& b : beta) beta_max = std::max(beta_max, norm(b));
  std::vector<Triplet> trip;
  for (const auto& f : skeleton.interior) {
    const double h = facet_h(mesh, f);
    double scale;
    if (velocity_weighted) {
      scale = abs_linear_integral(dot(f.normal, beta[f.vertices[0]]), dot(f.normal, beta[f.vertices[1]]), f.length);
    } else {
      scale = beta_max * f.length;
    }
    if (scale == 0.0) continue;
    add_facet_jump(trip, mesh, f, c_e * h * h * scale);
  }
  return from_triplets(static_cast<int>(mesh.num_vertices()), trip);
}

EvolveResult evolve(const LevelSet& phi, std::span<const Point> beta, const EvolveConfig& config,
                    const Mesh2D& mesh, const FacetSkeleton& skeleton) {
  if (!(config.c_e > 0.0) || !(config.dt > 0.0) || config.steps < 0)
    throw InvalidArgument("evolve needs c_e > 0, dt > 0 and a non-negative step count");
  if (beta.size() != mesh.num_vertices() || phi.size() != mesh.num_vertices())
    throw InvalidArgument("evolve inputs do not match the mesh");
  EvolveResult out;
  double beta_max = 0.0;
  for (const auto& b : beta) beta_max = std::max(beta_max, norm(b));
  const double h = mesh_size(mesh);
  out.courant = config.dt * beta_max / h;
  if (out.courant > 1.0) {
    std::ostringstream msg;
    msg << "time step exceeds the CFL bound (Courant number " << out.courant << ")";
    out.advisory = msg.str();
  }
  const SparseMatrix m = mass_matrix(mesh);
  const SparseMatrix op = advection_matrix(mesh, beta) +
                          transport_penalty_matrix(mesh, skeleton, beta, config.c_e, config.velocity_weighted);
  const SparseMatrix lhs = m + (0.5 * config.dt) * op;
  const SparseMatrix rhs_op = m - (0.5 * config.dt) * op;
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(lhs);
  lu.factorize(lhs);
  if (lu.info() != Eigen::Success) throw SolverError("transport step: sparse LU factorization failed");
  Vector x = Eigen::Map<const Vector>(phi.values().data(), static_cast<Eigen::Index>(phi.size()));
  for (int s = 0; s < config.steps; ++s) {
    x = lu.solve(rhs_op * x);
    if (!x.allFinite()) throw SolverError("transport step produced non-finite values");
  }
  out.phi = LevelSet(std::vector<double>(x.data(), x.data() + x.size()));
  return out;
}

double approximate_sign(double phi, double h, double grad_norm) {
  return phi / std::sqrt(phi * phi + h * h * grad_norm * grad_norm);
}

ReinitResult reinitialize(const LevelSet& phi0, const ReinitConfig& config, const Mesh2D& mesh,
                          const CutTopology<double>& cut0) {
  if (!(config.c_r1 > 0.0) || !(config.c_r2 > 0.0) || !(config.gamma_d > 0.0) || config.picard_maxit < 1)
    throw InvalidArgument("reinitialization coefficients must be positive");
  const int n = static_cast<int>(mesh.num_vertices());
  const double h = mesh_size(mesh);
  const auto grad0 = nodal_gradients(mesh, phi0.values());
  std::vector<double> sign(n);
  for (int i = 0; i < n; ++i) sign[i] = approximate_sign(phi0[i], h, norm(grad0[i]));

  // Parts of the operator that do not depend on the iterate.
  std::vector<Triplet> fixed;
  const auto& seg = segment_rule(5);
  for (const auto& cc : cut0.cuts) {
    const P1Cell cell = p1_cell(mesh, cc.cell);
    const auto& t = mesh.triangle(cc.cell);
    const Point a = cc.interface[0], d = cc.interface[1] - a;
    const double len = norm(d);
    for (std::size_t q = 0; q < seg.weights.size(); ++q) {
      const auto lam = barycentric(cell.x, Point(a + seg.points[q] * d));
      const double w = config.gamma_d / h * seg.weights[q] * len;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) fixed.emplace_back(t[i], t[j], w * lam[i] * lam[j]);
    }
  }
  if (config.variant == ReinitVariant::InteriorPenalty) {
    const auto sk = build_skeleton(mesh);
    for (const auto& f : sk.interior) {
      const double hf = facet_h(mesh, f);
      add_facet_jump(fixed, mesh, f, config.c_r2 * hf * hf * f.length);
    }
  }
  // Right-hand side int v sign_h dx.
  Vector rhs = Vector::Zero(n);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const P1Cell cell = p1_cell(mesh, c);
    const auto& t = mesh.triangle(c);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) rhs[t[i]] += cell.area * (i == k ? 1.0 / 6.0 : 1.0 / 12.0) * sign[t[k]];
  }

  ReinitResult out;
  std::vector<double> current(phi0.values().begin(), phi0.values().end());
  for (int it = 0; it < config.picard_maxit; ++it) {
    std::vector<Triplet> trip = fixed;
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
      const P1Cell cell = p1_cell(mesh, c);
      const auto& t = mesh.triangle(c);
      Point g{0.0, 0.0};
      for (int k = 0; k < 3; ++k) g += current[t[k]] * cell.grad[k];
      const Point e = g / std::max(norm(g), 1e-10);
      // int N_i (sign_h e) . grad N_j
      for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += cell.area * (i == k ? 1.0 / 6.0 : 1.0 / 12.0) * sign[t[k]];
        for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], s * dot(e, cell.grad[j]));
      }
      if (config.variant == ReinitVariant::Viscosity) {
        const double visc = config.c_r1 * h * cell.area;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], visc * dot(cell.grad[i], cell.grad[j]));
      }
    }
    const Vector next = solve_general(from_triplets(n, trip), rhs, "reinitialization");
    if (!next.allFinite()) throw SolverError("reinitialization produced non-finite values", out.changes);
    double diff = 0.0, mag = 0.0;
    for (int i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(next[i] - current[i]));
      mag = std::max(mag, std::abs(next[i]));
    }
    const double change = diff / std::max(mag, 1e-300);
    out.changes.push_back(change);
    current.assign(next.data(), next.data() + n);
    out.iterations = it + 1;
    if (change <= config.picard_tol) {
      out.converged = true;
      break;
    }
  }
  out.phi = LevelSet(std::move(current));
  return out;
}

}  // namespace cutform
