#include "cutform/functional.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cutform/parallel.hpp"

namespace cutform {

std::string to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::Volume: return "volume";
    case FunctionalKind::Boundary: return "boundary";
    case FunctionalKind::Flux: return "flux";
    case FunctionalKind::Normal: return "normal";
  }
  return "unknown";
}

Functional Functional::volume(Integrand f, Phase domain) {
  Functional fn;
  fn.kind = FunctionalKind::Volume;
  fn.integrand = std::move(f);
  fn.domain = domain;
  return fn;
}

Functional Functional::boundary(Integrand f) {
  Functional fn;
  fn.kind = FunctionalKind::Boundary;
  fn.integrand = std::move(f);
  return fn;
}

Functional Functional::normal(Integrand g) {
  Functional fn;
  fn.kind = FunctionalKind::Normal;
  fn.integrand = std::move(g);
  return fn;
}

double GradientVector::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_difference(const GradientVector& a, const GradientVector& b) {
  if (a.size() != b.size()) throw InvalidArgument("gradient vectors differ in length");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double evaluate(const Functional& fn, const Mesh2D& mesh, const LevelSet& phi) {
  return evaluate(fn, mesh, build_cut(mesh, phi));
}

std::vector<int> band_nodes(const Mesh2D& mesh, std::span<const CellState> states) {
  std::vector<char> mark(mesh.num_vertices(), 0);
  for (std::size_t c = 0; c < states.size(); ++c)
    if (states[c] == CellState::Cut)
      for (int v : mesh.triangle(static_cast<int>(c))) mark[v] = 1;
  std::vector<int> nodes;
  for (std::size_t v = 0; v < mark.size(); ++v)
    if (mark[v]) nodes.push_back(static_cast<int>(v));
  return nodes;
}

namespace {

template <class T>
std::array<T, 3> lift(const Mesh2D& mesh, int c, const LevelSet& phi) {
  const auto& t = mesh.triangle(c);
  return {T(phi[t[0]]), T(phi[t[1]]), T(phi[t[2]])};
}

int local_index(const Mesh2D& mesh, int c, int node) {
  const auto& t = mesh.triangle(c);
  for (int k = 0; k < 3; ++k)
    if (t[k] == node) return k;
  return -1;
}

}  // namespace

GradientVector ad_cell_gradient(const Mesh2D& mesh, const LevelSet& phi, const CellFunction& contribution,
                                const GradientOptions& options) {
  const auto states = classify_cells(mesh, phi);
  const auto band = band_nodes(mesh, states);
  GradientVector grad(mesh.num_vertices());
  parallel_for(band.size(), options.threads, [&](std::size_t k) {
    const int node = band[k];
    double d = 0.0;
    for (int c : mesh.vertex_cells(node)) {
      if (states[c] != CellState::Cut) continue;
      auto vals = lift<Dual1>(mesh, c, phi);
      vals[local_index(mesh, c, node)].der = 1.0;
      d += contribution(c, vals).der;
    }
    grad[node] = d;
  });
  return grad;
}

GradientVector ad_gradient(const Functional& fn, const Mesh2D& mesh, const LevelSet& phi,
                           const GradientOptions& options) {
  return ad_cell_gradient(
      mesh, phi, [&](int c, const std::array<Dual1, 3>& vals) { return cell_contribution(fn, mesh, c, vals); },
      options);
}

GradientVector fd_gradient(const Functional& fn, const Mesh2D& mesh, const LevelSet& phi, double step,
                           const GradientOptions& options) {
  if (!(step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  const auto report = check_assumptions(mesh, phi.values(), step, 0.0);
  if (!report.sign_flip_nodes.empty()) {
    std::ostringstream msg;
    msg << "finite-difference step " << step << " flips the sign of node " << report.sign_flip_nodes.front()
        << "; the cut topology is not fixed at this step size";
    throw AssumptionViolation(msg.str(), report.sign_flip_nodes.front());
  }
  const auto states = classify_cells(mesh, phi);
  const auto band = band_nodes(mesh, states);
  GradientVector grad(mesh.num_vertices());
  parallel_for(band.size(), options.threads, [&](std::size_t k) {
    const int node = band[k];
    double diff = 0.0;
    for (int c : mesh.vertex_cells(node)) {
      if (states[c] != CellState::Cut) continue;
      auto plus = lift<double>(mesh, c, phi);
      auto minus = plus;
      const int l = local_index(mesh, c, node);
      plus[l] += step;
      minus[l] -= step;
      diff += cell_contribution(fn, mesh, c, plus) - cell_contribution(fn, mesh, c, minus);
    }
    grad[node] = diff / (2.0 * step);
  });
  return grad;
}

HessianResult ad_hessian(const Functional& fn, const Mesh2D& mesh, const LevelSet& phi,
                         std::span<const int> nodes, const GradientOptions& options) {
  const auto states = classify_cells(mesh, phi);
  HessianResult out;
  out.nodes.assign(nodes.begin(), nodes.end());
  const std::size_t n = nodes.size();
  out.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (int v : nodes) {
    bool touches = false;
    for (int c : mesh.vertex_cells(v)) touches = touches || states[c] == CellState::Cut;
    if (!touches) throw InvalidArgument("Hessian node is not adjacent to a cut cell");
  }
  parallel_for(n, options.threads, [&](std::size_t a) {
    const int i = nodes[a];
    for (std::size_t b = 0; b < n; ++b) {
      const int j = nodes[b];
      double h = 0.0;
      for (int c : mesh.vertex_cells(i)) {
        if (states[c] != CellState::Cut) continue;
        const int lj = local_index(mesh, c, j);
        if (lj < 0) continue;
        auto vals = lift<Dual2>(mesh, c, phi);
        vals[local_index(mesh, c, i)].d1 = 1.0;
        vals[lj].d2 = 1.0;
        h += cell_contribution(fn, mesh, c, vals).d12;
      }
      out.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = h;
    }
  });
  out.asymmetry = (out.matrix - out.matrix.transpose()).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace cutform
