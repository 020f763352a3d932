#include "cutform/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>

#include "cutform/analytic.hpp"
#include "cutform/demos.hpp"
#include "cutform/geometries.hpp"
#include "cutform/io.hpp"
#include "cutform/isolated.hpp"

namespace cutform {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Overrides {
  std::optional<std::string> config;
  std::optional<int> mesh;
  std::optional<std::string> geometry;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<double> fd_step;
};

bool same_kind(const json& a, const json& b) {
  if (a.is_number_integer() || a.is_number_unsigned()) return b.is_number_integer() || b.is_number_unsigned();
  if (a.is_number()) return b.is_number();
  if (a.is_array()) {
    if (!b.is_array()) return false;
    if (a.empty()) return true;
    return std::all_of(b.begin(), b.end(), [&](const json& x) { return same_kind(a.front(), x); });
  }
  return a.type() == b.type();
}

/// Defaults, then the config file, then flags, then CUTFORM_OUT.
json resolve(json defaults, const Overrides& o) {
  auto set = [&](const std::string& key, const json& value, const std::string& source) {
    if (!defaults.contains(key)) throw ConfigError("unknown configuration key '" + key + "' (from " + source + ")");
    if (!same_kind(defaults[key], value)) throw ConfigError("configuration key '" + key + "' has the wrong type");
    defaults[key] = value;
  };
  if (o.config) {
    std::ifstream f(*o.config);
    if (!f) throw ConfigError("cannot read config file " + *o.config);
    json user;
    try {
      user = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed config file: ") + e.what());
    }
    if (!user.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [k, v] : user.items()) set(k, v, "config file");
  }
  if (o.mesh) {
    if (defaults.contains("meshes"))
      set("meshes", json::array({*o.mesh}), "--mesh");
    else
      set("mesh", *o.mesh, "--mesh");
  }
  if (o.geometry) {
    if (defaults.contains("geometries"))
      set("geometries", json::array({*o.geometry}), "--geometry");
    else
      set("geometry", *o.geometry, "--geometry");
  }
  if (o.out) set("out", *o.out, "--out");
  if (o.threads) set("threads", *o.threads, "--threads");
  if (o.fd_step) set("fd_step", *o.fd_step, "--fd-step");
  if (const char* env = std::getenv("CUTFORM_OUT"); env != nullptr && *env != '\0') set("out", std::string(env), "CUTFORM_OUT");
  if (defaults.contains("threads") && defaults["threads"].get<int>() < 1) throw ConfigError("threads must be at least 1");
  return defaults;
}

fs::path prepare_output(const json& cfg) {
  const fs::path out = cfg["out"].get<std::string>();
  fs::create_directories(out);
  write_text(out / "config.json", cfg.dump(2) + "\n");
  return out;
}

int positive_int(const json& cfg, const char* key) {
  const int v = cfg[key].get<int>();
  if (v < 1) throw ConfigError(std::string(key) + " must be positive");
  return v;
}

double positive(const json& cfg, const char* key) {
  const double v = cfg[key].get<double>();
  if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
  return v;
}

Mesh2D unit_square(int n) { return build_structured_mesh(n, n, {{0.0, 0.0}, {1.0, 1.0}}); }

LevelSetFunction geometry_checked(const std::string& geometry) {
  try {
    return geometry_by_name(geometry);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

LevelSet level_set_for(const Mesh2D& mesh, const std::string& geometry) {
  return LevelSet::interpolate(mesh, geometry_checked(geometry));
}

// ---------------------------------------------------------------- verify

json verify_defaults() {
  return {{"geometries", {"circle", "coscos"}},
          {"functionals", {"J1", "J2", "J3", "J4"}},
          {"meshes", {16, 32, 64}},
          {"fd_step", 1e-6},
          {"tol_exact", 1e-13},
          {"tol_fd", 1e-7},
          {"write_gradients", true},
          {"threads", 1},
          {"out", "out/verify"}};
}

int cmd_verify(const json& cfg) {
  const auto out = prepare_output(cfg);
  const auto v = verification_set();
  const double step = positive(cfg, "fd_step");
  const double tol_exact = cfg["tol_exact"].get<double>(), tol_fd = cfg["tol_fd"].get<double>();
  const GradientOptions go{positive_int(cfg, "threads")};
  for (const auto& fn : cfg["functionals"])
    if (fn != "J1" && fn != "J2" && fn != "J3" && fn != "J4") throw ConfigError("unknown functional " + fn.dump());

  CsvTable table;
  table.header = {"geometry", "functional", "n", "h", "ad_vs_exact", "ad_vs_fd", "exact_scale", "pass"};
  bool all = true;
  for (const auto& g : cfg["geometries"]) {
    const std::string geo = g.get<std::string>();
    for (const auto& nj : cfg["meshes"]) {
      const int n = nj.get<int>();
      if (n < 1) throw ConfigError("mesh sizes must be positive");
      const Mesh2D mesh = unit_square(n);
      const LevelSet phi = level_set_for(mesh, geo);
      for (const auto& fj : cfg["functionals"]) {
        const std::string name = fj.get<std::string>();
        Functional fn = name == "J1" ? v.j1() : name == "J2" ? v.j2() : name == "J3" ? v.j3() : v.j4();
        const auto ad = ad_gradient(fn, mesh, phi, go);
        const auto fd = fd_gradient(fn, mesh, phi, step, go);
        std::optional<GradientVector> exact;
        if (name == "J1") exact = exact_dJ1(v.f_value, mesh, phi);
        if (name == "J2") exact = exact_dJ2(v.f_value, v.grad_f, mesh, phi);
        if (name == "J3") exact = exact_dJ3(v.div_flux, v.flux_field, mesh, phi).gradient;
        const double e_fd = max_abs_difference(ad, fd);
        bool pass = e_fd <= tol_fd;
        std::string e_exact = "N/A", scale = "N/A";
        if (exact) {
          const double s = std::max(1.0, exact->max_abs());
          const double e = max_abs_difference(ad, *exact);
          pass = pass && e <= tol_exact * s;
          e_exact = format_double(e);
          scale = format_double(s);
        }
        all = all && pass;
        table.add({geo, name, std::to_string(n), format_double(1.0 / n), e_exact, format_double(e_fd), scale,
                   pass ? "1" : "0"});
        if (cfg["write_gradients"].get<bool>()) {
          std::vector<std::pair<std::string, const GradientVector*>> cols{{"ad", &ad}, {"fd", &fd}};
          if (exact) cols.emplace_back("exact", &*exact);
          gradient_table(mesh, cols).write(out / "gradients" / (geo + "_" + name + "_n" + std::to_string(n) + ".csv"));
        }
        std::cout << geo << ' ' << name << " n=" << n << " ad-exact=" << e_exact << " ad-fd=" << format_double(e_fd)
                  << (pass ? " ok" : " FAIL") << '\n';
      }
    }
  }
  table.write(out / "verify.csv");
  return all ? Success : ToleranceBreach;
}

// ---------------------------------------------------------------- hessian-check

json hessian_defaults() {
  return {{"geometry", "circle"}, {"mesh", 32},          {"nodes", 16},        {"fd_step", 1e-6},
          {"tol", 1e-4},          {"symmetry_tol", 1e-12}, {"threads", 1}, {"out", "out/hessian"}};
}

/// A connected cluster of cut-band nodes, grown breadth-first from the middle
/// of the band.
std::vector<int> hessian_nodes(const Mesh2D& mesh, const LevelSet& phi, int count) {
  const auto band = band_nodes(mesh, classify_cells(mesh, phi));
  if (band.empty()) throw ConfigError("the geometry does not cut the mesh");
  std::set<int> in_band(band.begin(), band.end());
  std::vector<int> picked;
  std::set<int> seen{band[band.size() / 2]};
  std::deque<int> queue{band[band.size() / 2]};
  while (!queue.empty() && static_cast<int>(picked.size()) < count) {
    const int v = queue.front();
    queue.pop_front();
    picked.push_back(v);
    for (int c : mesh.vertex_cells(v))
      for (int w : mesh.triangle(c))
        if (in_band.count(w) && seen.insert(w).second) queue.push_back(w);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

int cmd_hessian(const json& cfg) {
  const auto out = prepare_output(cfg);
  const Mesh2D mesh = unit_square(positive_int(cfg, "mesh"));
  const LevelSet phi = level_set_for(mesh, cfg["geometry"].get<std::string>());
  const double step = positive(cfg, "fd_step");
  const GradientOptions go{positive_int(cfg, "threads")};
  const Functional fn = verification_set().j4();
  const auto nodes = hessian_nodes(mesh, phi, positive_int(cfg, "nodes"));
  const auto h = ad_hessian(fn, mesh, phi, nodes, go);
  const std::size_t n = nodes.size();
  Eigen::MatrixXd fd(n, n);
  for (std::size_t b = 0; b < n; ++b) {
    const auto plus = ad_gradient(fn, mesh, perturb(phi, nodes[b], step), go);
    const auto minus = ad_gradient(fn, mesh, perturb(phi, nodes[b], -step), go);
    for (std::size_t a = 0; a < n; ++a) fd(a, b) = (plus[nodes[a]] - minus[nodes[a]]) / (2.0 * step);
  }
  CsvTable table;
  table.header = {"i", "j", "node_i", "node_j", "ad", "fd", "abs_error"};
  double max_err = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double e = std::abs(h.matrix(a, b) - fd(a, b));
      max_err = std::max(max_err, e);
      table.add({std::to_string(a), std::to_string(b), std::to_string(nodes[a]), std::to_string(nodes[b]),
                 format_double(h.matrix(a, b)), format_double(fd(a, b)), format_double(e)});
    }
  table.write(out / "hessian.csv");
  const bool pass = max_err <= cfg["tol"].get<double>() && h.asymmetry <= cfg["symmetry_tol"].get<double>();
  CsvTable summary;
  summary.header = {"nodes", "max_abs_error", "symmetry_defect", "pass"};
  summary.add({std::to_string(n), format_double(max_err), format_double(h.asymmetry), pass ? "1" : "0"});
  summary.write(out / "summary.csv");
  std::cout << "hessian max error " << format_double(max_err) << " symmetry defect " << format_double(h.asymmetry)
            << (pass ? " ok" : " FAIL") << '\n';
  return pass ? Success : ToleranceBreach;
}

// ---------------------------------------------------------------- isovol

json isovol_defaults() {
  return {{"geometry", "snake"}, {"mesh", 32},           {"partitions", 4}, {"partition", "quadrant"},
          {"seed", 1},           {"dirichlet", {"left"}}, {"threads", 1},   {"out", "out/isovol"}};
}

int cmd_isovol(const json& cfg) {
  const auto out = prepare_output(cfg);
  const Mesh2D mesh = unit_square(positive_int(cfg, "mesh"));
  const LevelSet phi = level_set_for(mesh, cfg["geometry"].get<std::string>());
  const auto cut = build_cut(mesh, phi);
  const auto cg = build_cut_graph(mesh, cut);
  const auto serial = colour_graph(cg.graph);

  const int parts = positive_int(cfg, "partitions");
  const std::string mode = cfg["partition"].get<std::string>();
  std::vector<int> owner;
  if (mode == "quadrant") {
    if (parts != 4) throw ConfigError("quadrant partitioning needs partitions = 4");
    owner = quadrant_owner(mesh, cg);
  } else if (mode == "random") {
    owner = random_owner(mesh, cg, parts, cfg["seed"].get<unsigned>());
  } else {
    throw ConfigError("partition must be 'quadrant' or 'random'");
  }
  const auto pg = partition_graph(cg.graph, owner, parts);
  const auto dist = colour_distributed(pg);

  // Colour maps must be a bijection between serial and distributed colourings.
  std::map<int, int> forward, backward;
  bool bijective = dist.global.count() == serial.count();
  for (std::size_t v = 0; v < cg.graph.size(); ++v) {
    const int s = serial.colour[v], d = dist.global.colour[v];
    bijective = bijective && forward.try_emplace(s, d).first->second == d && backward.try_emplace(d, s).first->second == s;
  }
  auto count_in = [](const Colouring& c) {
    return static_cast<int>(std::count(c.colour_state.begin(), c.colour_state.end(), Phase::In));
  };

  std::vector<std::string> tags;
  for (const auto& t : cfg["dirichlet"]) tags.push_back(t.get<std::string>());
  for (const auto& t : tags)
    if (!mesh.has_tag(t)) throw ConfigError("unknown boundary tag '" + t + "'");
  const auto psi = mark_isolated(cg, serial, mesh, edges_with_tags(mesh, tags), Phase::In);

  const std::size_t nv = cg.graph.size();
  std::vector<double> serial_f(nv), global_f(nv), owner_f(nv), local_f(nv, 0.0), psi_f(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    serial_f[v] = serial.colour[v];
    global_f[v] = dist.global.colour[v];
    owner_f[v] = owner[v];
    psi_f[v] = psi[cg.cell[v]];
  }
  for (std::size_t p = 0; p < pg.parts.size(); ++p) {
    const auto& part = pg.parts[p];
    for (int l = 0; l < part.num_owned; ++l) local_f[part.global_ids[l]] = dist.local[p].colour[l];
  }
  write_text(out / "isovol.vtk", vtk_cut(mesh, cut,
                                         {{"serial_colour", serial_f},
                                          {"global_colour", global_f},
                                          {"local_colour", local_f},
                                          {"owner", owner_f},
                                          {"psi", psi_f}}));
  CsvTable parts_table;
  parts_table.header = {"part", "owned", "ghosts", "local_colours"};
  for (std::size_t p = 0; p < pg.parts.size(); ++p)
    parts_table.add({std::to_string(p), std::to_string(pg.parts[p].num_owned),
                     std::to_string(pg.parts[p].local.size() - pg.parts[p].num_owned),
                     std::to_string(dist.local[p].count())});
  parts_table.write(out / "parts.csv");
  const int isolated_cells = static_cast<int>(std::count(psi.begin(), psi.end(), 1.0));
  CsvTable summary;
  summary.header = {"serial_colours", "serial_in_colours", "global_colours", "global_in_colours",
                    "isolated_cells", "messages", "bijective"};
  summary.add({std::to_string(serial.count()), std::to_string(count_in(serial)), std::to_string(dist.global.count()),
               std::to_string(count_in(dist.global)), std::to_string(isolated_cells),
               std::to_string(dist.messages.size()), bijective ? "1" : "0"});
  summary.write(out / "summary.csv");
  std::cout << "colours: serial " << serial.count() << " (IN " << count_in(serial) << "), distributed "
            << dist.global.count() << " (IN " << count_in(dist.global) << ")" << (bijective ? " ok" : " MISMATCH")
            << '\n';
  return bijective ? Success : ToleranceBreach;
}

// ---------------------------------------------------------------- reinit

json reinit_defaults() {
  return {{"geometry", "circle"}, {"mesh", 64},        {"variant", "viscosity"}, {"distortion", 4.0},
          {"c_r1", 0.5},          {"c_r2", 0.1},       {"gamma_d", 20.0},        {"picard_tol", 1e-6},
          {"picard_maxit", 50},   {"threads", 1},      {"out", "out/reinit"}};
}

int cmd_reinit(const json& cfg) {
  const auto out = prepare_output(cfg);
  const Mesh2D mesh = unit_square(positive_int(cfg, "mesh"));
  const auto base = geometry_checked(cfg["geometry"].get<std::string>());
  const double k = cfg["distortion"].get<double>();
  if (k < 0.0) throw ConfigError("distortion must be non-negative");
  // Same zero set, far from a distance function.
  const LevelSet phi0 = LevelSet::interpolate(mesh, [&](const Point& x) {
    const Point d = x - Point{0.5, 0.5};
    return base(x) * (0.1 + k * dot(d, d));
  });
  ReinitConfig rc;
  const std::string variant = cfg["variant"].get<std::string>();
  if (variant == "viscosity")
    rc.variant = ReinitVariant::Viscosity;
  else if (variant == "interior_penalty")
    rc.variant = ReinitVariant::InteriorPenalty;
  else
    throw ConfigError("variant must be 'viscosity' or 'interior_penalty'");
  rc.c_r1 = cfg["c_r1"].get<double>();
  rc.c_r2 = cfg["c_r2"].get<double>();
  rc.gamma_d = cfg["gamma_d"].get<double>();
  rc.picard_tol = positive(cfg, "picard_tol");
  rc.picard_maxit = positive_int(cfg, "picard_maxit");
  const auto cut0 = build_cut(mesh, phi0);
  const auto r = reinitialize(phi0, rc, mesh, cut0);

  CsvTable iters;
  iters.header = {"iteration", "relative_change"};
  for (std::size_t i = 0; i < r.changes.size(); ++i) iters.add({std::to_string(i + 1), format_double(r.changes[i])});
  iters.write(out / "reinit.csv");

  // Interface drift: |phi| at the original interface points.
  double drift = 0.0;
  for (const auto& cc : cut0.cuts)
    for (const auto& p : cc.interface) {
      const auto& t = mesh.triangle(cc.cell);
      const auto lam = barycentric(mesh.corners(cc.cell), p);
      drift = std::max(drift, std::abs(lam[0] * r.phi[t[0]] + lam[1] * r.phi[t[1]] + lam[2] * r.phi[t[2]]));
    }
  // Eikonal defect on cells within 0.1 of the interface.
  const auto grad = nodal_gradients(mesh, r.phi.values());
  std::vector<double> gnorm(grad.size());
  double defect = 0.0;
  int counted = 0;
  for (std::size_t v = 0; v < grad.size(); ++v) {
    gnorm[v] = norm(grad[v]);
    if (std::abs(r.phi[v]) <= 0.1) {
      defect += std::abs(gnorm[v] - 1.0);
      ++counted;
    }
  }
  defect = counted ? defect / counted : 0.0;
  std::vector<double> p0(phi0.values().begin(), phi0.values().end()), p1(r.phi.values().begin(), r.phi.values().end());
  write_text(out / "reinit.vtk", vtk_mesh(mesh, {{"phi0", p0}, {"phi", p1}, {"grad_norm", gnorm}}));
  CsvTable summary;
  summary.header = {"converged", "iterations", "interface_drift", "band_eikonal_defect"};
  summary.add({r.converged ? "1" : "0", std::to_string(r.iterations), format_double(drift), format_double(defect)});
  summary.write(out / "summary.csv");
  std::cout << "reinit " << (r.converged ? "converged" : "did not converge") << " in " << r.iterations
            << " iterations, drift " << format_double(drift) << ", eikonal defect " << format_double(defect) << '\n';
  return r.converged ? Success : ToleranceBreach;
}

// ---------------------------------------------------------------- evolve

json evolve_defaults() {
  const EncroachmentOptions d;
  return {{"mesh", d.n},         {"steps", d.steps}, {"x_fixed", d.x_fixed}, {"ramp", d.ramp},   {"margin", d.margin},
          {"courant", d.courant}, {"c_e", d.c_e},    {"threads", 1},         {"out", "out/evolve"}};
}

int cmd_evolve(const json& cfg) {
  const auto out = prepare_output(cfg);
  EncroachmentOptions o;
  o.n = positive_int(cfg, "mesh");
  o.steps = positive_int(cfg, "steps");
  o.x_fixed = cfg["x_fixed"].get<double>();
  o.ramp = positive(cfg, "ramp");
  o.margin = cfg["margin"].get<double>();
  o.courant = positive(cfg, "courant");
  o.c_e = positive(cfg, "c_e");
  const auto weighted = run_encroachment(true, o);
  const auto plain = run_encroachment(false, o);
  auto values = [](const LevelSet& p) { return std::vector<double>(p.values().begin(), p.values().end()); };
  write_text(out / "evolve_weighted.vtk",
             vtk_mesh(weighted.mesh, {{"phi0", values(weighted.phi0)}, {"phi", values(weighted.phi)}}));
  write_text(out / "evolve_unweighted.vtk",
             vtk_mesh(plain.mesh, {{"phi0", values(plain.phi0)}, {"phi", values(plain.phi)}}));
  const bool pass = weighted.metric < plain.metric;
  CsvTable t;
  t.header = {"variant", "encroachment"};
  t.add({"weighted", format_double(weighted.metric)});
  t.add({"unweighted", format_double(plain.metric)});
  t.write(out / "encroachment.csv");
  std::cout << "encroachment weighted " << format_double(weighted.metric) << " unweighted "
            << format_double(plain.metric) << (pass ? " ok" : " FAIL") << '\n';
  return pass ? Success : ToleranceBreach;
}

// ---------------------------------------------------------------- optimize

json optimize_defaults() {
  const ALConfig a;
  const StopCriteria s;
  return {{"problem", "cantilever"},
          {"mesh", 0},
          {"volume_fraction", 0.0},
          {"max_iters", s.max_iters},
          {"constraint_tol", s.constraint_tol},
          {"stagnation_tol", s.stagnation_tol},
          {"stagnation_window", s.stagnation_window},
          {"vtk_every", 25},
          {"rho0", a.rho0},
          {"rho_growth", a.rho_growth},
          {"rho_max", a.rho_max},
          {"cfl", a.cfl},
          {"cfl_min", a.cfl_min},
          {"cfl_regrowth", a.cfl_regrowth},
          {"alpha", a.alpha},
          {"reinit_every", a.reinit_every},
          {"c_e", a.evolve.c_e},
          {"threads", 1},
          {"out", "out/optimize"}};
}

int cmd_optimize(json cfg) {
  const std::string problem = cfg["problem"].get<std::string>();
  if (problem != "cantilever" && problem != "volume") throw ConfigError("problem must be 'cantilever' or 'volume'");
  const bool cantilever = problem == "cantilever";
  // Problem-dependent defaults are resolved before the config is recorded.
  if (cfg["mesh"].get<int>() == 0) cfg["mesh"] = cantilever ? 100 : 50;
  if (cfg["volume_fraction"].get<double>() == 0.0) cfg["volume_fraction"] = cantilever ? 0.4 : 0.5;
  const auto out = prepare_output(cfg);

  ALConfig a;
  a.rho0 = cfg["rho0"].get<double>();
  a.rho_growth = cfg["rho_growth"].get<double>();
  a.rho_max = positive(cfg, "rho_max");
  a.cfl = positive(cfg, "cfl");
  a.cfl_min = positive(cfg, "cfl_min");
  a.cfl_regrowth = cfg["cfl_regrowth"].get<double>();
  a.alpha = cfg["alpha"].get<double>();
  a.reinit_every = cfg["reinit_every"].get<int>();
  a.evolve.c_e = positive(cfg, "c_e");
  StopCriteria stop;
  stop.max_iters = cfg["max_iters"].get<int>();
  if (stop.max_iters < 0) throw ConfigError("max_iters must be non-negative");
  stop.constraint_tol = positive(cfg, "constraint_tol");
  stop.stagnation_tol = cfg["stagnation_tol"].get<double>();
  stop.stagnation_window = positive_int(cfg, "stagnation_window");
  const int vtk_every = cfg["vtk_every"].get<int>();
  const int threads = positive_int(cfg, "threads");
  const int n = positive_int(cfg, "mesh");
  const double vf = cfg["volume_fraction"].get<double>();

  std::optional<CantileverDemo> cant;
  std::optional<VolumeDemo> vol;
  OptProblem op;
  LevelSet phi0;
  if (cantilever) {
    CantileverOptions co;
    co.nx = n;
    co.ny = std::max(2, n / 2);
    co.volume_fraction = vf;
    cant = make_cantilever(co);
    op = cant->problem(threads);
    phi0 = cant->phi0;
  } else {
    vol = make_volume_demo(n, vf);
    op = vol->problem(threads);
    phi0 = vol->phi0;
  }
  const Mesh2D& mesh = *op.mesh;
  const Optimizer opt(op, a);
  auto snapshot = [&](int it, const LevelSet& phi) {
    if (vtk_every <= 0 || it % vtk_every != 0) return;
    char name[32];
    std::snprintf(name, sizeof name, "iter_%04d.vtk", it);
    std::vector<double> p(phi.values().begin(), phi.values().end());
    write_text(out / "snapshots" / name, vtk_mesh(mesh, {{"phi", p}}));
  };
  RunResult r;
  try {
    r = run(opt, phi0, stop, snapshot);
  } catch (const Error& e) {
    write_text(out / "failure.txt", std::string(e.what()) + "\n");
    throw NumericalFailure(e.what());
  }
  history_table(r.state.history).write(out / "history.csv");
  std::vector<double> p(r.phi.values().begin(), r.phi.values().end());
  const auto cut = build_cut(mesh, r.phi);
  write_text(out / "final.vtk", vtk_mesh(mesh, {{"phi", p}}));
  write_text(out / "final_cut.vtk", vtk_cut(mesh, cut));
  const double j0 = r.state.history.empty() ? r.J : r.state.history.front().J;
  const bool pass = std::abs(r.C) <= stop.constraint_tol && (!cantilever || r.state.history.empty() || r.J < j0);
  CsvTable summary;
  summary.header = {"problem", "iterations", "converged", "J0", "J", "C", "pass"};
  summary.add({problem, std::to_string(r.state.history.size()), r.converged ? "1" : "0", format_double(j0),
               format_double(r.J), format_double(r.C), pass ? "1" : "0"});
  summary.write(out / "summary.csv");
  std::cout << problem << ": " << r.state.history.size() << " iterations, J " << format_double(j0) << " -> "
            << format_double(r.J) << ", C " << format_double(r.C) << (pass ? " ok" : " FAIL") << '\n';
  return pass ? Success : ToleranceBreach;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Cut-cell shape derivatives, level-set evolution and optimization"};
  app.require_subcommand(1);
  Overrides o;
  auto flags = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--mesh", o.mesh, "Cells per side");
    sub->add_option("--geometry", o.geometry, "Geometry id");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads for gradient seeds");
    sub->add_option("--fd-step", o.fd_step, "Finite-difference step");
  };
  struct Command {
    const char* name;
    const char* help;
    json (*defaults)();
    int (*body)(json);
  };
  const std::vector<Command> commands{
      {"verify", "AD vs exact vs finite-difference shape derivatives", verify_defaults,
       [](json c) { return cmd_verify(c); }},
      {"hessian-check", "AD shape Hessian vs differences of AD gradients", hessian_defaults,
       [](json c) { return cmd_hessian(c); }},
      {"isovol", "Serial and distributed isolated-volume colouring", isovol_defaults,
       [](json c) { return cmd_isovol(c); }},
      {"reinit", "Reinitialize a distorted level set", reinit_defaults, [](json c) { return cmd_reinit(c); }},
      {"evolve", "Paired transport runs with and without the velocity-weighted penalty", evolve_defaults,
       [](json c) { return cmd_evolve(c); }},
      {"optimize", "Augmented-Lagrangian cantilever or pure-volume run", optimize_defaults,
       [](json c) { return cmd_optimize(std::move(c)); }},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    flags(sub);
    subs.push_back(sub);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Success : ConfigurationError;
  }
  try {
    for (std::size_t i = 0; i < commands.size(); ++i)
      if (subs[i]->parsed()) return commands[i].body(resolve(commands[i].defaults(), o));
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return ConfigurationError;
  } catch (const InvalidArgument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return ConfigurationError;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return ConfigurationError;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return NumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return ConfigurationError;
}

}  // namespace cutform
