#pragma once

// Ready-made optimization and transport scenarios shared by the CLI, the
// acceptance checks and the tests.

#include <memory>
#include <vector>

#include "cutform/optimizer.hpp"

namespace cutform {

/// Clamped-left beam on [0,2]x[0,1] with a downward traction on the middle of
/// the right edge, minimum compliance at a volume fraction. A small disk of
/// material under the load is kept fixed.
struct CantileverDemo {
  std::shared_ptr<const Mesh2D> mesh;
  LevelSet phi0;
  std::vector<int> load_edges;
  std::vector<char> non_designable;
  std::unique_ptr<StaggeredProblem> state;
  double volume_fraction = 0.4;

  OptProblem problem(int threads = 1) const;
};

struct CantileverOptions {
  int nx = 100;
  int ny = 50;
  double volume_fraction = 0.4;
  /// Holes of the initial design, per row and per column.
  int holes_x = 4;
  int holes_y = 2;
  /// Radius of the fixed disk under the load.
  double load_radius = 0.1;
};

CantileverDemo make_cantilever(const CantileverOptions& options = {});

/// Unit square with a centred circle and no state: J = 0, only the volume
/// constraint drives the interface.
struct VolumeDemo {
  std::shared_ptr<const Mesh2D> mesh;
  LevelSet phi0;
  double volume_fraction = 0.5;

  OptProblem problem(int threads = 1) const;
};

VolumeDemo make_volume_demo(int n = 50, double volume_fraction = 0.5, double radius = 0.35);

/// Interface transported towards a non-designable strip x >= x_fixed, where
/// beta = 0. The metric is max |phi_T - phi_0| over strip nodes at least
/// `margin` inside it.
struct EncroachmentOptions {
  int n = 64;
  int steps = 40;
  double x_fixed = 0.6;
  /// beta_x falls linearly from 1 to 0 over this distance before the strip.
  double ramp = 0.1;
  /// Strip nodes closer than this to x_fixed are left out of the metric.
  double margin = 0.1;
  double courant = 0.5;
  double c_e = 0.01;
};

struct EncroachmentResult {
  Mesh2D mesh;
  LevelSet phi0;
  LevelSet phi;
  double metric = 0.0;
};

EncroachmentResult run_encroachment(bool velocity_weighted, const EncroachmentOptions& options = {});

}  // namespace cutform
