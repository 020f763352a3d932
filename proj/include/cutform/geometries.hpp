#pragma once

// Named level sets and the integrands used by the verification runs.

#include <functional>
#include <string>
#include <vector>

#include "cutform/analytic.hpp"
#include "cutform/functional.hpp"
#include "cutform/mesh.hpp"

namespace cutform {

using LevelSetFunction = std::function<double(const Point&)>;

/// sqrt((x-cx)^2 + (y-cy)^2) - r
LevelSetFunction circle(Point centre, double radius);
/// cos(2 pi x) cos(2 pi y) - 0.11
LevelSetFunction cos_cos();
/// Signed line a x + b y + c.
LevelSetFunction line(double a, double b, double c);
/// A serpentine band that winds through all four quadrants of the unit
/// square and closes on itself.
LevelSetFunction snake();
/// min(first, second): union of two negative regions.
LevelSetFunction union_of(LevelSetFunction first, LevelSetFunction second);

/// Geometry by id: circle | coscos | snake | line | tilted.
LevelSetFunction geometry_by_name(const std::string& id);
std::vector<std::string> geometry_names();

/// The four verification functionals and their analytic ingredients.
struct VerificationSet {
  /// f(x, y) = x + y
  Integrand f;
  ScalarField f_value;
  VectorField grad_f;
  /// F = (x + y) (x, y), div F = 3 (x + y)
  VectorField flux_field;
  ScalarField div_flux;
  /// g(n) = |n - n_g|^2, n_g = grad g/|grad g|, g = x - sin(pi y / 3) / 10
  Integrand normal_integrand;

  Functional j1() const { return Functional::volume(f); }
  Functional j2() const { return Functional::boundary(f); }
  Functional j3() const;
  Functional j4() const { return Functional::normal(normal_integrand); }
};

VerificationSet verification_set();

}  // namespace cutform
