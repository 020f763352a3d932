#include "cutform/geometries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cutform/errors.hpp"

namespace cutform {

using std::numbers::pi;

LevelSetFunction circle(Point centre, double radius) {
  return [=](const Point& p) { return norm(p - centre) - radius; };
}

LevelSetFunction cos_cos() {
  return [](const Point& p) { return std::cos(2.0 * pi * p.x) * std::cos(2.0 * pi * p.y) - 0.11; };
}

LevelSetFunction line(double a, double b, double c) {
  return [=](const Point& p) { return a * p.x + b * p.y + c; };
}

namespace {

// Distance to a polyline minus half the band width.
double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point d = b - a;
  const double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
  return norm(p - (a + t * d));
}

}  // namespace

LevelSetFunction snake() {
  // Closed loop through the four quadrant centres with a detour in each
  // quadrant, so every quadrant holds a piece of one connected band.
  static const std::vector<Point> path = {
      {0.2, 0.2}, {0.45, 0.2}, {0.45, 0.35}, {0.3, 0.35}, {0.3, 0.65}, {0.45, 0.65}, {0.45, 0.8},
      {0.2, 0.8}, {0.2, 0.9},  {0.8, 0.9},   {0.8, 0.65}, {0.6, 0.65}, {0.6, 0.35},  {0.8, 0.35},
      {0.8, 0.1}, {0.1, 0.1},  {0.1, 0.2},   {0.2, 0.2}};
  constexpr double half_width = 0.035;
  return [](const Point& p) {
    double d = 1e300;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) d = std::min(d, segment_distance(p, path[k], path[k + 1]));
    return d - half_width;
  };
}

LevelSetFunction union_of(LevelSetFunction first, LevelSetFunction second) {
  return [=](const Point& p) { return std::min(first(p), second(p)); };
}

LevelSetFunction geometry_by_name(const std::string& id) {
  if (id == "circle") return circle({0.5, 0.5}, 0.23);
  if (id == "coscos") return cos_cos();
  if (id == "snake") return snake();
  if (id == "line") return line(1.0, 0.0, -0.55);
  if (id == "tilted") return line(1.0, 0.2, -0.55 - 0.1);
  throw ConfigError("unknown geometry '" + id + "'");
}

std::vector<std::string> geometry_names() { return {"circle", "coscos", "snake", "line", "tilted"}; }

Functional VerificationSet::j3() const {
  return Functional::flux([](const auto& p) {
    const auto s = p.x.x + p.x.y;
    return decltype(p.x){s * p.x.x, s * p.x.y};
  });
}

VerificationSet verification_set() {
  VerificationSet v;
  v.f = Integrand([](const auto& p) { return p.x.x + p.x.y; });
  v.f_value = [](const EvalPoint<double>& p) { return p.x.x + p.x.y; };
  v.grad_f = [](const EvalPoint<double>&) { return Point{1.0, 1.0}; };
  v.flux_field = [](const EvalPoint<double>& p) { return (p.x.x + p.x.y) * p.x; };
  v.div_flux = [](const EvalPoint<double>& p) { return 3.0 * (p.x.x + p.x.y); };
  v.normal_integrand = Integrand([](const auto& p) {
    using std::cos, std::sqrt;
    // n_g follows the quadrature point, so it moves with the interface too.
    const auto gy = cos(p.x.y * (pi / 3.0)) * (-pi / 30.0);
    const auto len = sqrt(gy * gy + 1.0);
    const auto dx = p.normal.x - 1.0 / len;
    const auto dy = p.normal.y - gy / len;
    return dx * dx + dy * dy;
  });
  return v;
}

}  // namespace cutform
