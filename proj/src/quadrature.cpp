#include "cutform/quadrature.hpp"

#include <cmath>

#include "cutform/errors.hpp"

namespace cutform {

namespace {

TriangleRule make_dunavant4() {
  // Six-point degree-4 rule (Dunavant 1985), barycentric orbits (a, a, 1-2a).
  const double a1 = 0.445948490915965, w1 = 0.223381589678011;
  const double a2 = 0.091576213509771, w2 = 0.109951743655322;
  TriangleRule r;
  r.order = 4;
  for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({a, a});
    r.points.push_back({a, b});
    r.points.push_back({b, a});
    for (int k = 0; k < 3; ++k) r.weights.push_back(0.5 * w);
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int order) {
  static const TriangleRule centroid{{{1.0 / 3.0, 1.0 / 3.0}}, {0.5}, 1};
  static const TriangleRule three{
      {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}},
      {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0},
      2};
  static const TriangleRule six = make_dunavant4();
  if (order <= 1) return centroid;
  if (order == 2) return three;
  if (order <= 4) return six;
  throw InvalidArgument("no triangle rule of the requested order");
}

const SegmentRule& segment_rule(int order) {
  static const SegmentRule g1{{0.5}, {1.0}, 1};
  static const SegmentRule g2{{0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)}, {0.5, 0.5}, 3};
  static const SegmentRule g3{{0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)},
                              {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0},
                              5};
  if (order <= 1) return g1;
  if (order <= 3) return g2;
  if (order <= 5) return g3;
  throw InvalidArgument("no segment rule of the requested order");
}

}  // namespace cutform
