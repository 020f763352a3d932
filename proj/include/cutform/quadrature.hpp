#pragma once

#include <array>
#include <vector>

namespace cutform {

/// Rule on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2.
struct TriangleRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int order = 0;
};

/// Gauss rule on [0, 1]; weights sum to 1.
struct SegmentRule {
  std::vector<double> points;
  std::vector<double> weights;
  int order = 0;
};

/// Smallest built-in rule exact to at least `order` (1, 2 or 4).
const TriangleRule& triangle_rule(int order);
/// Gauss-Legendre rule exact to at least `order` (up to 5).
const SegmentRule& segment_rule(int order);

}  // namespace cutform
