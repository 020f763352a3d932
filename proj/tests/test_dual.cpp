#include "doctest.h"

#include <cmath>
#include <vector>

#include "cutform/dual.hpp"
#include "cutform/errors.hpp"

using namespace cutform;

TEST_CASE("first-order arithmetic follows the chain rule") {
  const Dual1 x{3.0, 1.0};
  const Dual1 sq = x * x;
  CHECK(sq.val == 9.0);
  CHECK(sq.der == 6.0);
  const Dual1 r = sqrt(Dual1{4.0, 1.0});
  CHECK(r.val == 2.0);
  CHECK(r.der == 0.25);
  const Dual1 a = abs(Dual1{-2.0, 1.0});
  CHECK(a.val == 2.0);
  CHECK(a.der == -1.0);
  const Dual1 q = Dual1{1.0, 1.0} / Dual1{2.0, 0.0};
  CHECK(q.val == 0.5);
  CHECK(q.der == 0.5);
  const Dual1 s = sin(Dual1{0.3, 1.0}), c = cos(Dual1{0.3, 1.0}), e = exp(Dual1{0.3, 1.0});
  CHECK(s.der == doctest::Approx(std::cos(0.3)).epsilon(1e-15));
  CHECK(c.der == doctest::Approx(-std::sin(0.3)).epsilon(1e-15));
  CHECK(e.der == doctest::Approx(std::exp(0.3)).epsilon(1e-15));
}

TEST_CASE("min, max and comparisons look at primal parts only") {
  const Dual1 a{1.0, 5.0}, b{2.0, -3.0};
  CHECK(min(a, b).der == 5.0);
  CHECK(max(a, b).der == -3.0);
  CHECK(a < b);
  CHECK_FALSE(Dual1{1.0, 0.0} < Dual1{1.0, 7.0});
}

TEST_CASE("singular operations raise") {
  CHECK_THROWS_AS(Dual1(1.0, 0.0) / Dual1(0.0, 1.0), SingularDerivative);
  CHECK_THROWS_AS(sqrt(Dual1{-1.0, 1.0}), SingularDerivative);
  CHECK_THROWS_AS(sqrt(Dual1{0.0, 1.0}), SingularDerivative);
  CHECK_THROWS_AS(abs(Dual1{0.0, 1.0}), SingularDerivative);
  CHECK_THROWS_AS(abs(Dual2{0.0, 1.0, 0.0, 0.0}), SingularDerivative);
}

TEST_CASE("seeding marks exactly one entry") {
  const std::vector<double> v{5.0, 7.0};
  const auto s0 = seed(v, 0), s1 = seed(v, 1);
  CHECK((s0[0].val == 5.0 && s0[0].der == 1.0 && s0[1].val == 7.0 && s0[1].der == 0.0));
  CHECK((s1[0].der == 0.0 && s1[1].der == 1.0));
  CHECK(primal(s0) == v);
  CHECK_THROWS_AS(seed(v, 2), InvalidArgument);
}

TEST_CASE("ring axioms hold exactly at first order") {
  const Dual1 a{1.25, -0.5}, b{0.75, 2.0}, c{-3.5, 0.125};
  const Dual1 l = a * (b + c), r = a * b + a * c;
  CHECK(l.val == r.val);
  CHECK(l.der == r.der);
  const Dual1 p = (a * b) * c, q = a * (b * c);
  CHECK(p.val == q.val);
  CHECK(p.der == q.der);
}

TEST_CASE("polynomial derivatives match the symbolic derivative") {
  // p(x) = 2x^3 - 5x^2 + x - 7, p'(x) = 6x^2 - 10x + 1
  for (double x : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    const Dual1 d{x, 1.0};
    const Dual1 p = Dual1(2.0) * d * d * d - Dual1(5.0) * d * d + d - Dual1(7.0);
    CHECK(p.der == doctest::Approx(6 * x * x - 10 * x + 1).epsilon(1e-15));
  }
}

TEST_CASE("second-order duals") {
  // f(x, y) = x y with both directions seeded
  const Dual2 x{2.0, 1.0, 0.0, 0.0}, y{3.0, 0.0, 1.0, 0.0};
  const Dual2 f = x * y;
  CHECK(f.d1 == 3.0);
  CHECK(f.d2 == 2.0);
  CHECK(f.d12 == 1.0);
  // Same variable in both directions: second derivative of x^3 is 6x.
  const Dual2 t{1.5, 1.0, 1.0, 0.0};
  CHECK((t * t * t).d12 == doctest::Approx(9.0));
  CHECK(sqrt(t).d12 == doctest::Approx(-0.25 * std::pow(1.5, -1.5)));
  // Collapsing one direction reproduces first-order behaviour.
  const Dual2 u{0.4, 1.0, 0.0, 0.0};
  const Dual1 w{0.4, 1.0};
  CHECK(sin(u).d1 == sin(w).der);
  CHECK(sin(u).d2 == 0.0);
  CHECK(exp(u * u).d1 == doctest::Approx(exp(w * w).der));
  const auto s = seed2(std::vector<double>{1.0, 2.0, 3.0}, 0, 2);
  CHECK((s[0].d1 == 1.0 && s[0].d2 == 0.0 && s[2].d1 == 0.0 && s[2].d2 == 1.0 && s[1].d1 == 0.0));
}
