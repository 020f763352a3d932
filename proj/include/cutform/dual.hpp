#pragma once

// Forward-mode dual scalars.
//
// Dual1 carries a value and one directional derivative (a + b eps, eps^2 = 0).
// Dual2 carries two independent first-order directions plus their mixed
// second-order coefficient (eps1^2 = eps2^2 = 0, eps1 eps2 != 0), which is
// what a single entry of a Hessian needs.
//
// All geometry code is written against a generic scalar T and is
// instantiated for double, Dual1 and Dual2. Comparisons only ever look at the
// primal part.

#include <cmath>
#include <compare>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cutform/errors.hpp"

namespace cutform {

struct Dual1 {
  double val = 0.0;
  double der = 0.0;

  constexpr Dual1() = default;
  constexpr Dual1(double v) : val(v) {}  // NOLINT: implicit promotion is the point
  constexpr Dual1(double v, double d) : val(v), der(d) {}

  constexpr Dual1 operator-() const { return {-val, -der}; }
  constexpr Dual1& operator+=(const Dual1& o) { val += o.val; der += o.der; return *this; }
  constexpr Dual1& operator-=(const Dual1& o) { val -= o.val; der -= o.der; return *this; }
  constexpr Dual1& operator*=(const Dual1& o) {
    der = der * o.val + val * o.der;
    val *= o.val;
    return *this;
  }
  Dual1& operator/=(const Dual1& o);

  friend constexpr Dual1 operator+(Dual1 a, const Dual1& b) { return a += b; }
  friend constexpr Dual1 operator-(Dual1 a, const Dual1& b) { return a -= b; }
  friend constexpr Dual1 operator*(Dual1 a, const Dual1& b) { return a *= b; }
  friend Dual1 operator/(Dual1 a, const Dual1& b) { return a /= b; }

  friend constexpr bool operator==(const Dual1& a, const Dual1& b) { return a.val == b.val; }
  friend constexpr auto operator<=>(const Dual1& a, const Dual1& b) { return a.val <=> b.val; }
};

struct Dual2 {
  double val = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d12 = 0.0;

  constexpr Dual2() = default;
  constexpr Dual2(double v) : val(v) {}  // NOLINT
  constexpr Dual2(double v, double a, double b, double ab) : val(v), d1(a), d2(b), d12(ab) {}

  constexpr Dual2 operator-() const { return {-val, -d1, -d2, -d12}; }
  constexpr Dual2& operator+=(const Dual2& o) {
    val += o.val; d1 += o.d1; d2 += o.d2; d12 += o.d12;
    return *this;
  }
  constexpr Dual2& operator-=(const Dual2& o) {
    val -= o.val; d1 -= o.d1; d2 -= o.d2; d12 -= o.d12;
    return *this;
  }
  constexpr Dual2& operator*=(const Dual2& o) {
    d12 = val * o.d12 + d1 * o.d2 + d2 * o.d1 + d12 * o.val;
    d1 = val * o.d1 + d1 * o.val;
    d2 = val * o.d2 + d2 * o.val;
    val *= o.val;
    return *this;
  }
  Dual2& operator/=(const Dual2& o);

  friend constexpr Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
  friend constexpr Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
  friend constexpr Dual2 operator*(Dual2 a, const Dual2& b) { return a *= b; }
  friend Dual2 operator/(Dual2 a, const Dual2& b) { return a /= b; }

  friend constexpr bool operator==(const Dual2& a, const Dual2& b) { return a.val == b.val; }
  friend constexpr auto operator<=>(const Dual2& a, const Dual2& b) { return a.val <=> b.val; }
};

namespace detail {

// Push a scalar function through a dual: f0 = f(a), f1 = f'(a), f2 = f''(a).
inline Dual1 chain(const Dual1& x, double f0, double f1, double /*f2*/) {
  return {f0, f1 * x.der};
}
inline Dual2 chain(const Dual2& x, double f0, double f1, double f2) {
  return {f0, f1 * x.d1, f1 * x.d2, f1 * x.d12 + f2 * x.d1 * x.d2};
}

}  // namespace detail

inline Dual1& Dual1::operator/=(const Dual1& o) {
  if (o.val == 0.0) throw SingularDerivative("dual division by a zero primal");
  const double q = val / o.val;
  der = (der - q * o.der) / o.val;
  val = q;
  return *this;
}

inline Dual2& Dual2::operator/=(const Dual2& o) {
  if (o.val == 0.0) throw SingularDerivative("dual division by a zero primal");
  const double inv = 1.0 / o.val;
  // 1/x pushed through the chain rule, then multiplied in.
  const Dual2 r = detail::chain(o, inv, -inv * inv, 2.0 * inv * inv * inv);
  return *this *= r;
}

template <class D>
concept DualScalar = std::same_as<D, Dual1> || std::same_as<D, Dual2>;

template <DualScalar D>
D sqrt(const D& x) {
  if (!(x.val > 0.0)) throw SingularDerivative("dual sqrt needs a positive primal");
  const double s = std::sqrt(x.val);
  return detail::chain(x, s, 0.5 / s, -0.25 / (s * x.val));
}

template <DualScalar D>
D abs(const D& x) {
  if (x.val == 0.0) throw SingularDerivative("dual abs is not differentiable at zero");
  return x.val > 0.0 ? x : -x;
}

template <DualScalar D>
D sin(const D& x) {
  return detail::chain(x, std::sin(x.val), std::cos(x.val), -std::sin(x.val));
}

template <DualScalar D>
D cos(const D& x) {
  return detail::chain(x, std::cos(x.val), -std::sin(x.val), -std::cos(x.val));
}

template <DualScalar D>
D exp(const D& x) {
  const double e = std::exp(x.val);
  return detail::chain(x, e, e, e);
}

template <DualScalar D>
D min(const D& a, const D& b) { return b.val < a.val ? b : a; }

template <DualScalar D>
D max(const D& a, const D& b) { return a.val < b.val ? b : a; }

inline double value_of(double x) { return x; }
inline double value_of(const Dual1& x) { return x.val; }
inline double value_of(const Dual2& x) { return x.val; }

/// Square without going through pow, usable for every scalar type.
template <class T>
T square(const T& x) { return x * x; }

/// Copy of `values` where entry `i` carries a unit first-order seed.
std::vector<Dual1> seed(std::span<const double> values, std::size_t i);

/// Entry `i` seeds direction 1 and entry `j` direction 2 (both when i == j).
std::vector<Dual2> seed2(std::span<const double> values, std::size_t i, std::size_t j);

std::vector<double> primal(std::span<const Dual1> values);

}  // namespace cutform
