#pragma once

#include <cmath>

#include "cutform/dual.hpp"

namespace cutform {

/// Planar vector over a generic scalar (double, Dual1, Dual2).
template <class T>
struct Vec2 {
  T x{};
  T y{};

  constexpr Vec2() = default;
  constexpr Vec2(T x_, T y_) : x(x_), y(y_) {}
  template <class U>
    requires(!std::same_as<U, T>)
  constexpr explicit Vec2(const Vec2<U>& o) : x(T(o.x)), y(T(o.y)) {}

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(const T& s, const Vec2& v) { return {s * v.x, s * v.y}; }
  friend constexpr Vec2 operator*(const Vec2& v, const T& s) { return {v.x * s, v.y * s}; }
  friend Vec2 operator/(const Vec2& v, const T& s) { return {v.x / s, v.y / s}; }
};

using Point = Vec2<double>;

template <class T>
constexpr T dot(const Vec2<T>& a, const Vec2<T>& b) { return a.x * b.x + a.y * b.y; }

/// z-component of the 3D cross product of two in-plane vectors.
template <class T>
constexpr T cross(const Vec2<T>& a, const Vec2<T>& b) { return a.x * b.y - a.y * b.x; }

template <class T>
T norm(const Vec2<T>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

/// Rotation by +90 degrees, i.e. e3 x a.
template <class T>
constexpr Vec2<T> perp(const Vec2<T>& a) { return {-a.y, a.x}; }

template <class T>
Vec2<T> promote(const Point& p) { return {T(p.x), T(p.y)}; }

inline Point value_of(const Vec2<double>& p) { return p; }
template <DualScalar D>
Point value_of(const Vec2<D>& p) { return {p.x.val, p.y.val}; }

}  // namespace cutform
