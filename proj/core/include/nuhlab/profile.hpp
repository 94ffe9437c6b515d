#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "nuhlab/torus.hpp"

namespace nuhlab {

/// C-infinity step: 0 for u <= 0, 1 for u >= 1, built from exp(-1/u).
/// Exactly flat outside (0, 1).
inline double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double a = std::exp(-1.0 / u);
  double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

inline double smooth_step_deriv(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  double v = 1.0 - u;
  double a = std::exp(-1.0 / u);
  double b = std::exp(-1.0 / v);
  double s = a + b;
  if (s == 0.0) return 0.0;
  // a' = a/u^2, b' = -b/v^2
  return (a / (u * u) * b + a * b / (v * v)) / (s * s);
}

struct ValueDeriv {
  double value;
  double deriv;
};

/// Plateau bump on the real line: 1 on |t| <= plateau*radius, 0 on |t| >= radius.
inline ValueDeriv plateau_bump(double t, double radius, double plateau) {
  double at = std::abs(t);
  if (at >= radius) return {0.0, 0.0};
  double inner = plateau * radius;
  if (at <= inner) return {1.0, 0.0};
  double w = radius - inner;
  double u = (radius - at) / w;
  double sign = t > 0 ? 1.0 : -1.0;
  return {smooth_step(u), -sign * smooth_step_deriv(u) / w};
}

/// A scalar factor depending on one torus coordinate. Shear displacements and
/// twist angles are products of these.
struct Profile {
  enum class Kind { Constant, Bump, NotBump, OddBump, Sine, Ramp };

  Kind kind = Kind::Constant;
  double a = 1.0;  // Constant: value | Bump/NotBump/OddBump: center | Sine: phase | Ramp: start
  double b = 0.0;  // Bump/NotBump/OddBump: radius | Ramp: end
  double c = 0.5;  // Bump/NotBump/OddBump: plateau fraction
  int n = 1;       // Sine: frequency | Ramp: windings

  static Profile constant(double v) { return {Kind::Constant, v, 0.0, 0.0, 0}; }
  static Profile bump(double center, double radius, double plateau) {
    return {Kind::Bump, center, radius, plateau, 0};
  }
  static Profile not_bump(double center, double radius, double plateau) {
    return {Kind::NotBump, center, radius, plateau, 0};
  }
  /// (t - center) / radius times the plateau bump: odd about the center.
  static Profile odd_bump(double center, double radius, double plateau) {
    return {Kind::OddBump, center, radius, plateau, 0};
  }
  static Profile sine(int freq, double phase) { return {Kind::Sine, phase, 0.0, 0.0, freq}; }
  /// Integer-winding ramp: 0 before `start`, `windings` after `end` (0 <= start < end <= 1).
  static Profile ramp(double start, double end, int windings) { return {Kind::Ramp, start, end, 0.0, windings}; }

  ValueDeriv eval(double t) const {
    switch (kind) {
      case Kind::Constant:
        return {a, 0.0};
      case Kind::Bump:
        return plateau_bump(wrap_signed(t - a), b, c);
      case Kind::NotBump: {
        auto v = plateau_bump(wrap_signed(t - a), b, c);
        return {1.0 - v.value, -v.deriv};
      }
      case Kind::OddBump: {
        double t0 = wrap_signed(t - a);
        auto v = plateau_bump(t0, b, c);
        return {t0 / b * v.value, (v.value + t0 * v.deriv) / b};
      }
      case Kind::Sine: {
        double arg = 2.0 * std::numbers::pi * (n * t + a);
        return {std::sin(arg), 2.0 * std::numbers::pi * n * std::cos(arg)};
      }
      case Kind::Ramp: {
        double x = wrap_unit(t);
        double len = b - a;
        double u = (x - a) / len;
        return {n * smooth_step(u), n * smooth_step_deriv(u) / len};
      }
    }
    return {0.0, 0.0};
  }

  /// True when the profile is identically zero on the closed coordinate
  /// interval [lo, hi] (lo <= hi, no wrap).
  bool vanishes_on(double lo, double hi) const;

  std::string describe() const;
};

}  // namespace nuhlab
