#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nuhlab {

/// Largest torus dimension handled by the fixed-capacity vector/matrix types.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reduce a real number to the fundamental domain [0, 1).
inline double wrap_unit(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

/// Signed representative of a torus displacement in [-1/2, 1/2).
inline double wrap_signed(double d) {
  double r = d - std::floor(d + 0.5);
  return r >= 0.5 ? r - 1.0 : r;
}

/// A point of the flat torus T^d; coordinates always live in [0, 1).
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(const Vec& raw) : c_(raw) {
    check_dim(static_cast<int>(raw.size()));
    for (int i = 0; i < c_.size(); ++i) c_[i] = wrap_unit(c_[i]);
  }
  TorusPoint(std::initializer_list<double> xs) {
    c_.resize(static_cast<Eigen::Index>(xs.size()));
    check_dim(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) c_[i++] = wrap_unit(x);
  }

  int dim() const { return static_cast<int>(c_.size()); }
  double operator[](int i) const { return c_[i]; }
  const Vec& coords() const { return c_; }

  /// Block of consecutive coordinates as a new point.
  TorusPoint block(int start, int len) const { return TorusPoint(Vec(c_.segment(start, len))); }

 private:
  static void check_dim(int d) {
    if (d < 1 || d > kMaxDim) throw DimensionError("torus dimension out of range: " + std::to_string(d));
  }
  Vec c_;
};

/// Flat torus metric: per-coordinate shortest wrap, Euclidean combination.
inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) throw DimensionError("torus_distance: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    double d = wrap_signed(a[i] - b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

/// Largest per-coordinate wrapped displacement.
inline double torus_sup_distance(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) throw DimensionError("torus_sup_distance: dimension mismatch");
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(wrap_signed(a[i] - b[i])));
  return m;
}

/// Lift of b nearest to a: a + wrapped(b - a), without reduction.
inline Vec nearest_lift(const TorusPoint& a, const TorusPoint& b) {
  Vec out(a.dim());
  for (int i = 0; i < a.dim(); ++i) out[i] = a[i] + wrap_signed(b[i] - a[i]);
  return out;
}

inline TorusPoint concat(const TorusPoint& a, const TorusPoint& b) {
  Vec v(a.dim() + b.dim());
  v << a.coords(), b.coords();
  return TorusPoint(v);
}

/// Tangent vector attached to a base point.
struct Tangent {
  TorusPoint base;
  Vec components;
};

/// Derivative of a torus map at a base point.
struct JacobianMatrix {
  TorusPoint base;
  Mat matrix;
};

}  // namespace nuhlab
