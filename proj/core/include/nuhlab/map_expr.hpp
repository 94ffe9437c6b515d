#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nuhlab/profile.hpp"
#include "nuhlab/torus.hpp"

namespace nuhlab {

using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Exact integer determinant (fraction-free elimination).
long long int_determinant(const IntMat& m);

/// x_target <- x_target + amplitude * prod_k profile_k(x_{coord_k}).
/// The target coordinate may not appear among the factors, so the map is a
/// unit-determinant shear with inverse obtained by negating the amplitude.
struct ShearSpec {
  int dim = 0;
  int target = 0;
  double amplitude = 0.0;
  std::vector<std::pair<int, Profile>> factors;
};

/// Rotation of the (first, second) coordinate plane about `center`, by the angle
/// amplitude * radial(rho) * prod_k profile_k(x_{coord_k}), in the coordinates
/// z = (d0 / aspect, d1 * aspect), rho = |z|.
/// Each ellipse rho = const is preserved and moved by a conjugated rotation, so
/// the map is area preserving in the plane for fixed remaining coordinates.
struct TwistSpec {
  int dim = 0;
  int first = 0;
  int second = 1;
  double center_first = 0.5;
  double center_second = 0.5;
  double radius = 0.25;   // radial profile vanishes for r >= radius
  double plateau = 0.5;   // radial profile is 1 for r <= plateau * radius
  double amplitude = 0.0;
  std::vector<std::pair<int, Profile>> factors;
  double aspect = 1.0;  // semi-axes radius*aspect along `first`, radius/aspect along `second`
  /// > 0: the disc is repeated along `first` with this period (1/period an
  /// integer, radius * aspect <= period/2).
  double period = 0.0;
};

/// Immutable expression tree of volume-preserving torus maps.
///
/// Nodes share structure through reference counting; a MapExpr is cheap to copy
/// and safe to use concurrently from several threads.
class MapExpr {
 public:
  enum class Kind { Identity, Linear, Translation, Product, Compose, Shear, Twist };

  static MapExpr identity(int dim);
  /// Integer matrix with determinant +-1.
  static MapExpr linear(const IntMat& matrix);
  static MapExpr linear(std::initializer_list<std::initializer_list<long long>> rows);
  static MapExpr translation(const Vec& offset);
  /// Acts on coordinates [0, a.dim()) by `a` and the remaining block by `b`.
  static MapExpr product(const MapExpr& a, const MapExpr& b);
  /// outer o inner: inner is applied first.
  static MapExpr compose(const MapExpr& outer, const MapExpr& inner);
  /// Right-to-left composition of a sequence: compose_all({f, g, h}) = f o g o h.
  static MapExpr compose_all(const std::vector<MapExpr>& maps);
  static MapExpr shear(ShearSpec spec);
  static MapExpr twist(TwistSpec spec);

  int dim() const;
  Kind kind() const;

  TorusPoint eval(const TorusPoint& x) const;
  JacobianMatrix jacobian(const TorusPoint& x) const;
  /// Image and derivative in one pass.
  std::pair<TorusPoint, Mat> eval_with_jacobian(const TorusPoint& x) const;

  /// Every node kind has a closed-form inverse.
  MapExpr inverse() const;

  /// Structural accessors (Product: first/second factor; Compose: outer/inner).
  const MapExpr& left() const;
  const MapExpr& right() const;
  const IntMat& matrix() const;
  const ShearSpec& shear_spec() const;
  const TwistSpec& twist_spec() const;
  const Vec& offset() const;

  /// Number of nodes in the tree.
  std::size_t size() const;
  std::string describe() const;

  struct Node;

  // Raw evaluation on coordinates already reduced mod 1.
  void apply(Vec& x) const;
  void apply_with_jacobian(Vec& x, Mat& jac) const;

 private:
  explicit MapExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Max relative entrywise gap between the analytic Jacobian and central
/// differences. The step is rounded down to a power of two so that affine maps
/// are differenced without rounding error.
double jacobian_fd_check(const MapExpr& map, const TorusPoint& x, double step);

/// Orbit x, f(x), ..., f^{n-1}(x) (n points).
std::vector<TorusPoint> iterate(const MapExpr& map, const TorusPoint& x, int n);

/// Streaming orbit: calls visit(k, f^k(x)) for k = 0..n-1 without storing it.
void for_each_orbit_point(const MapExpr& map, const TorusPoint& x, int n,
                          const std::function<void(int, const TorusPoint&)>& visit);

/// All solutions of (M - I) x = 0 mod 1, sorted lexicographically.
std::vector<TorusPoint> fixed_points_of_linear(const IntMat& matrix);

}  // namespace nuhlab
