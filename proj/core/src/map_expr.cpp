#include "nuhlab/map_expr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <variant>

namespace nuhlab {

namespace {

struct IdentityNode {
  int dim;
};
struct LinearNode {
  IntMat m;
  Mat md;
};
struct TranslationNode {
  Vec offset;
};
struct ProductNode {
  MapExpr a, b;
};
struct ComposeNode {
  MapExpr outer, inner;
};
struct ShearNode {
  ShearSpec spec;
};
struct TwistNode {
  TwistSpec spec;
};

}  // namespace

struct MapExpr::Node {
  int dim;
  std::variant<IdentityNode, LinearNode, TranslationNode, ProductNode, ComposeNode, ShearNode, TwistNode> v;
};

long long int_determinant(const IntMat& m) {
  const int n = static_cast<int>(m.rows());
  if (n != m.cols()) throw DimensionError("int_determinant: matrix not square");
  if (n == 0) return 1;
  // Bareiss fraction-free elimination; every division is exact.
  IntMat a = m;
  long long sign = 1;
  long long prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a(k, k) == 0) {
      int swap = -1;
      for (int i = k + 1; i < n; ++i)
        if (a(i, k) != 0) {
          swap = i;
          break;
        }
      if (swap < 0) return 0;
      a.row(k).swap(a.row(swap));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

namespace {

IntMat integer_inverse(const IntMat& m) {
  const int n = static_cast<int>(m.rows());
  Mat md = m.cast<double>();
  Mat inv = md.inverse();
  IntMat r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = std::llround(inv(i, j));
  IntMat check = m * r;
  if (check != IntMat::Identity(n, n)) throw std::logic_error("integer_inverse: matrix is not unimodular");
  return r;
}

// Offset from the nearest disc center along a periodic row (period 0: one disc).
double twist_offset(double delta, double period) {
  double d = wrap_signed(delta);
  if (period > 0.0) d -= period * std::round(d / period);
  return d;
}

double factor_product(const std::vector<std::pair<int, Profile>>& factors, const Vec& x) {
  double p = 1.0;
  for (const auto& [coord, prof] : factors) {
    p *= prof.eval(x[coord]).value;
    if (p == 0.0) return 0.0;
  }
  return p;
}

// Value of the product and its partial derivatives (indexed by factor).
double factor_product_grad(const std::vector<std::pair<int, Profile>>& factors, const Vec& x,
                           std::array<double, 8>& grad) {
  std::array<ValueDeriv, 8> vd{};
  const std::size_t k = factors.size();
  double p = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    vd[i] = factors[i].second.eval(x[factors[i].first]);
    p *= vd[i].value;
  }
  for (std::size_t i = 0; i < k; ++i) {
    double g = vd[i].deriv;
    if (g != 0.0)
      for (std::size_t j = 0; j < k; ++j)
        if (j != i) g *= vd[j].value;
    grad[i] = g;
  }
  return p;
}

void check_factors(int dim, const std::vector<std::pair<int, Profile>>& factors, std::initializer_list<int> forbidden,
                   const char* what) {
  if (factors.size() > 8) throw std::invalid_argument(std::string(what) + ": at most 8 profile factors");
  for (const auto& [coord, prof] : factors) {
    if (coord < 0 || coord >= dim) throw DimensionError(std::string(what) + ": factor coordinate out of range");
    for (int f : forbidden)
      if (coord == f)
        throw std::invalid_argument(std::string(what) + ": a moved coordinate cannot drive its own displacement");
  }
}

}  // namespace

MapExpr MapExpr::identity(int dim) {
  if (dim < 1 || dim > kMaxDim) throw DimensionError("identity: bad dimension");
  return MapExpr(std::make_shared<const Node>(Node{dim, IdentityNode{dim}}));
}

MapExpr MapExpr::linear(const IntMat& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) throw DimensionError("linear: matrix must be square");
  long long det = int_determinant(matrix);
  if (det != 1 && det != -1) throw std::invalid_argument("linear: determinant must be +-1, got " + std::to_string(det));
  return MapExpr(std::make_shared<const Node>(
      Node{static_cast<int>(matrix.rows()), LinearNode{matrix, matrix.cast<double>()}}));
}

MapExpr MapExpr::linear(std::initializer_list<std::initializer_list<long long>> rows) {
  const int n = static_cast<int>(rows.size());
  IntMat m(n, n);
  int i = 0;
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n) throw DimensionError("linear: ragged matrix");
    int j = 0;
    for (long long v : r) m(i, j++) = v;
    ++i;
  }
  return linear(m);
}

MapExpr MapExpr::translation(const Vec& offset) {
  if (offset.size() < 1 || offset.size() > kMaxDim) throw DimensionError("translation: bad dimension");
  return MapExpr(std::make_shared<const Node>(Node{static_cast<int>(offset.size()), TranslationNode{offset}}));
}

MapExpr MapExpr::product(const MapExpr& a, const MapExpr& b) {
  int d = a.dim() + b.dim();
  if (d > kMaxDim) throw DimensionError("product: dimension exceeds capacity");
  return MapExpr(std::make_shared<const Node>(Node{d, ProductNode{a, b}}));
}

MapExpr MapExpr::compose(const MapExpr& outer, const MapExpr& inner) {
  if (outer.dim() != inner.dim())
    throw DimensionError("compose: dimension mismatch " + std::to_string(outer.dim()) + " vs " +
                         std::to_string(inner.dim()));
  return MapExpr(std::make_shared<const Node>(Node{outer.dim(), ComposeNode{outer, inner}}));
}

MapExpr MapExpr::compose_all(const std::vector<MapExpr>& maps) {
  if (maps.empty()) throw std::invalid_argument("compose_all: empty sequence");
  MapExpr acc = maps.back();
  for (auto it = maps.rbegin() + 1; it != maps.rend(); ++it) acc = compose(*it, acc);
  return acc;
}

MapExpr MapExpr::shear(ShearSpec spec) {
  if (spec.dim < 1 || spec.dim > kMaxDim) throw DimensionError("shear: bad dimension");
  if (spec.target < 0 || spec.target >= spec.dim) throw DimensionError("shear: target out of range");
  check_factors(spec.dim, spec.factors, {spec.target}, "shear");
  int d = spec.dim;
  return MapExpr(std::make_shared<const Node>(Node{d, ShearNode{std::move(spec)}}));
}

MapExpr MapExpr::twist(TwistSpec spec) {
  if (spec.dim < 2 || spec.dim > kMaxDim) throw DimensionError("twist: bad dimension");
  if (spec.first == spec.second || spec.first < 0 || spec.second < 0 || spec.first >= spec.dim ||
      spec.second >= spec.dim)
    throw DimensionError("twist: bad plane coordinates");
  if (!(spec.aspect > 0.0)) throw std::invalid_argument("twist: aspect must be positive");
  const double reach0 = spec.radius * spec.aspect, reach1 = spec.radius / spec.aspect;
  if (!(spec.radius > 0.0 && reach0 <= 0.5 && reach1 <= 0.5))
    throw std::invalid_argument("twist: support must have semi-axes in (0, 1/2]");
  if (!(spec.plateau >= 0.0 && spec.plateau < 1.0)) throw std::invalid_argument("twist: plateau must lie in [0, 1)");
  if (spec.period != 0.0) {
    double m = 1.0 / spec.period;
    if (!(spec.period > 0.0) || std::abs(m - std::round(m)) > 1e-9 || reach0 > 0.5 * spec.period)
      throw std::invalid_argument("twist: period must be 1/m with radius <= period/2");
  }
  check_factors(spec.dim, spec.factors, {spec.first, spec.second}, "twist");
  int d = spec.dim;
  return MapExpr(std::make_shared<const Node>(Node{d, TwistNode{std::move(spec)}}));
}

int MapExpr::dim() const { return node_->dim; }

MapExpr::Kind MapExpr::kind() const { return static_cast<Kind>(node_->v.index()); }

const MapExpr& MapExpr::left() const {
  if (auto* p = std::get_if<ProductNode>(&node_->v)) return p->a;
  if (auto* c = std::get_if<ComposeNode>(&node_->v)) return c->outer;
  throw std::logic_error("left(): not a Product or Compose node");
}

const MapExpr& MapExpr::right() const {
  if (auto* p = std::get_if<ProductNode>(&node_->v)) return p->b;
  if (auto* c = std::get_if<ComposeNode>(&node_->v)) return c->inner;
  throw std::logic_error("right(): not a Product or Compose node");
}

const IntMat& MapExpr::matrix() const { return std::get<LinearNode>(node_->v).m; }
const ShearSpec& MapExpr::shear_spec() const { return std::get<ShearNode>(node_->v).spec; }
const TwistSpec& MapExpr::twist_spec() const { return std::get<TwistNode>(node_->v).spec; }
const Vec& MapExpr::offset() const { return std::get<TranslationNode>(node_->v).offset; }

std::size_t MapExpr::size() const {
  if (auto* p = std::get_if<ProductNode>(&node_->v)) return 1 + p->a.size() + p->b.size();
  if (auto* c = std::get_if<ComposeNode>(&node_->v)) return 1 + c->outer.size() + c->inner.size();
  return 1;
}

void MapExpr::apply(Vec& x) const {
  const Node& n = *node_;
  switch (n.v.index()) {
    case 0:
      return;
    case 1: {
      const auto& lin = std::get<LinearNode>(n.v);
      Vec y = lin.md * x;
      for (int i = 0; i < y.size(); ++i) x[i] = wrap_unit(y[i]);
      return;
    }
    case 2: {
      const auto& t = std::get<TranslationNode>(n.v);
      for (int i = 0; i < x.size(); ++i) x[i] = wrap_unit(x[i] + t.offset[i]);
      return;
    }
    case 3: {
      const auto& p = std::get<ProductNode>(n.v);
      const int da = p.a.dim(), db = p.b.dim();
      Vec xa = x.head(da), xb = x.tail(db);
      p.a.apply(xa);
      p.b.apply(xb);
      x << xa, xb;
      return;
    }
    case 4: {
      const auto& c = std::get<ComposeNode>(n.v);
      c.inner.apply(x);
      c.outer.apply(x);
      return;
    }
    case 5: {
      const auto& s = std::get<ShearNode>(n.v).spec;
      double disp = s.amplitude * factor_product(s.factors, x);
      if (disp == 0.0) return;
      x[s.target] = wrap_unit(x[s.target] + wrap_signed(disp));
      return;
    }
    case 6: {
      const auto& s = std::get<TwistNode>(n.v).spec;
      double d0 = twist_offset(x[s.first] - s.center_first, s.period);
      double d1 = wrap_signed(x[s.second] - s.center_second);
      double z0 = d0 / s.aspect, z1 = d1 * s.aspect;
      auto rad = plateau_bump(std::hypot(z0, z1), s.radius, s.plateau);
      if (rad.value == 0.0) return;
      double theta = s.amplitude * rad.value * factor_product(s.factors, x);
      if (theta == 0.0) return;
      double c = std::cos(theta), sn = std::sin(theta);
      x[s.first] = wrap_unit(x[s.first] + (s.aspect * (c * z0 - sn * z1) - d0));
      x[s.second] = wrap_unit(x[s.second] + ((sn * z0 + c * z1) / s.aspect - d1));
      return;
    }
  }
}

void MapExpr::apply_with_jacobian(Vec& x, Mat& jac) const {
  const Node& n = *node_;
  switch (n.v.index()) {
    case 0:
      return;
    case 1: {
      const auto& lin = std::get<LinearNode>(n.v);
      Vec y = lin.md * x;
      for (int i = 0; i < y.size(); ++i) x[i] = wrap_unit(y[i]);
      Mat j2 = lin.md * jac;
      jac = j2;
      return;
    }
    case 2:
      apply(x);
      return;
    case 3: {
      const auto& p = std::get<ProductNode>(n.v);
      const int da = p.a.dim(), db = p.b.dim();
      Vec xa = x.head(da), xb = x.tail(db);
      Mat ja = jac.topRows(da), jb = jac.bottomRows(db);
      p.a.apply_with_jacobian(xa, ja);
      p.b.apply_with_jacobian(xb, jb);
      x << xa, xb;
      jac.topRows(da) = ja;
      jac.bottomRows(db) = jb;
      return;
    }
    case 4: {
      const auto& c = std::get<ComposeNode>(n.v);
      c.inner.apply_with_jacobian(x, jac);
      c.outer.apply_with_jacobian(x, jac);
      return;
    }
    case 5: {
      const auto& s = std::get<ShearNode>(n.v).spec;
      std::array<double, 8> grad{};
      double disp = s.amplitude * factor_product_grad(s.factors, x, grad);
      // Row update: J_node = I + e_target * g^T, applied to the accumulated matrix.
      Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxDim> add =
          Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxDim>::Zero(jac.cols());
      bool any = false;
      for (std::size_t i = 0; i < s.factors.size(); ++i) {
        double g = s.amplitude * grad[i];
        if (g != 0.0) {
          add += g * jac.row(s.factors[i].first);
          any = true;
        }
      }
      if (any) jac.row(s.target) += add;
      if (disp != 0.0) x[s.target] = wrap_unit(x[s.target] + wrap_signed(disp));
      return;
    }
    case 6: {
      const auto& s = std::get<TwistNode>(n.v).spec;
      const double a = s.aspect;
      double d0 = twist_offset(x[s.first] - s.center_first, s.period);
      double d1 = wrap_signed(x[s.second] - s.center_second);
      double z0 = d0 / a, z1 = d1 * a;
      double r = std::hypot(z0, z1);
      auto rad = plateau_bump(r, s.radius, s.plateau);
      if (rad.value == 0.0 && rad.deriv == 0.0) return;
      std::array<double, 8> grad{};
      double fp = factor_product_grad(s.factors, x, grad);
      double theta = s.amplitude * rad.value * fp;
      double c = std::cos(theta), sn = std::sin(theta);
      // d y'/d theta
      double e0 = a * (-sn * z0 - c * z1);
      double e1 = (c * z0 - sn * z1) / a;
      // gradient of theta: radial part and factor part
      double gr0 = 0.0, gr1 = 0.0;
      if (r > 0.0 && rad.deriv != 0.0) {
        double k = s.amplitude * fp * rad.deriv / r;
        gr0 = k * z0 / a;
        gr1 = k * z1 * a;
      }
      using Row = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxDim>;
      Row gtheta = gr0 * jac.row(s.first) + gr1 * jac.row(s.second);
      for (std::size_t i = 0; i < s.factors.size(); ++i) {
        double g = s.amplitude * rad.value * grad[i];
        if (g != 0.0) gtheta += g * jac.row(s.factors[i].first);
      }
      Row r0 = c * jac.row(s.first) - sn * a * a * jac.row(s.second) + e0 * gtheta;
      Row r1 = sn / (a * a) * jac.row(s.first) + c * jac.row(s.second) + e1 * gtheta;
      jac.row(s.first) = r0;
      jac.row(s.second) = r1;
      if (theta != 0.0) {
        x[s.first] = wrap_unit(x[s.first] + (a * (c * z0 - sn * z1) - d0));
        x[s.second] = wrap_unit(x[s.second] + ((sn * z0 + c * z1) / a - d1));
      }
      return;
    }
  }
}

TorusPoint MapExpr::eval(const TorusPoint& x) const {
  if (x.dim() != dim())
    throw DimensionError("eval: point has dimension " + std::to_string(x.dim()) + ", map has " +
                         std::to_string(dim()));
  Vec v = x.coords();
  apply(v);
  return TorusPoint(v);
}

std::pair<TorusPoint, Mat> MapExpr::eval_with_jacobian(const TorusPoint& x) const {
  if (x.dim() != dim())
    throw DimensionError("jacobian: point has dimension " + std::to_string(x.dim()) + ", map has " +
                         std::to_string(dim()));
  Vec v = x.coords();
  Mat j = Mat::Identity(dim(), dim());
  apply_with_jacobian(v, j);
  return {TorusPoint(v), j};
}

JacobianMatrix MapExpr::jacobian(const TorusPoint& x) const {
  auto [y, j] = eval_with_jacobian(x);
  return {x, j};
}

MapExpr MapExpr::inverse() const {
  const Node& n = *node_;
  switch (n.v.index()) {
    case 0:
      return *this;
    case 1:
      return linear(integer_inverse(std::get<LinearNode>(n.v).m));
    case 2:
      return translation(-std::get<TranslationNode>(n.v).offset);
    case 3: {
      const auto& p = std::get<ProductNode>(n.v);
      return product(p.a.inverse(), p.b.inverse());
    }
    case 4: {
      const auto& c = std::get<ComposeNode>(n.v);
      return compose(c.inner.inverse(), c.outer.inverse());
    }
    case 5: {
      ShearSpec s = std::get<ShearNode>(n.v).spec;
      s.amplitude = -s.amplitude;
      return shear(std::move(s));
    }
    case 6: {
      TwistSpec s = std::get<TwistNode>(n.v).spec;
      s.amplitude = -s.amplitude;
      return twist(std::move(s));
    }
  }
  throw std::logic_error("inverse: unknown node");
}

std::string MapExpr::describe() const {
  std::ostringstream os;
  const Node& n = *node_;
  switch (n.v.index()) {
    case 0:
      os << "Id" << n.dim;
      break;
    case 1: {
      const auto& m = std::get<LinearNode>(n.v).m;
      os << "Linear[";
      for (int i = 0; i < m.rows(); ++i) {
        if (i) os << ";";
        for (int j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
      }
      os << "]";
      break;
    }
    case 2: {
      const auto& o = std::get<TranslationNode>(n.v).offset;
      os << "Translate(";
      for (int i = 0; i < o.size(); ++i) os << (i ? "," : "") << o[i];
      os << ")";
      break;
    }
    case 3: {
      const auto& p = std::get<ProductNode>(n.v);
      os << "(" << p.a.describe() << " x " << p.b.describe() << ")";
      break;
    }
    case 4: {
      const auto& c = std::get<ComposeNode>(n.v);
      os << c.outer.describe() << " o " << c.inner.describe();
      break;
    }
    case 5: {
      const auto& s = std::get<ShearNode>(n.v).spec;
      os << "Shear(x" << s.target << " += " << s.amplitude;
      for (const auto& [c, p] : s.factors) os << "*" << p.describe() << "[x" << c << "]";
      os << ")";
      break;
    }
    case 6: {
      const auto& s = std::get<TwistNode>(n.v).spec;
      os << "Twist(x" << s.first << ",x" << s.second << " about (" << s.center_first << "," << s.center_second
         << ") r<" << s.radius << " amp " << s.amplitude;
      if (s.aspect != 1.0) os << " aspect " << s.aspect;
      if (s.period > 0.0) os << " period " << s.period;
      for (const auto& [c, p] : s.factors) os << "*" << p.describe() << "[x" << c << "]";
      os << ")";
      break;
    }
  }
  return os.str();
}

double jacobian_fd_check(const MapExpr& map, const TorusPoint& x, double step) {
  if (!(step > 0.0 && step < 1e-3)) throw std::invalid_argument("jacobian_fd_check: step must lie in (0, 1e-3)");
  const int d = map.dim();
  double h = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(step))));
  Mat analytic = map.jacobian(x).matrix;
  double worst = 0.0;
  for (int k = 0; k < d; ++k) {
    Vec xp = x.coords(), xm = x.coords();
    xp[k] += h;
    xm[k] -= h;
    TorusPoint yp = map.eval(TorusPoint(xp));
    TorusPoint ym = map.eval(TorusPoint(xm));
    for (int i = 0; i < d; ++i) {
      double fd = wrap_signed(yp[i] - ym[i]) / (2.0 * h);
      double a = analytic(i, k);
      double err = std::abs(fd - a) / std::max(1.0, std::abs(a));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

std::vector<TorusPoint> iterate(const MapExpr& map, const TorusPoint& x, int n) {
  if (n < 0) throw std::invalid_argument("iterate: n must be non-negative");
  std::vector<TorusPoint> orbit;
  orbit.reserve(static_cast<std::size_t>(n));
  for_each_orbit_point(map, x, n, [&](int, const TorusPoint& p) { orbit.push_back(p); });
  return orbit;
}

void for_each_orbit_point(const MapExpr& map, const TorusPoint& x, int n,
                          const std::function<void(int, const TorusPoint&)>& visit) {
  if (n < 0) throw std::invalid_argument("iterate: n must be non-negative");
  if (x.dim() != map.dim()) throw DimensionError("iterate: dimension mismatch");
  Vec v = x.coords();
  for (int k = 0; k < n; ++k) {
    visit(k, TorusPoint(v));
    if (k + 1 < n) map.apply(v);
  }
}

std::vector<TorusPoint> fixed_points_of_linear(const IntMat& matrix) {
  const int d = static_cast<int>(matrix.rows());
  if (d != matrix.cols() || d < 1 || d > 4) throw DimensionError("fixed_points_of_linear: need square matrix, d <= 4");
  long long det = int_determinant(matrix);
  if (det != 1 && det != -1) throw std::invalid_argument("fixed_points_of_linear: determinant must be +-1");
  IntMat b = matrix - IntMat::Identity(d, d);
  long long D = std::llabs(int_determinant(b));
  if (D == 0) throw std::invalid_argument("fixed_points_of_linear: A - I is singular; fixed set is not finite");
  // Every solution has coordinates in (1/D)Z; enumerate the D^d candidates j/D
  // and keep those with (A - I) j = 0 mod D.
  long long total = 1;
  for (int i = 0; i < d; ++i) {
    total *= D;
    if (total > 50'000'000) throw std::invalid_argument("fixed_points_of_linear: too many candidates");
  }
  std::vector<TorusPoint> out;
  Eigen::Matrix<long long, Eigen::Dynamic, 1, 0, kMaxDim, 1> j(d);
  for (long long idx = 0; idx < total; ++idx) {
    long long t = idx;
    for (int i = d - 1; i >= 0; --i) {
      j[i] = t % D;
      t /= D;
    }
    auto r = (b * j).eval();
    bool ok = true;
    for (int i = 0; i < d && ok; ++i) ok = (r[i] % D) == 0;
    if (ok) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v[i] = static_cast<double>(j[i]) / static_cast<double>(D);
      out.emplace_back(v);
    }
  }
  return out;
}

}  // namespace nuhlab
