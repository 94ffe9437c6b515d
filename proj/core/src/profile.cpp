#include "nuhlab/profile.hpp"

#include <sstream>

namespace nuhlab {

namespace {

// Smallest circle distance from point c to the closed arc [lo, hi] (lo <= hi).
double circle_distance_to_interval(double c, double lo, double hi) {
  if (hi - lo >= 1.0) return 0.0;
  double rel = wrap_unit(c - lo);
  double len = hi - lo;
  if (rel <= len) return 0.0;
  return std::min(rel - len, 1.0 - rel);
}

}  // namespace

bool Profile::vanishes_on(double lo, double hi) const {
  switch (kind) {
    case Kind::Constant:
      return a == 0.0;
    case Kind::Bump:
    case Kind::OddBump:
      return circle_distance_to_interval(a, lo, hi) >= b;
    case Kind::NotBump: {
      // Vanishes iff both ends sit in the plateau of the bump and the arc does
      // not leave it.
      double inner = c * b;
      if (hi - lo > 2.0 * inner) return false;
      return std::abs(wrap_signed(lo - a)) <= inner && std::abs(wrap_signed(hi - a)) <= inner &&
             wrap_signed(hi - a) >= wrap_signed(lo - a);
    }
    case Kind::Sine:
      return false;
    case Kind::Ramp:
      // Zero modulo integers before the start and after the end.
      return (lo >= 0.0 && hi <= a) || (lo >= b && hi <= 1.0);
  }
  return false;
}

std::string Profile::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant:
      os << a;
      break;
    case Kind::Bump:
      os << "bump(" << a << "," << b << "," << c << ")";
      break;
    case Kind::NotBump:
      os << "notbump(" << a << "," << b << "," << c << ")";
      break;
    case Kind::OddBump:
      os << "oddbump(" << a << "," << b << "," << c << ")";
      break;
    case Kind::Sine:
      os << "sin(" << n << "," << a << ")";
      break;
    case Kind::Ramp:
      os << "ramp(" << a << "," << b << "," << n << ")";
      break;
  }
  return os.str();
}

}  // namespace nuhlab
