#include "safemap/types.hpp"

#include <string>

#include "safemap/errors.hpp"

namespace safemap {

bool Bounds::contains(const Point& x, double tol) const {
  for (int a = 0; a < dimension; ++a) {
    const double slack = tol * std::max(1.0, extent(a));
    if (x[a] < min[a] - slack || x[a] > max[a] + slack) return false;
  }
  for (int a = dimension; a < 3; ++a) {
    if (x[a] != 0.0) return false;
  }
  return true;
}

double Bounds::diagonal() const { return (max - min).head(dimension).norm(); }

void Bounds::validate() const {
  if (dimension != 2 && dimension != 3) {
    throw ArgumentError("bounds dimension must be 2 or 3, got " + std::to_string(dimension));
  }
  for (int a = 0; a < dimension; ++a) {
    if (!(min[a] < max[a])) {
      throw ArgumentError("degenerate bounds on axis " + std::to_string(a));
    }
  }
}

}  // namespace safemap
