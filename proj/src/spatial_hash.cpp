#include "safemap/spatial_hash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "safemap/errors.hpp"

namespace safemap {

SpatialHash::SpatialHash(const Bounds& bounds, double cell_size) : bounds_(bounds), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw ArgumentError("spatial hash cell size must be > 0");
  for (int a = 0; a < 3; ++a) {
    dims_[a] = a < bounds.dimension
                   ? std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                                   std::ceil(bounds.extent(a) / cell_size)))
                   : 1;
  }
}

std::array<std::int64_t, 3> SpatialHash::cell_of(const Point& p) const {
  std::array<std::int64_t, 3> c{0, 0, 0};
  for (int a = 0; a < bounds_.dimension; ++a) {
    auto i = static_cast<std::int64_t>(std::floor((p[a] - bounds_.min[a]) / cell_));
    c[a] = std::clamp<std::int64_t>(i, 0, dims_[a] - 1);
  }
  return c;
}

SpatialHash::Key SpatialHash::key(const std::array<std::int64_t, 3>& c) const {
  return c[0] + dims_[0] * (c[1] + dims_[1] * c[2]);
}

void SpatialHash::insert(std::size_t id, const Point& p) {
  if (id >= points_.size()) points_.resize(id + 1, Point::Constant(std::nan("")));
  points_[id] = p;
  buckets_[key(cell_of(p))].push_back(id);
}

std::size_t SpatialHash::nearest(const Point& q) const {
  if (buckets_.empty()) throw ArgumentError("nearest query on empty spatial hash");
  const auto c = cell_of(q);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_id = std::numeric_limits<std::size_t>::max();
  const std::int64_t max_ring = std::max({dims_[0], dims_[1], dims_[2]});
  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    // Every point outside the visited rings is at least (ring) * cell away
    // from q along some axis, less the offset of q inside its own cell.
    if (best_id != std::numeric_limits<std::size_t>::max() &&
        static_cast<double>(ring - 1) * cell_ > std::sqrt(best)) {
      break;
    }
    const std::int64_t zr = bounds_.dimension == 3 ? ring : 0;
    for (std::int64_t dz = -zr; dz <= zr; ++dz) {
      for (std::int64_t dy = -ring; dy <= ring; ++dy) {
        for (std::int64_t dx = -ring; dx <= ring; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          const std::array<std::int64_t, 3> cc{c[0] + dx, c[1] + dy, c[2] + dz};
          if (cc[0] < 0 || cc[1] < 0 || cc[2] < 0 || cc[0] >= dims_[0] || cc[1] >= dims_[1] ||
              cc[2] >= dims_[2]) {
            continue;
          }
          const auto it = buckets_.find(key(cc));
          if (it == buckets_.end()) continue;
          for (std::size_t id : it->second) {
            const double d2 = (points_[id] - q).squaredNorm();
            if (d2 < best || (d2 == best && id < best_id)) {
              best = d2;
              best_id = id;
            }
          }
        }
      }
    }
  }
  return best_id;
}

std::vector<std::size_t> SpatialHash::within(const Point& q, double radius) const {
  std::vector<std::size_t> out;
  std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < bounds_.dimension; ++a) {
    lo[a] = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor((q[a] - radius - bounds_.min[a]) / cell_)), 0,
        dims_[a] - 1);
    hi[a] = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor((q[a] + radius - bounds_.min[a]) / cell_)), 0,
        dims_[a] - 1);
  }
  const double r2 = radius * radius;
  for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
    for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
      for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
        const auto it = buckets_.find(key({x, y, z}));
        if (it == buckets_.end()) continue;
        for (std::size_t id : it->second) {
          if ((points_[id] - q).squaredNorm() <= r2) out.push_back(id);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace safemap
