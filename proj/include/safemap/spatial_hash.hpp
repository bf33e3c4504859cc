#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "safemap/types.hpp"

namespace safemap {

/// Uniform bucket grid over points; nearest and radius queries are exact.
class SpatialHash {
 public:
  SpatialHash(const Bounds& bounds, double cell_size);

  void insert(std::size_t id, const Point& p);
  std::size_t size() const { return points_.size(); }
  const Point& point(std::size_t id) const { return points_[id]; }

  /// Nearest stored id (lowest id on exact ties). Requires size() > 0.
  std::size_t nearest(const Point& q) const;
  /// All ids with |p - q| <= radius, ascending.
  std::vector<std::size_t> within(const Point& q, double radius) const;

 private:
  using Key = std::int64_t;
  std::array<std::int64_t, 3> cell_of(const Point& p) const;
  Key key(const std::array<std::int64_t, 3>& c) const;

  Bounds bounds_;
  double cell_;
  std::array<std::int64_t, 3> dims_{};
  std::vector<Point> points_;  // indexed by id
  std::unordered_map<Key, std::vector<std::size_t>> buckets_;
};

}  // namespace safemap
