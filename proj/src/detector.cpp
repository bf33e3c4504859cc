#include "safemap/detector.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/Dense>

#include "safemap/errors.hpp"

namespace safemap {

void HoughParams::validate() const {
  if (!(radius_min > 0.0 && radius_min < radius_max)) {
    throw ArgumentError("Hough radius range must satisfy 0 < radius_min < radius_max");
  }
  if (radius_step < 0.0) throw ArgumentError("Hough radius_step must be > 0");
  if (!(accumulator_threshold > 0.0 && accumulator_threshold <= 1.0)) {
    throw ArgumentError("Hough accumulator_threshold must lie in (0, 1]");
  }
  if (!(annulus_width >= 1.0)) throw ArgumentError("Hough annulus_width must be >= 1 cell");
  if (search_radius_max != 0.0 && search_radius_max < radius_max) {
    throw ArgumentError("Hough search_radius_max must be >= radius_max");
  }
}

void ComponentParams::validate() const {
  if (radius_min < 0.0 || !(radius_max > radius_min)) {
    throw ArgumentError("component radius bounds must satisfy 0 <= radius_min < radius_max");
  }
  if (min_voxels < 1) throw ArgumentError("min_voxels must be >= 1");
}

namespace {

struct Offset {
  int dx;
  int dy;
};

struct Candidate {
  int votes;
  int bin;
  int cx;
  int cy;
};

struct CircleFit {
  double cx;
  double cy;
  double r;
  bool ok;
};

// Algebraic least-squares circle fit: x^2 + y^2 + D x + E y + F = 0.
CircleFit fit_circle(const std::vector<Offset>& cells) {
  if (cells.size() < 8) return {0, 0, 0, false};
  Eigen::MatrixXd a(cells.size(), 3);
  Eigen::VectorXd b(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double x = cells[i].dx, y = cells[i].dy;
    a(i, 0) = x;
    a(i, 1) = y;
    a(i, 2) = 1.0;
    b[i] = -(x * x + y * y);
  }
  const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
  const double cx = -0.5 * s[0], cy = -0.5 * s[1];
  const double r2 = cx * cx + cy * cy - s[2];
  if (!(r2 > 0.0)) return {0, 0, 0, false};
  return {cx, cy, std::sqrt(r2), true};
}

}  // namespace

DetectedRegionSet detect_2d(const BinarySafetyMap& map, const TestGrid& grid,
                            const HoughParams& params) {
  params.validate();
  if (grid.dimension() != 2) throw ArgumentError("detect_2d needs a 2D grid");
  if (map.bits.size() != grid.size()) throw ArgumentError("map does not match grid");
  const int nx = grid.shape()[0], ny = grid.shape()[1];
  if (nx < 2 || ny < 2) throw ArgumentError("detect_2d needs at least 2 nodes per axis");
  const double cell = grid.spacing(0);
  if (std::abs(grid.spacing(1) - cell) > 1e-9 * cell) {
    throw ArgumentError("detect_2d needs square grid cells");
  }

  DetectedRegionSet out;
  out.step = map.step;
  auto bit = [&](int x, int y) { return map.bits[grid.index(x, y)] != 0; };

  std::vector<Offset> boundary;
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (!bit(x, y)) continue;
      const bool edge = (x > 0 && !bit(x - 1, y)) || (x + 1 < nx && !bit(x + 1, y)) ||
                        (y > 0 && !bit(x, y - 1)) || (y + 1 < ny && !bit(x, y + 1));
      if (edge) boundary.push_back({x, y});
    }
  }
  if (boundary.empty()) return out;

  const double step = params.radius_step > 0.0 ? params.radius_step / cell : 1.0;
  const double search_max =
      (params.search_radius_max > 0.0 ? params.search_radius_max : 2.0 * params.radius_max) /
      cell;
  std::vector<double> bins;
  for (double r = params.radius_min / cell; r <= search_max + 1e-9; r += step) bins.push_back(r);
  if (bins.empty()) return out;

  // Annulus offsets and ideal vote counts per radius bin.
  std::vector<std::vector<Offset>> annulus(bins.size());
  std::vector<int> ideal(bins.size(), 0);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const double R = bins[k];
    const int span = static_cast<int>(std::ceil(R)) + 1;
    auto inside = [R](int dx, int dy) { return std::hypot(dx, dy) <= R; };
    for (int dy = -span; dy <= span; ++dy) {
      for (int dx = -span; dx <= span; ++dx) {
        const double d = std::hypot(dx, dy);
        if (d > R - params.annulus_width && d <= R) annulus[k].push_back({dx, dy});
        if (inside(dx, dy) && (!inside(dx - 1, dy) || !inside(dx + 1, dy) ||
                               !inside(dx, dy - 1) || !inside(dx, dy + 1))) {
          ++ideal[k];
        }
      }
    }
  }

  const std::size_t plane = static_cast<std::size_t>(nx) * ny;
  std::vector<int> acc(bins.size() * plane, 0);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    int* slice = acc.data() + k * plane;
    for (const auto& p : boundary) {
      for (const auto& o : annulus[k]) {
        const int cx = p.dx + o.dx, cy = p.dy + o.dy;
        if (cx < 0 || cy < 0 || cx >= nx || cy >= ny) continue;
        ++slice[static_cast<std::size_t>(cy) * nx + cx];
      }
    }
  }

  auto at = [&](int k, int x, int y) {
    return acc[static_cast<std::size_t>(k) * plane + static_cast<std::size_t>(y) * nx + x];
  };
  auto unsafe_fraction = [&](int cx, int cy, double R) {
    int total = 0, unsafe = 0;
    const int span = static_cast<int>(std::ceil(R));
    for (int y = std::max(0, cy - span); y <= std::min(ny - 1, cy + span); ++y) {
      for (int x = std::max(0, cx - span); x <= std::min(nx - 1, cx + span); ++x) {
        if (std::hypot(x - cx, y - cy) > R) continue;
        ++total;
        unsafe += bit(x, y) ? 1 : 0;
      }
    }
    return total > 0 ? static_cast<double>(unsafe) / total : 0.0;
  };

  std::vector<Candidate> candidates;
  const int nbins = static_cast<int>(bins.size());
  for (int k = 0; k < nbins; ++k) {
    const double floor_votes = params.accumulator_threshold * ideal[k];
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        const int v = at(k, x, y);
        if (v == 0 || v < floor_votes) continue;
        bool peak = true;
        // Plateaus resolve to their first cell in (bin, y, x) order.
        for (int dk = -1; dk <= 1 && peak; ++dk) {
          for (int dy = -1; dy <= 1 && peak; ++dy) {
            for (int dx = -1; dx <= 1 && peak; ++dx) {
              if (dk == 0 && dy == 0 && dx == 0) continue;
              const int kk = k + dk, yy = y + dy, xx = x + dx;
              if (kk < 0 || kk >= nbins || yy < 0 || yy >= ny || xx < 0 || xx >= nx) continue;
              const int w = at(kk, xx, yy);
              const bool earlier = std::tie(kk, yy, xx) < std::tie(k, y, x);
              if (w > v || (earlier && w == v)) peak = false;
            }
          }
        }
        if (!peak) continue;
        // Bright polarity: the disk must be an unsafe blob, not a safe hole.
        if (!bit(x, y) || unsafe_fraction(x, y, bins[k]) < 0.5) continue;
        candidates.push_back({v, k, x, y});
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.votes > b.votes; });

  std::vector<std::pair<Point, double>> extents;
  for (const auto& c : candidates) {
    const double R = bins[c.bin];
    std::vector<Offset> support;
    for (const auto& p : boundary) {
      const double d = std::hypot(p.dx - c.cx, p.dy - c.cy);
      if (d > R - params.annulus_width - 0.5 && d <= R + 0.5) support.push_back(p);
    }
    double cx = c.cx, cy = c.cy, r = R;
    int votes = c.votes;
    const auto fit = fit_circle(support);
    if (fit.ok && std::hypot(fit.cx - c.cx, fit.cy - c.cy) <= 2.0 && std::abs(fit.r - R) <= 2.0) {
      cx = fit.cx;
      cy = fit.cy;
      // Boundary cells sit inside the blob edge; the farthest supporter
      // tracks the true edge to within a fraction of a cell.
      double far = 0.0;
      for (const auto& p : support) far = std::max(far, std::hypot(p.dx - cx, p.dy - cy));
      r = far;
      // votes recounted at the sub-cell circle
      int refined = 0;
      for (const auto& p : boundary) {
        const double d = std::hypot(p.dx - cx, p.dy - cy);
        if (d > r - params.annulus_width && d <= r) ++refined;
      }
      votes = std::max(votes, refined);
    }
    Region region;
    region.center = Point(grid.bounds().min[0] + cx * cell, grid.bounds().min[1] + cy * cell, 0.0);
    region.radius = std::clamp(r * cell, params.radius_min, params.radius_max);
    region.support = votes;
    // Suppression uses the fitted extent, so an oversized blob reported at
    // radius_max still absorbs the smaller arcs found inside it.
    const Point center = region.center;
    const bool suppressed = std::any_of(extents.begin(), extents.end(), [&](const auto& a) {
      return distance(a.first, center) <= a.second;
    });
    if (suppressed) continue;
    out.regions.push_back(region);
    extents.emplace_back(center, std::max(region.radius, r * cell));
  }
  std::stable_sort(out.regions.begin(), out.regions.end(),
                   [](const Region& a, const Region& b) { return a.support > b.support; });
  return out;
}

DetectedRegionSet detect_3d(const BinarySafetyMap& map, const TestGrid& grid,
                            const ComponentParams& params) {
  params.validate();
  if (grid.dimension() != 3) throw ArgumentError("detect_3d needs a 3D grid");
  if (map.bits.size() != grid.size()) throw ArgumentError("map does not match grid");
  const auto& shape = grid.shape();
  const double half_diag =
      0.5 * std::sqrt(grid.spacing(0) * grid.spacing(0) + grid.spacing(1) * grid.spacing(1) +
                      grid.spacing(2) * grid.spacing(2));

  DetectedRegionSet out;
  out.step = map.step;
  std::vector<int> label(grid.size(), -1);
  std::vector<std::size_t> members;
  std::deque<std::size_t> queue;
  struct Found {
    Region region;
    std::size_t first;
  };
  std::vector<Found> found;
  int next_label = 0;

  for (std::size_t seed = 0; seed < grid.size(); ++seed) {
    if (!map.bits[seed] || label[seed] >= 0) continue;
    members.clear();
    label[seed] = next_label;
    queue.push_back(seed);
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      members.push_back(v);
      const auto c = grid.cell(v);
      for (int axis = 0; axis < 3; ++axis) {
        for (int dir : {-1, 1}) {
          auto n = c;
          n[axis] += dir;
          if (n[axis] < 0 || n[axis] >= shape[axis]) continue;
          const auto u = grid.index(n[0], n[1], n[2]);
          if (map.bits[u] && label[u] < 0) {
            label[u] = next_label;
            queue.push_back(u);
          }
        }
      }
    }
    ++next_label;
    if (static_cast<int>(members.size()) < params.min_voxels) continue;
    Point centroid = Point::Zero();
    for (auto v : members) centroid += grid[v];
    centroid /= static_cast<double>(members.size());
    double far = 0.0;
    for (auto v : members) far = std::max(far, distance(grid[v], centroid));
    const double radius = far + half_diag;
    if (radius > params.radius_max) continue;
    found.push_back({Region{centroid, std::max(radius, params.radius_min),
                            static_cast<int>(members.size())},
                     seed});
  }
  std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
    return a.region.support > b.region.support;
  });
  for (auto& f : found) out.regions.push_back(f.region);
  return out;
}

bool classify_unsafe(const DetectedRegionSet& regions, const Point& x) {
  return std::any_of(regions.regions.begin(), regions.regions.end(),
                     [&](const Region& r) { return distance(x, r.center) <= r.radius; });
}

}  // namespace safemap
