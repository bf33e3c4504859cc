#pragma once

#include <vector>

#include "safemap/safety.hpp"
#include "safemap/types.hpp"

namespace safemap {

struct Region {
  Point center = Point::Zero();
  double radius = 0.0;
  int support = 0;  // accumulator votes (2D) or voxel count (3D)
};

/// Union of closed balls estimating the unsafe set at one step.
struct DetectedRegionSet {
  std::vector<Region> regions;
  int step = 0;

  std::size_t count() const { return regions.size(); }
};

struct HoughParams {
  double radius_min = 0.05;
  double radius_max = 0.15;
  double radius_step = 0.0;            // 0 selects one grid cell
  double accumulator_threshold = 0.5;  // fraction of the ideal vote count
  double annulus_width = 2.0;          // voting band, in cells
  // Blobs up to this radius are still located; their reported radius is
  // clamped to radius_max. 0 selects 2 * radius_max.
  double search_radius_max = 0.0;

  void validate() const;
  friend bool operator==(const HoughParams&, const HoughParams&) = default;
};

struct ComponentParams {
  double radius_min = 0.0;
  // Components whose bounding radius exceeds this are treated as unexplored
  // space rather than a hazard and are not reported.
  double radius_max = 1e300;
  int min_voxels = 8;

  void validate() const;
  friend bool operator==(const ComponentParams&, const ComponentParams&) = default;
};

/// Circular Hough transform over the boundary of the unsafe bit region.
///
/// Boundary cells (unsafe cells with a safe 4-neighbor) vote into a
/// (cx, cy, r) accumulator. A boundary cell supports radius bin R when its
/// distance to the candidate center lies in (R - annulus_width, R] cells; the
/// ideal vote count is the number of boundary cells of a rasterized disk of
/// radius R, all of which lie within one cell of R. Local
/// maxima above threshold whose disk is mostly unsafe are refined with a
/// least-squares circle fit, then suppressed when their center falls inside an
/// already accepted circle. A refined detection's votes are recounted around
/// the fitted sub-cell circle (keeping the larger count). Output is sorted by
/// votes, descending.
DetectedRegionSet detect_2d(const BinarySafetyMap& map, const TestGrid& grid,
                            const HoughParams& params);

/// 6-connected components of unsafe voxels, each bounded by a sphere around
/// its centroid (max voxel distance plus half a voxel diagonal).
DetectedRegionSet detect_3d(const BinarySafetyMap& map, const TestGrid& grid,
                            const ComponentParams& params);

/// True iff x lies in some closed ball of the set.
bool classify_unsafe(const DetectedRegionSet& regions, const Point& x);

}  // namespace safemap
