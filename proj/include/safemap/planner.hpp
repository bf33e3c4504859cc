#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "safemap/gp.hpp"
#include "safemap/types.hpp"

namespace safemap {

enum class PointStatus { kPlanned, kVisited, kRelocated, kBlocked, kReinstated };

std::string to_string(PointStatus status);
std::optional<PointStatus> parse_point_status(const std::string& name);

struct PlanEntry {
  Point point = Point::Zero();
  PointStatus status = PointStatus::kPlanned;
  std::size_t origin = 0;         // index into the original MVS selection
  std::optional<Point> original;  // set once the entry has been relocated
};

/// Ordered measurement sequence with a visited prefix.
class MeasurementPlan {
 public:
  MeasurementPlan() = default;
  MeasurementPlan(std::vector<PlanEntry> entries, std::size_t budget);

  std::size_t budget() const { return budget_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t visited() const { return visited_; }
  const std::vector<PlanEntry>& entries() const { return entries_; }
  const PlanEntry& operator[](std::size_t i) const { return entries_[i]; }

  PointList points() const;

  /// Marks the next entry visited and returns its coordinate.
  const Point& visit_next();

  /// Moves an unvisited entry to `target`, remembering its first coordinate.
  void relocate(std::size_t index, const Point& target);
  /// Puts an unvisited relocated entry back on its original coordinate.
  void reinstate(std::size_t index);

 private:
  void require_future(std::size_t index) const;

  std::vector<PlanEntry> entries_;
  std::size_t budget_ = 0;
  std::size_t visited_ = 0;
};

/// Maximum-variance sampling over grid points. Conditioning uses zero
/// pseudo-values since only the posterior variance matters. Returns grid
/// indices in selection order; ties go to the lowest index. `conditioned`
/// points are folded into the model before the first pick.
std::vector<std::size_t> mvs_select(const KernelParams& params, std::span<const Point> grid,
                                    std::size_t budget,
                                    std::span<const Point> conditioned = {});

struct GreedyResult {
  std::vector<std::size_t> indices;  // selection order
  double gamma = 0.0;                // mutual information of the set, nats
};

/// Greedy mutual-information maximization by log-determinant increments.
GreedyResult greedy_info_gain(const KernelParams& params, std::span<const Point> grid,
                              std::size_t budget);

/// Nearest-neighbor tour from `start`; returns indices into `points`.
std::vector<std::size_t> nn_order(std::span<const Point> points, const Point& start);

/// Builds X_T^0: nearest-neighbor ordering of the MVS picks. `origin` of each
/// entry is its position in `selection`.
MeasurementPlan make_plan(std::span<const Point> grid, std::span<const std::size_t> selection,
                          const Point& start);

double tour_length(std::span<const Point> points, const Point& start);

}  // namespace safemap
