#include "safemap/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "safemap/errors.hpp"

namespace safemap {

std::string to_string(PointStatus status) {
  switch (status) {
    case PointStatus::kPlanned: return "planned";
    case PointStatus::kVisited: return "visited";
    case PointStatus::kRelocated: return "relocated";
    case PointStatus::kBlocked: return "blocked";
    case PointStatus::kReinstated: return "reinstated";
  }
  return "planned";
}

std::optional<PointStatus> parse_point_status(const std::string& name) {
  for (auto s : {PointStatus::kPlanned, PointStatus::kVisited, PointStatus::kRelocated,
                 PointStatus::kBlocked, PointStatus::kReinstated}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

MeasurementPlan::MeasurementPlan(std::vector<PlanEntry> entries, std::size_t budget)
    : entries_(std::move(entries)), budget_(budget) {
  if (entries_.size() > budget_) throw ArgumentError("plan longer than its budget");
}

PointList MeasurementPlan::points() const {
  PointList out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.point);
  return out;
}

const Point& MeasurementPlan::visit_next() {
  if (visited_ >= entries_.size()) throw ArgumentError("plan already fully visited");
  entries_[visited_].status = PointStatus::kVisited;
  return entries_[visited_++].point;
}

void MeasurementPlan::require_future(std::size_t index) const {
  if (index < visited_ || index >= entries_.size()) {
    throw ArgumentError("visited plan entries are immutable");
  }
}

void MeasurementPlan::relocate(std::size_t index, const Point& target) {
  require_future(index);
  auto& e = entries_[index];
  if (!e.original) e.original = e.point;
  e.point = target;
  e.status = PointStatus::kRelocated;
}

void MeasurementPlan::reinstate(std::size_t index) {
  require_future(index);
  auto& e = entries_[index];
  if (!e.original) throw ArgumentError("only relocated entries can be reinstated");
  e.point = *e.original;
  e.original.reset();
  e.status = PointStatus::kReinstated;
}

namespace {

// First index whose value is within `tol` of the maximum over eligible entries.
template <class Value, class Eligible>
std::size_t argmax_lowest(std::size_t n, Value value, Eligible eligible, double tol) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (eligible(i)) best = std::max(best, value(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (eligible(i) && value(i) >= best - tol) return i;
  }
  return n;
}

constexpr double kTieTolerance = 1e-12;

}  // namespace

std::vector<std::size_t> mvs_select(const KernelParams& params, std::span<const Point> grid,
                                    std::size_t budget, std::span<const Point> conditioned) {
  params.validate();
  if (grid.empty()) throw ArgumentError("mvs_select needs a nonempty grid");
  if (budget > grid.size()) throw ArgumentError("budget exceeds grid size");

  GridPosterior post(params, PointList(grid.begin(), grid.end()));
  for (const auto& c : conditioned) post.add(c, 0.0);

  std::vector<char> chosen(grid.size(), 0);
  std::vector<std::size_t> picks;
  picks.reserve(budget);
  const double tol = kTieTolerance * params.alpha * params.alpha;
  for (std::size_t step = 0; step < budget; ++step) {
    const auto& var = post.variance();
    const auto i = argmax_lowest(
        grid.size(), [&](std::size_t k) { return var[static_cast<Eigen::Index>(k)]; },
        [&](std::size_t k) { return !chosen[k]; }, tol);
    chosen[i] = 1;
    picks.push_back(i);
    post.add(grid[i], 0.0);
  }
  return picks;
}

GreedyResult greedy_info_gain(const KernelParams& params, std::span<const Point> grid,
                              std::size_t budget) {
  params.validate();
  if (grid.empty()) throw ArgumentError("greedy_info_gain needs a nonempty grid");
  if (budget > grid.size()) throw ArgumentError("budget exceeds grid size");

  // Cholesky factor of A = I + K_S / s^2 over the chosen set S. The log-det gain
  // of adding x is ln of the Schur complement 1 + k(x,x)/s^2 - |L^-1 k_S(x)/s^2|^2.
  const double s2 = params.noise_var;
  GreedyResult out;
  std::vector<char> chosen(grid.size(), 0);
  Eigen::MatrixXd factor(budget, budget);
  factor.setZero();
  std::vector<double> gain(grid.size());

  for (std::size_t step = 0; step < budget; ++step) {
    const auto t = static_cast<Eigen::Index>(step);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (chosen[i]) continue;
      Eigen::VectorXd b(t);
      for (Eigen::Index j = 0; j < t; ++j) b[j] = kernel(params, grid[out.indices[j]], grid[i]) / s2;
      if (t > 0) factor.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(b);
      const double schur = 1.0 + kernel(params, grid[i], grid[i]) / s2 - b.squaredNorm();
      gain[i] = 0.5 * std::log(schur);
    }
    const auto pick = argmax_lowest(
        grid.size(), [&](std::size_t k) { return gain[k]; },
        [&](std::size_t k) { return !chosen[k]; }, kTieTolerance);

    Eigen::VectorXd b(t);
    for (Eigen::Index j = 0; j < t; ++j) b[j] = kernel(params, grid[out.indices[j]], grid[pick]) / s2;
    if (t > 0) factor.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(b);
    factor.row(t).head(t) = b.transpose();
    factor(t, t) = std::sqrt(1.0 + kernel(params, grid[pick], grid[pick]) / s2 - b.squaredNorm());
    out.gamma += gain[pick];
    chosen[pick] = 1;
    out.indices.push_back(pick);
  }
  return out;
}

std::vector<std::size_t> nn_order(std::span<const Point> points, const Point& start) {
  std::vector<std::size_t> order;
  order.reserve(points.size());
  std::vector<char> used(points.size(), 0);
  Point here = start;
  for (std::size_t step = 0; step < points.size(); ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (used[i]) continue;
      const double d2 = (points[i] - here).squaredNorm();
      if (d2 < best) {
        best = d2;
        pick = i;
      }
    }
    used[pick] = 1;
    order.push_back(pick);
    here = points[pick];
  }
  return order;
}

MeasurementPlan make_plan(std::span<const Point> grid, std::span<const std::size_t> selection,
                          const Point& start) {
  PointList picked;
  picked.reserve(selection.size());
  for (auto i : selection) picked.push_back(grid[i]);
  const auto order = nn_order(picked, start);
  std::vector<PlanEntry> entries;
  entries.reserve(order.size());
  for (auto k : order) entries.push_back(PlanEntry{picked[k], PointStatus::kPlanned, k, {}});
  return MeasurementPlan(std::move(entries), selection.size());
}

double tour_length(std::span<const Point> points, const Point& start) {
  double len = 0.0;
  Point here = start;
  for (const auto& p : points) {
    len += distance(here, p);
    here = p;
  }
  return len;
}

}  // namespace safemap
