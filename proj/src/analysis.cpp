#include "safemap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "safemap/errors.hpp"

namespace safemap {

InfoGain info_gain_eigen(const KernelParams& params, std::span<const Point> locations) {
  params.validate();
  InfoGain out;
  if (locations.empty()) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram(params, locations),
                                                     Eigen::EigenvaluesOnly);
  out.spectrum = eig.eigenvalues();
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i) {
    out.nats += 0.5 * std::log1p(out.spectrum[i] / params.noise_var);
  }
  return out;
}

namespace {

PointList canonical(std::span<const Point> points) {
  PointList out(points.begin(), points.end());
  std::sort(out.begin(), out.end(), [](const Point& a, const Point& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  return out;
}

}  // namespace

InfoReport info_loss(const KernelParams& params, std::span<const Point> greedy,
                     std::span<const Point> executed) {
  if (greedy.size() != executed.size()) {
    throw ArgumentError("greedy and executed sets must have the same cardinality");
  }
  const auto g = info_gain_eigen(params, canonical(greedy));
  const auto s = info_gain_eigen(params, canonical(executed));
  InfoReport r;
  r.gamma_g = g.nats;
  r.gamma_s = s.nats;
  r.eig_g = g.spectrum;
  r.eig_s = s.spectrum;
  r.delta_gamma = r.gamma_g - r.gamma_s;
  r.lower_bound_ratio =
      r.gamma_g > 0.0 ? (r.gamma_s / r.gamma_g) * (1.0 - 1.0 / std::numbers::e) : 0.0;
  return r;
}

ConvergenceReport convergence_audit(std::span<const Snapshot> snapshots, const FieldSpec& field,
                                    const ConfidenceSchedule& schedule, const TestGrid& grid,
                                    double f_bar, double eta) {
  if (snapshots.empty()) throw ArgumentError("convergence audit needs posterior snapshots");
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (snapshots[i].posterior.size() != grid.size()) {
      throw ArgumentError("snapshot does not cover the grid");
    }
    if (i > 0 && snapshots[i].step <= snapshots[i - 1].step) {
      throw ArgumentError("snapshots must be in increasing step order");
    }
  }
  const std::size_t m = grid.size();
  std::vector<double> truth(m);
  for (std::size_t i = 0; i < m; ++i) truth[i] = eval_field(field, grid[i]);
  const double margin = schedule.lipschitz * grid.fill_distance();

  ConvergenceReport r;
  r.eta = eta;
  r.first_certified.assign(m, -1);
  r.horizon = snapshots.back().step + 1;
  std::vector<char> broke(m, 0);
  std::vector<int> last_uncertified(m, 0);
  for (const auto& snap : snapshots) {
    const int t = snap.step + 1;
    const double root_beta = std::sqrt(beta(schedule, m, t));
    const auto& mu = snap.posterior.mean;
    const auto& var = snap.posterior.variance;
    for (std::size_t i = 0; i < m; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double width = root_beta * std::sqrt(var[k]);
      if (std::abs(truth[i] - mu[k]) > width) {
        ++r.event_violations;
        if (!r.first_event_violation) r.first_event_violation = t;
      }
      const bool certified = mu[k] + width + margin <= f_bar;
      if (!certified) last_uncertified[i] = t;
      if (certified) {
        if (truth[i] > f_bar) ++r.soundness_violations;
        if (r.first_certified[i] < 0) r.first_certified[i] = t;
      } else if (r.first_certified[i] >= 0) {
        ++r.persistence_breaks;
        broke[i] = 1;
      }
    }
  }
  r.event_held = r.event_violations == 0;

  int worst = 0;
  int settle = 0;
  bool all_certified = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (truth[i] > f_bar - margin - eta) continue;
    r.interior.push_back(i);
    if (r.first_certified[i] < 0) all_certified = false;
    if (broke[i]) ++r.interior_breaks;
    settle = std::max(settle, last_uncertified[i] + 1);
    worst = std::max(worst, r.first_certified[i]);
  }
  if (!r.interior.empty() && all_certified) r.t_star = worst;
  if (!r.interior.empty() && settle <= r.horizon) r.settled = settle;
  return r;
}

std::vector<RmsePoint> rmse_series(std::span<const Snapshot> snapshots, const FieldSpec& field,
                                   const TestGrid& grid, double f_bar) {
  std::vector<std::size_t> safe;
  std::vector<double> truth;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = eval_field(field, grid[i]);
    if (f > f_bar) continue;
    safe.push_back(i);
    truth.push_back(f);
  }
  std::vector<RmsePoint> out;
  for (const auto& snap : snapshots) {
    if (snap.posterior.size() != grid.size()) throw ArgumentError("snapshot does not cover the grid");
    double sum = 0.0;
    for (std::size_t j = 0; j < safe.size(); ++j) {
      const double e = snap.posterior.mean[static_cast<Eigen::Index>(safe[j])] - truth[j];
      sum += e * e;
    }
    out.push_back({snap.step, safe.empty() ? 0.0 : std::sqrt(sum / safe.size())});
  }
  return out;
}

}  // namespace safemap
