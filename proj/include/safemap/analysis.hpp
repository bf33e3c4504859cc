#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "safemap/episode.hpp"
#include "safemap/field.hpp"
#include "safemap/gp.hpp"
#include "safemap/safety.hpp"

namespace safemap {

struct InfoGain {
  double nats = 0.0;
  Eigen::VectorXd spectrum;  // eigenvalues of K, ascending
};

/// 0.5 * sum ln(1 + lambda_i / noise_var) over the eigenvalues of K.
InfoGain info_gain_eigen(const KernelParams& params, std::span<const Point> locations);

struct InfoReport {
  double gamma_g = 0.0;
  double gamma_s = 0.0;
  double delta_gamma = 0.0;
  Eigen::VectorXd eig_g;
  Eigen::VectorXd eig_s;
  double lower_bound_ratio = 0.0;  // (gamma_s / gamma_g) (1 - 1/e)
  std::optional<double> gamma_o;   // only filled by callers that enumerate subsets
};

/// Information lost by executing `executed` instead of the greedy set. Both
/// sets are put in a canonical order first, so equal sets give exactly zero.
InfoReport info_loss(const KernelParams& params, std::span<const Point> greedy,
                     std::span<const Point> executed);

struct ConvergenceReport {
  bool event_held = true;
  std::size_t event_violations = 0;  // (step, node) pairs outside the confidence band
  std::optional<int> first_event_violation;
  std::size_t soundness_violations = 0;  // certified nodes with f > f_bar
  std::vector<int> first_certified;      // T_x per grid node, -1 if never
  std::size_t persistence_breaks = 0;    // certified nodes that later lost certification
  std::vector<std::size_t> interior;     // X^{s,*,eta}
  std::size_t interior_breaks = 0;       // interior nodes that ever lost certification
  std::optional<int> t_star;             // empty if X^{s,*,eta} is empty or not all certified
  std::optional<int> settled;            // from this step on every interior node stays certified
  int horizon = 0;
  double eta = 0.0;

  /// Soundness is only meaningful on runs where the event held.
  bool sound() const { return event_held && soundness_violations == 0; }
};

/// Replays the safety map from posterior snapshots. Snapshot s (posterior
/// after s measurements) yields the map of step s + 1 with beta_{s+1}.
ConvergenceReport convergence_audit(std::span<const Snapshot> snapshots, const FieldSpec& field,
                                    const ConfidenceSchedule& schedule, const TestGrid& grid,
                                    double f_bar, double eta);

struct RmsePoint {
  int step = 0;
  double rmse = 0.0;
};

/// Root-mean-square error of the posterior mean against the field over the
/// truly safe grid nodes, one value per snapshot.
std::vector<RmsePoint> rmse_series(std::span<const Snapshot> snapshots, const FieldSpec& field,
                                   const TestGrid& grid, double f_bar);

}  // namespace safemap
