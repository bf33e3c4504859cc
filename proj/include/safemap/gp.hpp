#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "safemap/types.hpp"

namespace safemap {

/// Squared-exponential kernel hyperparameters. `noise_var` is the regression
/// nugget added to the Gram diagonal.
struct KernelParams {
  double alpha = 1.0;
  double length_scale = 0.15;
  double noise_var = 1e-4;

  void validate() const;
  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

double kernel(const KernelParams& params, const Point& a, const Point& b);

Eigen::MatrixXd gram(const KernelParams& params, std::span<const Point> points);
Eigen::MatrixXd cross_kernel(const KernelParams& params, std::span<const Point> rows,
                             std::span<const Point> cols);

struct Dataset {
  PointList locations;
  std::vector<double> values;

  std::size_t size() const { return locations.size(); }
  void add(const Point& x, double y) {
    locations.push_back(x);
    values.push_back(y);
  }
};

struct Posterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;

  std::size_t size() const { return static_cast<std::size_t>(mean.size()); }
};

/// Incrementally grown Cholesky factor of K + (noise_var + jitter) I.
///
/// Each `add` appends one row to the factor. Every `kRefactorInterval` adds the
/// factor is rebuilt from scratch. If a factorization fails the diagonal jitter
/// escalates from 1e-10 to 1e-6 and the whole factor is rebuilt with it.
class CholeskyGram {
 public:
  static constexpr int kRefactorInterval = 64;

  explicit CholeskyGram(KernelParams params);

  /// Appends a location. Returns true if the factor was rebuilt from scratch.
  bool add(const Point& x);

  std::size_t size() const { return points_.size(); }
  const PointList& points() const { return points_; }
  const KernelParams& params() const { return params_; }
  double jitter() const { return jitter_; }

  /// Lower-triangular factor, size() x size().
  auto factor() const { return factor_.topLeftCorner(size(), size()); }

  /// Solves L z = rhs in place (rhs has size() rows).
  void solve_lower_in_place(Eigen::Ref<Eigen::MatrixXd> rhs) const;

  /// log det(K + nugget I) from the factor.
  double log_det() const;

 private:
  void refactor();
  void reserve(std::size_t n);

  KernelParams params_;
  PointList points_;
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
  int adds_since_refactor_ = 0;
};

/// GP conditioned on a growing dataset; answers arbitrary posterior queries.
class GpModel {
 public:
  explicit GpModel(KernelParams params);

  void add(const Point& x, double y);
  const Dataset& data() const { return data_; }
  const KernelParams& params() const { return gram_.params(); }
  const CholeskyGram& gram() const { return gram_; }

  Posterior posterior(std::span<const Point> queries) const;
  Eigen::MatrixXd posterior_covariance(std::span<const Point> queries) const;

 private:
  Eigen::MatrixXd whitened_cross(std::span<const Point> queries) const;
  Eigen::VectorXd whitened_values() const;

  Dataset data_;
  CholeskyGram gram_;
};

/// Posterior over a fixed query set, updated in O(t * M) per new measurement.
///
/// Keeps W = K(Q, X) L^-T (M x t) and w = L^-1 y, so that mean = W w and
/// variance = alpha^2 - rowwise |W|^2.
class GridPosterior {
 public:
  GridPosterior(KernelParams params, PointList queries);

  void add(const Point& x, double y);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& variance() const { return variance_; }
  Posterior snapshot() const { return {mean_, variance_}; }
  std::size_t steps() const { return gram_.size(); }
  const PointList& queries() const { return queries_; }
  const CholeskyGram& gram() const { return gram_; }

 private:
  void rebuild();

  PointList queries_;
  CholeskyGram gram_;
  std::vector<double> values_;
  Eigen::MatrixXd whitened_;  // M x capacity
  Eigen::VectorXd whitened_values_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd variance_;
};

/// Eqs. for mean/variance via a fresh SPD solve. Empty data gives the prior.
Posterior posterior(const KernelParams& params, const Dataset& data,
                    std::span<const Point> queries);

/// K** - K*t (Ktt + s^2 I)^-1 K*t^T, symmetrized.
Eigen::MatrixXd posterior_covariance_matrix(const KernelParams& params, const Dataset& data,
                                            std::span<const Point> queries);

/// 0.5 * log det(I + K / noise_var) in nats; 0 for an empty set.
double mutual_information(const KernelParams& params, std::span<const Point> locations);

}  // namespace safemap
