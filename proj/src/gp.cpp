#include "safemap/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "safemap/errors.hpp"

namespace safemap {

namespace {

constexpr std::array<double, 5> kJitterLadder = {1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

double condition_estimate(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.size() == 0) return 1.0;
  const double lo = ev.minCoeff();
  return lo > 0.0 ? ev.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

// LLT of `a + jitter I`, escalating jitter from `start` along the ladder.
Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& a, double& jitter) {
  const auto n = a.rows();
  Eigen::LLT<Eigen::MatrixXd> llt;
  auto attempt = [&](double j) {
    llt.compute(a + j * Eigen::MatrixXd::Identity(n, n));
    return llt.info() == Eigen::Success;
  };
  if (attempt(jitter)) return llt;
  for (double j : kJitterLadder) {
    if (j <= jitter) continue;
    if (attempt(j)) {
      jitter = j;
      return llt;
    }
  }
  const double cond = condition_estimate(a);
  std::ostringstream msg;
  msg << "Gram factorization failed after jitter escalation to 1e-6 (condition estimate "
      << cond << ")";
  throw NumericalError(msg.str(), cond);
}

}  // namespace

void KernelParams::validate() const {
  if (!(alpha > 0.0)) throw ArgumentError("kernel alpha must be > 0");
  if (!(length_scale > 0.0)) throw ArgumentError("kernel length_scale must be > 0");
  if (!(noise_var > 0.0)) throw ArgumentError("kernel noise_var must be > 0");
}

double kernel(const KernelParams& p, const Point& a, const Point& b) {
  const double d2 = (a - b).squaredNorm();
  return p.alpha * p.alpha * std::exp(-d2 / (2.0 * p.length_scale * p.length_scale));
}

Eigen::MatrixXd gram(const KernelParams& p, std::span<const Point> pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = p.alpha * p.alpha;
    for (Eigen::Index j = 0; j < i; ++j) {
      k(i, j) = k(j, i) = kernel(p, pts[i], pts[j]);
    }
  }
  return k;
}

Eigen::MatrixXd cross_kernel(const KernelParams& p, std::span<const Point> rows,
                             std::span<const Point> cols) {
  Eigen::MatrixXd k(rows.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) k(i, j) = kernel(p, rows[i], cols[j]);
  }
  return k;
}

// ---------------------------------------------------------------------------

CholeskyGram::CholeskyGram(KernelParams params) : params_(params) { params_.validate(); }

void CholeskyGram::reserve(std::size_t n) {
  if (static_cast<Eigen::Index>(n) <= factor_.rows()) return;
  const auto cap = std::max<Eigen::Index>(16, std::max<Eigen::Index>(n, 2 * factor_.rows()));
  factor_.conservativeResize(cap, cap);
}

bool CholeskyGram::add(const Point& x) {
  const auto t = static_cast<Eigen::Index>(points_.size());
  points_.push_back(x);
  reserve(points_.size());
  ++adds_since_refactor_;
  if (adds_since_refactor_ >= kRefactorInterval) {
    refactor();
    return true;
  }
  const double diag = params_.alpha * params_.alpha + params_.noise_var + jitter_;
  Eigen::VectorXd l(t);
  for (Eigen::Index i = 0; i < t; ++i) l[i] = kernel(params_, points_[i], x);
  if (t > 0) factor_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(l);
  const double d2 = diag - l.squaredNorm();
  if (!(d2 > 1e-12 * diag)) {
    refactor();
    return true;
  }
  factor_.row(t).head(t) = l.transpose();
  factor_.col(t).head(t).setZero();
  factor_(t, t) = std::sqrt(d2);
  return false;
}

void CholeskyGram::refactor() {
  adds_since_refactor_ = 0;
  const auto n = static_cast<Eigen::Index>(points_.size());
  Eigen::MatrixXd a = gram(params_, points_);
  a.diagonal().array() += params_.noise_var;
  const auto llt = factorize_spd(a, jitter_);
  factor_.topLeftCorner(n, n) = llt.matrixL();
}

void CholeskyGram::solve_lower_in_place(Eigen::Ref<Eigen::MatrixXd> rhs) const {
  if (size() == 0) return;
  factor().triangularView<Eigen::Lower>().solveInPlace(rhs);
}

double CholeskyGram::log_det() const {
  return 2.0 * factor().diagonal().array().log().sum();
}

// ---------------------------------------------------------------------------

GpModel::GpModel(KernelParams params) : gram_(params) {}

void GpModel::add(const Point& x, double y) {
  data_.add(x, y);
  gram_.add(x);
}

Eigen::MatrixXd GpModel::whitened_cross(std::span<const Point> queries) const {
  Eigen::MatrixXd z = cross_kernel(params(), data_.locations, queries);
  gram_.solve_lower_in_place(z);
  return z;
}

Eigen::VectorXd GpModel::whitened_values() const {
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(data_.values.data(),
                                                         static_cast<Eigen::Index>(data_.size()));
  gram_.solve_lower_in_place(w);
  return w;
}

Posterior GpModel::posterior(std::span<const Point> queries) const {
  const double prior = params().alpha * params().alpha;
  const auto q = static_cast<Eigen::Index>(queries.size());
  Posterior out{Eigen::VectorXd::Zero(q), Eigen::VectorXd::Constant(q, prior)};
  if (data_.size() == 0) return out;
  const Eigen::MatrixXd z = whitened_cross(queries);
  out.mean = z.transpose() * whitened_values();
  out.variance = (prior - z.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  return out;
}

Eigen::MatrixXd GpModel::posterior_covariance(std::span<const Point> queries) const {
  Eigen::MatrixXd cov = safemap::gram(params(), queries);
  if (data_.size() == 0) return cov;
  const Eigen::MatrixXd z = whitened_cross(queries);
  cov.noalias() -= z.transpose() * z;
  return 0.5 * (cov + cov.transpose());
}

// ---------------------------------------------------------------------------

GridPosterior::GridPosterior(KernelParams params, PointList queries)
    : queries_(std::move(queries)), gram_(params) {
  const auto m = static_cast<Eigen::Index>(queries_.size());
  mean_ = Eigen::VectorXd::Zero(m);
  variance_ = Eigen::VectorXd::Constant(m, params.alpha * params.alpha);
}

void GridPosterior::add(const Point& x, double y) {
  values_.push_back(y);
  if (gram_.add(x)) {
    rebuild();
    return;
  }
  const auto t = static_cast<Eigen::Index>(gram_.size()) - 1;
  const auto m = static_cast<Eigen::Index>(queries_.size());
  if (whitened_.cols() <= t) {
    whitened_.conservativeResize(m, std::max<Eigen::Index>(16, 2 * whitened_.cols()));
    whitened_values_.conservativeResize(whitened_.cols());
  }
  const auto& kp = gram_.params();
  const auto fac = gram_.factor();
  const Eigen::VectorXd l = fac.row(t).head(t).transpose();
  const double d = fac(t, t);

  Eigen::VectorXd col(m);
  for (Eigen::Index i = 0; i < m; ++i) col[i] = kernel(kp, queries_[i], x);
  if (t > 0) col.noalias() -= whitened_.leftCols(t) * l;
  col /= d;
  const double w_new = (y - l.dot(whitened_values_.head(t))) / d;

  whitened_.col(t) = col;
  whitened_values_[t] = w_new;
  mean_ += w_new * col;
  variance_ = (variance_.array() - col.array().square()).max(0.0).matrix();
}

void GridPosterior::rebuild() {
  const auto t = static_cast<Eigen::Index>(gram_.size());
  const auto m = static_cast<Eigen::Index>(queries_.size());
  Eigen::MatrixXd z = cross_kernel(gram_.params(), gram_.points(), queries_);
  gram_.solve_lower_in_place(z);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(values_.data(), t);
  gram_.solve_lower_in_place(w);

  const auto cap = std::max<Eigen::Index>(std::max<Eigen::Index>(16, whitened_.cols()), 2 * t);
  whitened_.resize(m, cap);
  whitened_values_.resize(cap);
  whitened_.leftCols(t) = z.transpose();
  whitened_values_.head(t) = w;

  const double prior = gram_.params().alpha * gram_.params().alpha;
  mean_ = whitened_.leftCols(t) * w;
  variance_ = (prior - whitened_.leftCols(t).rowwise().squaredNorm().array()).max(0.0).matrix();
}

// ---------------------------------------------------------------------------

Posterior posterior(const KernelParams& params, const Dataset& data,
                    std::span<const Point> queries) {
  params.validate();
  const double prior = params.alpha * params.alpha;
  const auto q = static_cast<Eigen::Index>(queries.size());
  Posterior out{Eigen::VectorXd::Zero(q), Eigen::VectorXd::Constant(q, prior)};
  if (data.size() == 0) return out;
  if (data.values.size() != data.locations.size()) {
    throw ArgumentError("dataset locations and values differ in length");
  }

  Eigen::MatrixXd a = gram(params, data.locations);
  a.diagonal().array() += params.noise_var;
  double jitter = 0.0;
  const auto llt = factorize_spd(a, jitter);
  const Eigen::MatrixXd ks = cross_kernel(params, data.locations, queries);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      data.values.data(), static_cast<Eigen::Index>(data.size()));
  out.mean = ks.transpose() * llt.solve(y);
  const Eigen::MatrixXd z = llt.matrixL().solve(ks);
  out.variance = (prior - z.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  return out;
}

Eigen::MatrixXd posterior_covariance_matrix(const KernelParams& params, const Dataset& data,
                                            std::span<const Point> queries) {
  params.validate();
  Eigen::MatrixXd cov = gram(params, queries);
  if (data.size() == 0) return cov;
  Eigen::MatrixXd a = gram(params, data.locations);
  a.diagonal().array() += params.noise_var;
  double jitter = 0.0;
  const auto llt = factorize_spd(a, jitter);
  const Eigen::MatrixXd z = llt.matrixL().solve(cross_kernel(params, data.locations, queries));
  cov.noalias() -= z.transpose() * z;
  return 0.5 * (cov + cov.transpose());
}

double mutual_information(const KernelParams& params, std::span<const Point> locations) {
  params.validate();
  if (locations.empty()) return 0.0;
  Eigen::MatrixXd a = gram(params, locations) / params.noise_var;
  a.diagonal().array() += 1.0;
  double jitter = 0.0;
  const auto llt = factorize_spd(a, jitter);
  return Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace safemap
