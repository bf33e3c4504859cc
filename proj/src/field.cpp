#include "safemap/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "safemap/errors.hpp"

namespace safemap {

void FieldSpec::validate() const {
  if (dimension != 2 && dimension != 3) {
    throw ArgumentError("field dimension must be 2 or 3");
  }
  if (bounds.dimension != dimension) {
    throw ArgumentError("field bounds dimension does not match field dimension");
  }
  bounds.validate();
  for (const auto& s : sources) {
    if (!(s.spread > 0.0)) throw ArgumentError("source spread/decay must be > 0");
    for (int a = dimension; a < 3; ++a) {
      if (s.center[a] != 0.0) throw ArgumentError("source center has extra coordinates");
    }
  }
}

FieldSpec sim2d_field() {
  FieldSpec spec;
  spec.dimension = 2;
  spec.form = FieldForm::kGaussianBump;
  spec.bounds = Bounds{2, Point(0.0, 0.0, 0.0), Point(1.0, 1.0, 0.0)};
  spec.sources = {
      {Point(0.25, 0.75, 0.0), 1.0, 0.08},
      {Point(0.75, 0.25, 0.0), 1.0, 0.08},
  };
  return spec;
}

FieldSpec sim3d_field() {
  FieldSpec spec;
  spec.dimension = 3;
  spec.form = FieldForm::kExponentialDecay;
  spec.bounds = Bounds{3, Point(0.0, 0.0, 0.0), Point(10.0, 10.0, 10.0)};
  constexpr double kDecay = 1.7;
  spec.sources = {
      {Point(2.0, 2.0, 0.0), 40.0, kDecay},
      {Point(2.0, 8.0, 0.0), 20.0, kDecay},
      {Point(8.0, 2.0, 0.0), 20.0, kDecay},
      {Point(8.0, 8.0, 0.0), 40.0, kDecay},
  };
  return spec;
}

std::optional<FieldSpec> field_preset(const std::string& name) {
  if (name == "sim2d") return sim2d_field();
  if (name == "sim3d") return sim3d_field();
  return std::nullopt;
}

std::string to_string(FieldForm form) {
  return form == FieldForm::kGaussianBump ? "gaussian-bump" : "exponential-decay";
}

std::optional<FieldForm> parse_field_form(const std::string& name) {
  if (name == "gaussian-bump") return FieldForm::kGaussianBump;
  if (name == "exponential-decay") return FieldForm::kExponentialDecay;
  return std::nullopt;
}

namespace {

double eval_unchecked(const FieldSpec& spec, const Point& x) {
  double value = 0.0;
  for (const auto& s : spec.sources) {
    const double d2 = (x - s.center).squaredNorm();
    if (spec.form == FieldForm::kGaussianBump) {
      value += s.amplitude * std::exp(-d2 / s.spread);
    } else {
      value += s.amplitude * std::exp(-s.spread * std::sqrt(d2));
    }
  }
  return value;
}

}  // namespace

double eval_field(const FieldSpec& spec, const Point& x) {
  if (!spec.bounds.contains(x)) {
    std::ostringstream msg;
    msg << "coordinate (" << x.head(spec.dimension).transpose() << ") outside field domain";
    throw DomainError(msg.str());
  }
  return eval_unchecked(spec, x);
}

Sensor::Sensor(FieldSpec spec, MeasurementModel model)
    : spec_(std::move(spec)), model_(model), rng_(model.rng_seed, kNoiseStream) {
  if (!(model_.noise_std >= 0.0)) throw ArgumentError("noise_std must be >= 0");
}

double Sensor::measure(const Point& x) {
  const double f = eval_field(spec_, x);
  // Draw unconditionally so the stream position only depends on the call count.
  const double eps = rng_.normal();
  return model_.noise_std == 0.0 ? f : f + model_.noise_std * eps;
}

Safety true_safety(const FieldSpec& spec, double f_bar, const Point& x) {
  return eval_field(spec, x) > f_bar ? Safety::kUnsafe : Safety::kSafe;
}

double estimate_lipschitz(const FieldSpec& spec, std::span<const Point> points) {
  const auto& b = spec.bounds;
  double best = 0.0;
  for (const auto& p : points) {
    Point grad = Point::Zero();
    for (int a = 0; a < spec.dimension; ++a) {
      const double h = 1e-6 * b.extent(a);
      Point lo = p, hi = p;
      lo[a] = std::max(b.min[a], p[a] - h);
      hi[a] = std::min(b.max[a], p[a] + h);
      grad[a] = (eval_unchecked(spec, hi) - eval_unchecked(spec, lo)) / (hi[a] - lo[a]);
    }
    best = std::max(best, grad.norm());
  }
  return best;
}

FieldRange field_range(const FieldSpec& spec, std::span<const Point> points) {
  FieldRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    const double f = eval_field(spec, p);
    r.min = std::min(r.min, f);
    r.max = std::max(r.max, f);
  }
  return r;
}

void validate_threshold(const FieldSpec& spec, double f_bar, std::span<const Point> points) {
  const auto r = field_range(spec, points);
  if (!(r.min < f_bar && f_bar < r.max)) {
    std::ostringstream msg;
    msg << "threshold " << f_bar << " not inside field range (" << r.min << ", " << r.max << ")";
    throw ArgumentError(msg.str());
  }
}

}  // namespace safemap
