#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "safemap/rng.hpp"
#include "safemap/types.hpp"

namespace safemap {

enum class FieldForm {
  kGaussianBump,      // A * exp(-|x - c|^2 / spread)
  kExponentialDecay,  // A * exp(-decay * |x - c|)
};

struct FieldSource {
  Point center = Point::Zero();
  double amplitude = 1.0;
  double spread = 1.0;  // spread for gaussian bumps, decay rate for exponential fields

  friend bool operator==(const FieldSource&, const FieldSource&) = default;
};

struct FieldSpec {
  int dimension = 2;
  std::vector<FieldSource> sources;
  Bounds bounds;
  FieldForm form = FieldForm::kGaussianBump;

  void validate() const;
  friend bool operator==(const FieldSpec& a, const FieldSpec& b) {
    return a.dimension == b.dimension && a.sources == b.sources && a.bounds == b.bounds &&
           a.form == b.form;
  }
};

/// Two gaussian bumps on the unit square, sources at (0.25, 0.75) and (0.75, 0.25).
FieldSpec sim2d_field();
/// Four exponentially decaying sources on the [0, 10]^3 ground plane.
FieldSpec sim3d_field();
/// Looks up "sim2d" / "sim3d"; nullopt for unknown names.
std::optional<FieldSpec> field_preset(const std::string& name);

std::string to_string(FieldForm form);
std::optional<FieldForm> parse_field_form(const std::string& name);

/// Exact field value. Throws DomainError outside spec.bounds.
double eval_field(const FieldSpec& spec, const Point& x);

struct MeasurementModel {
  double noise_std = 0.01;
  std::uint64_t rng_seed = 0;
};

/// Noisy sensor: y = f(x) + N(0, noise_std^2), drawn from a dedicated counter stream.
class Sensor {
 public:
  static constexpr std::uint64_t kNoiseStream = 0;

  Sensor(FieldSpec spec, MeasurementModel model);

  double measure(const Point& x);
  const FieldSpec& spec() const { return spec_; }
  const MeasurementModel& model() const { return model_; }

 private:
  FieldSpec spec_;
  MeasurementModel model_;
  CounterRng rng_;
};

enum class Safety { kSafe, kUnsafe };

/// Unsafe iff f(x) > f_bar; equality is safe.
Safety true_safety(const FieldSpec& spec, double f_bar, const Point& x);

/// Largest central-difference gradient norm over the given points.
double estimate_lipschitz(const FieldSpec& spec, std::span<const Point> points);

struct FieldRange {
  double min = 0.0;
  double max = 0.0;
};
FieldRange field_range(const FieldSpec& spec, std::span<const Point> points);

/// Checks f_min < f_bar < f_max over the points; throws ArgumentError otherwise.
void validate_threshold(const FieldSpec& spec, double f_bar, std::span<const Point> points);

}  // namespace safemap
