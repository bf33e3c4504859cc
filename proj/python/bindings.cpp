#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "safemap/analysis.hpp"
#include "safemap/config.hpp"
#include "safemap/detector.hpp"
#include "safemap/episode.hpp"
#include "safemap/errors.hpp"
#include "safemap/field.hpp"
#include "safemap/io.hpp"
#include "safemap/planner.hpp"
#include "safemap/rrtstar.hpp"
#include "safemap/safety.hpp"

namespace py = pybind11;
using namespace safemap;

using Rows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

PointList to_points(const Rows& m) {
  if (m.cols() < 1 || m.cols() > 3) throw ArgumentError("points must have 1 to 3 columns");
  PointList out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Point p = Point::Zero();
    for (Eigen::Index a = 0; a < m.cols(); ++a) p[a] = m(i, a);
    out.push_back(p);
  }
  return out;
}

Rows from_points(const PointList& pts, int dimension) {
  Rows m(static_cast<Eigen::Index>(pts.size()), dimension);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int a = 0; a < dimension; ++a) m(static_cast<Eigen::Index>(i), a) = pts[i][a];
  }
  return m;
}

FieldSpec field_named(const std::string& name) {
  const auto spec = field_preset(name);
  if (!spec) throw ArgumentError("unknown field preset '" + name + "'");
  return *spec;
}

DetectedRegionSet balls(const Rows& m) {
  if (m.size() > 0 && (m.cols() < 3 || m.cols() > 4)) {
    throw ArgumentError("obstacles are rows of (x, y, r) or (x, y, z, r)");
  }
  DetectedRegionSet out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Point c = Point::Zero();
    for (Eigen::Index a = 0; a + 1 < m.cols(); ++a) c[a] = m(i, a);
    out.regions.push_back({c, m(i, m.cols() - 1), 0});
  }
  return out;
}

py::list regions_list(const DetectedRegionSet& regions, int dimension) {
  py::list out;
  for (const auto& r : regions.regions) {
    std::vector<double> c(r.center.data(), r.center.data() + dimension);
    out.append(py::dict(py::arg("center") = c, py::arg("radius") = r.radius, py::arg("support") = r.support));
  }
  return out;
}

py::dict summarize(const ExperimentConfig& config, const EpisodeResult& r) {
  const int dim = config.episode.field.dimension;
  py::dict out;
  out["status"] = r.abort_message ? "aborted" : "ok";
  out["abort_message"] = r.abort_message ? py::cast(*r.abort_message) : py::none();
  out["abort_step"] = r.abort_step;
  out["locations"] = from_points(r.data.locations, dim);
  out["values"] = r.data.values;
  out["regions"] = regions_list(r.final_regions, dim);
  out["relocations"] = r.relocation_count();
  out["lipschitz"] = r.lipschitz;
  out["mean"] = r.final_posterior.mean;
  out["variance"] = r.final_posterior.variance;
  out["grid_shape"] = r.grid.shape();
  std::vector<double> lengths;
  for (const auto& leg : r.trajectory) lengths.push_back(leg.length);
  out["leg_lengths"] = lengths;
  return out;
}

}  // namespace

PYBIND11_MODULE(_safemap, m) {
  m.doc() = "Safe scalar-field mapping: GP confidence maps, MVS planning, Hough detection, RRT*";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<EpisodeAbort>(m, "EpisodeAbort", PyExc_RuntimeError);
  py::register_exception<PlannerTimeout>(m, "PlannerTimeout", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "field_values",
      [](const std::string& preset, const Rows& points) {
        const auto spec = field_named(preset);
        const auto pts = to_points(points);
        Eigen::VectorXd out(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) out[static_cast<Eigen::Index>(i)] = eval_field(spec, pts[i]);
        return out;
      },
      py::arg("preset"), py::arg("points"), "Noise-free field values of a preset at the given points.");

  m.def(
      "grid_points",
      [](const std::string& preset, std::vector<int> shape) {
        const auto spec = field_named(preset);
        if (static_cast<int>(shape.size()) != spec.dimension) throw ArgumentError("shape must match the dimension");
        std::array<int, 3> s{1, 1, 1};
        for (std::size_t a = 0; a < shape.size(); ++a) s[a] = shape[a];
        return from_points(TestGrid(spec.bounds, s).points(), spec.dimension);
      },
      py::arg("preset"), py::arg("shape"), "Test grid nodes over a preset's domain, x fastest.");

  m.def(
      "posterior",
      [](const Rows& x, const std::vector<double>& y, const Rows& queries, double alpha, double length_scale,
         double noise_var) {
        Dataset data{to_points(x), y};
        if (data.locations.size() != y.size()) throw ArgumentError("x and y lengths differ");
        const auto p = posterior(KernelParams{alpha, length_scale, noise_var}, data, to_points(queries));
        return py::make_tuple(p.mean, p.variance);
      },
      py::arg("x"), py::arg("y"), py::arg("queries"), py::arg("alpha") = 1.0, py::arg("length_scale") = 0.15,
      py::arg("noise_var") = 1e-4, "GP posterior mean and variance at the query points.");

  m.def(
      "mutual_information",
      [](const Rows& x, double alpha, double length_scale, double noise_var) {
        return mutual_information(KernelParams{alpha, length_scale, noise_var}, to_points(x));
      },
      py::arg("x"), py::arg("alpha") = 1.0, py::arg("length_scale") = 0.15, py::arg("noise_var") = 1e-4,
      "0.5 ln det(I + K / noise_var) in nats.");

  m.def(
      "info_spectrum",
      [](const Rows& x, double alpha, double length_scale, double noise_var) {
        const auto g = info_gain_eigen(KernelParams{alpha, length_scale, noise_var}, to_points(x));
        return py::make_tuple(g.nats, g.spectrum);
      },
      py::arg("x"), py::arg("alpha") = 1.0, py::arg("length_scale") = 0.15, py::arg("noise_var") = 1e-4,
      "Information gain and the ascending kernel eigenvalues.");

  m.def(
      "mvs_select",
      [](const Rows& candidates, std::size_t budget, double alpha, double length_scale, double noise_var) {
        return mvs_select(KernelParams{alpha, length_scale, noise_var}, to_points(candidates), budget);
      },
      py::arg("candidates"), py::arg("budget"), py::arg("alpha") = 1.0, py::arg("length_scale") = 0.15,
      py::arg("noise_var") = 1e-4, "Greedy maximum-variance selection; returns candidate indices.");

  m.def(
      "beta",
      [](std::size_t grid_size, int t, double delta, double lipschitz) {
        return beta(ConfidenceSchedule{delta, PiRule::kBasel, lipschitz}, grid_size, t);
      },
      py::arg("grid_size"), py::arg("t"), py::arg("delta") = 0.05, py::arg("lipschitz") = 1.0,
      "Confidence scaling 2 ln(M pi_t / delta).");

  m.def(
      "detect_disks",
      [](const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& bits, double radius_min,
         double radius_max, double threshold) {
        // rows are y, columns x, over the unit square
        const int ny = static_cast<int>(bits.rows()), nx = static_cast<int>(bits.cols());
        TestGrid grid(Bounds{}, {nx, ny, 1});
        BinarySafetyMap map;
        map.shape = grid.shape();
        map.bits.resize(grid.size());
        for (int y = 0; y < ny; ++y) {
          for (int x = 0; x < nx; ++x) map.bits[grid.index(x, y)] = bits(y, x) ? 1 : 0;
        }
        HoughParams h;
        h.radius_min = radius_min;
        h.radius_max = radius_max;
        h.accumulator_threshold = threshold;
        return regions_list(detect_2d(map, grid, h), 2);
      },
      py::arg("bits"), py::arg("radius_min") = 0.05, py::arg("radius_max") = 0.15, py::arg("threshold") = 0.5,
      "Circle detection on a binary unsafe map over the unit square.");

  m.def(
      "plan_path",
      [](const std::vector<double>& start, const std::vector<double>& goal, const Rows& obstacles,
         double step_size, double goal_bias, int max_iterations, std::uint64_t seed) {
        if (start.size() != goal.size() || start.size() < 2 || start.size() > 3) {
          throw ArgumentError("start and goal must both be 2D or 3D");
        }
        const int dim = static_cast<int>(start.size());
        Point a = Point::Zero(), b = Point::Zero();
        for (int i = 0; i < dim; ++i) {
          a[i] = start[static_cast<std::size_t>(i)];
          b[i] = goal[static_cast<std::size_t>(i)];
        }
        Bounds bounds;
        bounds.dimension = dim;
        if (dim == 2) bounds.max[2] = 0.0;
        PlannerParams p;
        p.step_size = step_size;
        p.goal_bias = goal_bias;
        p.max_iterations = max_iterations;
        p.seed = seed;
        const auto r = plan_path(a, b, balls(obstacles), p, bounds);
        return py::make_tuple(from_points(r.path.waypoints, dim), r.path.length);
      },
      py::arg("start"), py::arg("goal"), py::arg("obstacles") = Rows(0, 3), py::arg("step_size") = 0.05,
      py::arg("goal_bias") = 0.05, py::arg("max_iterations") = 5000, py::arg("seed") = 0,
      "RRT* in the unit square or cube around closed balls; returns (waypoints, length).");

  m.def(
      "validate_config",
      [](const std::string& text) { return to_json(parse_config(nlohmann::json::parse(text))).dump(); },
      py::arg("config_json"), "Parses a config and returns its normalized JSON.");

  m.def(
      "run_episode",
      [](const std::string& text, std::optional<fs::path> out) {
        const auto config = parse_config(nlohmann::json::parse(text));
        EpisodeResult r = [&] {
          py::gil_scoped_release release;
          return run_episode_recorded(config.episode);
        }();
        if (out) write_run(*out, config, r);
        return summarize(config, r);
      },
      py::arg("config_json"), py::arg("out") = py::none(),
      "Runs one episode; optionally writes the run directory.");

  m.def(
      "write_plan",
      [](const std::string& text, const fs::path& out) { write_plan(out, parse_config(nlohmann::json::parse(text))); },
      py::arg("config_json"), py::arg("out"), "Writes plan.csv and geometry.json.");

  m.def(
      "analyze_run", [](const fs::path& dir, double eta) { analyze_run(dir, eta); }, py::arg("run_dir"),
      py::arg("eta") = 0.1, "Writes information-loss and convergence reports under run_dir/analysis.");
}
