#include "safemap/config.hpp"

#include <fstream>
#include <set>

#include "safemap/errors.hpp"

namespace safemap {

using nlohmann::json;

namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Strict object reader: every key must be consumed, types must match.
class Reader {
 public:
  Reader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return number(key);
  }
  double number(const std::string& key) {
    require(key);
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    return v.get<double>();
  }
  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    return integer(key);
  }
  long long integer(const std::string& key) {
    require(key);
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<long long>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  Point point(const std::string& key, int dimension) {
    require(key);
    const auto& v = raw(key);
    if (!v.is_array() || static_cast<int>(v.size()) != dimension) {
      throw ConfigError(path(key), "expected an array of " + std::to_string(dimension) + " numbers");
    }
    Point p = Point::Zero();
    for (int a = 0; a < dimension; ++a) {
      if (!v[a].is_number()) throw ConfigError(path(key), "expected numbers");
      p[a] = v[a].get<double>();
    }
    return p;
  }

  void require(const std::string& key) const {
    if (!has(key)) throw ConfigError(path(key), "missing required field");
  }

  void finish() const {
    for (const auto& item : doc_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(path(item.key()), "unknown field");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

json point_json(const Point& p, int dimension) {
  json a = json::array();
  for (int i = 0; i < dimension; ++i) a.push_back(p[i]);
  return a;
}

FieldSpec parse_field(const json& doc, const std::string& path) {
  Reader r(doc, path);
  FieldSpec spec;
  spec.dimension = static_cast<int>(r.integer("dimension"));
  if (spec.dimension != 2 && spec.dimension != 3) throw ConfigError(r.path("dimension"), "must be 2 or 3");
  const auto form = parse_field_form(r.string("form", "gaussian-bump"));
  if (!form) throw ConfigError(r.path("form"), "expected gaussian-bump or exponential-decay");
  spec.form = *form;
  r.require("bounds");
  Reader b(r.raw("bounds"), r.path("bounds"));
  spec.bounds.dimension = spec.dimension;
  spec.bounds.min = b.point("min", spec.dimension);
  spec.bounds.max = b.point("max", spec.dimension);
  b.finish();
  r.require("sources");
  const auto& sources = r.raw("sources");
  if (!sources.is_array()) throw ConfigError(r.path("sources"), "expected an array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    Reader s(sources[i], r.path("sources") + "[" + std::to_string(i) + "]");
    FieldSource src;
    src.center = s.point("center", spec.dimension);
    src.amplitude = s.number("amplitude");
    src.spread = s.number("spread");
    s.finish();
    spec.sources.push_back(src);
  }
  r.finish();
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
  return spec;
}

json field_json(const FieldSpec& spec) {
  json sources = json::array();
  for (const auto& s : spec.sources) {
    sources.push_back({{"center", point_json(s.center, spec.dimension)},
                       {"amplitude", s.amplitude},
                       {"spread", s.spread}});
  }
  return {{"dimension", spec.dimension},
          {"form", to_string(spec.form)},
          {"bounds",
           {{"min", point_json(spec.bounds.min, spec.dimension)},
            {"max", point_json(spec.bounds.max, spec.dimension)}}},
          {"sources", sources}};
}

std::string mode_name(EpisodeMode mode) {
  return mode == EpisodeMode::kBudgeted ? "budgeted" : "mvs-on-safe";
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  Reader r(doc, "");
  ExperimentConfig c;
  auto& e = c.episode;

  r.require("seed");
  const auto seed = r.integer("seed");
  if (seed < 0) throw ConfigError("seed", "must be >= 0");
  e.seed = static_cast<std::uint64_t>(seed);

  r.require("field");
  const auto& field = r.raw("field");
  if (field.is_string()) {
    const auto spec = field_preset(field.get<std::string>());
    if (!spec) throw ConfigError("field", "unknown preset '" + field.get<std::string>() + "'");
    c.preset = field.get<std::string>();
    e.field = *spec;
  } else {
    e.field = parse_field(field, "field");
  }
  const int dim = e.field.dimension;

  if (r.has("measurement")) {
    Reader m(r.raw("measurement"), "measurement");
    e.noise_std = m.number("noise_std", e.noise_std);
    m.finish();
  }
  if (r.has("kernel")) {
    Reader k(r.raw("kernel"), "kernel");
    e.alpha = k.number("alpha", e.alpha);
    e.length_scale = k.number("length_scale", e.length_scale);
    if (k.has("noise_var")) e.noise_var = k.number("noise_var");
    k.finish();
  }
  if (r.has("schedule")) {
    Reader s(r.raw("schedule"), "schedule");
    e.delta = s.number("delta", e.delta);
    const auto rule = s.string("pi_rule", "basel");
    if (rule != "basel") throw ConfigError("schedule.pi_rule", "only 'basel' is supported");
    if (s.has("lipschitz")) {
      const auto& l = s.raw("lipschitz");
      if (l.is_string() && l.get<std::string>() == "auto") {
        e.lipschitz.reset();
      } else if (l.is_number()) {
        e.lipschitz = l.get<double>();
      } else {
        throw ConfigError("schedule.lipschitz", "expected a number or \"auto\"");
      }
    }
    s.finish();
  }
  r.require("grid");
  {
    Reader g(r.raw("grid"), "grid");
    g.require("shape");
    const auto& shape = g.raw("shape");
    if (!shape.is_array() || static_cast<int>(shape.size()) != dim) {
      throw ConfigError("grid.shape", "expected " + std::to_string(dim) + " integers");
    }
    e.grid_shape = {1, 1, 1};
    for (int a = 0; a < dim; ++a) {
      if (!shape[a].is_number_integer()) throw ConfigError("grid.shape", "expected integers");
      e.grid_shape[a] = shape[a].get<int>();
    }
    g.finish();
  }
  r.require("f_bar");
  e.f_bar = r.number("f_bar");
  r.require("budget");
  e.budget = static_cast<int>(r.integer("budget"));
  e.start = r.point("start", dim);
  e.start_safe = r.boolean("start_safe", false);
  const auto mode = r.string("mode", "budgeted");
  if (mode == "budgeted") e.mode = EpisodeMode::kBudgeted;
  else if (mode == "mvs-on-safe") e.mode = EpisodeMode::kMvsOnSafe;
  else throw ConfigError("mode", "expected budgeted or mvs-on-safe");

  if (r.has("hough")) {
    Reader h(r.raw("hough"), "hough");
    e.hough.radius_min = h.number("radius_min", e.hough.radius_min);
    e.hough.radius_max = h.number("radius_max", e.hough.radius_max);
    e.hough.radius_step = h.number("radius_step", e.hough.radius_step);
    e.hough.accumulator_threshold = h.number("accumulator_threshold", e.hough.accumulator_threshold);
    e.hough.annulus_width = h.number("annulus_width", e.hough.annulus_width);
    e.hough.search_radius_max = h.number("search_radius_max", e.hough.search_radius_max);
    h.finish();
  }
  if (r.has("components")) {
    Reader k(r.raw("components"), "components");
    e.components.radius_min = k.number("radius_min", e.components.radius_min);
    e.components.radius_max = k.number("radius_max", e.components.radius_max);
    e.components.min_voxels = static_cast<int>(k.integer("min_voxels", e.components.min_voxels));
    k.finish();
  }
  if (r.has("rrt")) {
    Reader p(r.raw("rrt"), "rrt");
    e.rrt.step_size = p.number("step_size", e.rrt.step_size);
    e.rrt.rewire_gamma = p.number("rewire_gamma", e.rrt.rewire_gamma);
    e.rrt.max_iterations = static_cast<int>(p.integer("max_iterations", e.rrt.max_iterations));
    e.rrt.goal_bias = p.number("goal_bias", e.rrt.goal_bias);
    e.rrt.goal_tolerance = p.number("goal_tolerance", e.rrt.goal_tolerance);
    e.rrt.collision_resolution = p.number("collision_resolution", e.rrt.collision_resolution);
    p.finish();
  }
  e.plan_paths = r.boolean("plan_paths", e.plan_paths);
  e.snapshot_every = static_cast<int>(r.integer("snapshot_every", e.snapshot_every));
  c.output = r.string("output", c.output);
  r.finish();

  e.validate();
  if (e.grid_shape[0] * static_cast<long long>(e.grid_shape[1]) * e.grid_shape[2] <
          e.budget &&
      e.mode == EpisodeMode::kBudgeted) {
    throw ConfigError("budget", "exceeds the number of grid points");
  }
  try {
    validate_threshold(e.field, e.f_bar, make_grid(e).points());
  } catch (const ArgumentError& err) {
    throw ConfigError("f_bar", err.what());
  }
  if (true_safety(e.field, e.f_bar, e.start) != Safety::kSafe) {
    throw ConfigError("start", "the start point is unsafe under the field oracle");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(path, std::string("invalid JSON: ") + err.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  const auto& e = c.episode;
  const int dim = e.field.dimension;
  json doc;
  doc["seed"] = e.seed;
  doc["field"] = c.preset ? json(*c.preset) : field_json(e.field);
  doc["measurement"] = {{"noise_std", e.noise_std}};
  doc["kernel"] = {{"alpha", e.alpha}, {"length_scale", e.length_scale}};
  if (e.noise_var) doc["kernel"]["noise_var"] = *e.noise_var;
  doc["schedule"] = {{"delta", e.delta}, {"pi_rule", "basel"}};
  doc["schedule"]["lipschitz"] = e.lipschitz ? json(*e.lipschitz) : json("auto");
  json shape = json::array();
  for (int a = 0; a < dim; ++a) shape.push_back(e.grid_shape[a]);
  doc["grid"] = {{"shape", shape}};
  doc["f_bar"] = e.f_bar;
  doc["budget"] = e.budget;
  doc["start"] = point_json(e.start, dim);
  doc["start_safe"] = e.start_safe;
  doc["mode"] = mode_name(e.mode);
  doc["hough"] = {{"radius_min", e.hough.radius_min},
                  {"radius_max", e.hough.radius_max},
                  {"radius_step", e.hough.radius_step},
                  {"accumulator_threshold", e.hough.accumulator_threshold},
                  {"annulus_width", e.hough.annulus_width},
                  {"search_radius_max", e.hough.search_radius_max}};
  doc["components"] = {{"radius_min", e.components.radius_min},
                       {"radius_max", e.components.radius_max},
                       {"min_voxels", e.components.min_voxels}};
  doc["rrt"] = {{"step_size", e.rrt.step_size},
                {"rewire_gamma", e.rrt.rewire_gamma},
                {"max_iterations", e.rrt.max_iterations},
                {"goal_bias", e.rrt.goal_bias},
                {"goal_tolerance", e.rrt.goal_tolerance},
                {"collision_resolution", e.rrt.collision_resolution}};
  doc["plan_paths"] = e.plan_paths;
  doc["snapshot_every"] = e.snapshot_every;
  doc["output"] = c.output;
  return doc;
}

}  // namespace safemap
