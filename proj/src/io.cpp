#include "safemap/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "safemap/errors.hpp"

namespace safemap {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

namespace {

const char* kAxes[] = {"x", "y", "z"};

std::string coord_header(int dimension) {
  std::string h;
  for (int a = 0; a < dimension; ++a) h += std::string(",") + kAxes[a];
  return h;
}

std::string coords(const Point& p, int dimension) {
  std::string s;
  for (int a = 0; a < dimension; ++a) s += fmt::format(",{}", p[a]);
  return s;
}

json point_json(const Point& p, int dimension) {
  json a = json::array();
  for (int i = 0; i < dimension; ++i) a.push_back(p[i]);
  return a;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// Data rows of a CSV text (header skipped), each split into fields.
std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::size_t columns) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != columns) throw ConfigError("csv", "unexpected column count in '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("csv", "bad number '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("csv", "bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string plan_csv(const MeasurementPlan& plan, int dimension) {
  std::string out = "index" + coord_header(dimension) + ",status,origin_index\n";
  for (std::size_t i = 0; i < plan.size(); ++i) {
    out += fmt::format("{}{},{},{}\n", i, coords(plan[i].point, dimension),
                       to_string(plan[i].status), plan[i].origin);
  }
  return out;
}

std::string measurements_csv(const Dataset& data, int dimension) {
  std::string out = "t" + coord_header(dimension) + ",value\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += fmt::format("{}{},{}\n", i + 1, coords(data.locations[i], dimension), data.values[i]);
  }
  return out;
}

std::string trajectory_csv(const std::vector<Path>& legs, int dimension) {
  std::string out = "leg,waypoint" + coord_header(dimension) + "\n";
  for (std::size_t l = 0; l < legs.size(); ++l) {
    for (std::size_t w = 0; w < legs[l].waypoints.size(); ++w) {
      out += fmt::format("{},{}{}\n", l + 1, w, coords(legs[l].waypoints[w], dimension));
    }
  }
  return out;
}

std::string snapshots_csv(const std::vector<Snapshot>& snapshots) {
  std::string out = "step,index,mean,variance\n";
  for (const auto& s : snapshots) {
    for (std::size_t i = 0; i < s.posterior.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out += fmt::format("{},{},{},{}\n", s.step, i, s.posterior.mean[k], s.posterior.variance[k]);
    }
  }
  return out;
}

std::string map_pgm(const BinarySafetyMap& map) {
  const int nx = map.shape[0], ny = map.shape[1], nz = map.shape[2];
  std::string out = fmt::format("P5\n{} {}\n255\n", nx, ny * nz);
  for (int z = 0; z < nz; ++z) {
    for (int y = ny - 1; y >= 0; --y) {
      for (int x = 0; x < nx; ++x) {
        const auto i = static_cast<std::size_t>(x) +
                       static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) +
                                                       static_cast<std::size_t>(ny) * z);
        out.push_back(map.bits[i] ? static_cast<char>(255) : static_cast<char>(0));
      }
    }
  }
  return out;
}

json map_sidecar(const BinarySafetyMap& map) {
  return {{"t", map.step},
          {"beta", map.beta},
          {"f_bar", map.f_bar},
          {"lipschitz_margin", map.lipschitz_margin},
          {"shape", map.shape},
          {"unsafe_count", map.unsafe_count()}};
}

json regions_json(const DetectedRegionSet& regions, int dimension) {
  json list = json::array();
  for (const auto& r : regions.regions) {
    json item = {{"cx", r.center[0]}, {"cy", r.center[1]}};
    if (dimension == 3) item["cz"] = r.center[2];
    item["r"] = r.radius;
    item[dimension == 2 ? "votes" : "voxels"] = r.support;
    list.push_back(item);
  }
  return {{"t", regions.step}, {"count", regions.count()}, {"regions", list}};
}

json step_json(const StepLog& log, int dimension) {
  json relocations = json::array();
  for (const auto& r : log.relocations) {
    relocations.push_back({{"index", r.plan_index},
                           {"from", point_json(r.from, dimension)},
                           {"to", point_json(r.to, dimension)}});
  }
  return {{"t", log.t},
          {"x_t", point_json(log.x, dimension)},
          {"y_t", log.y},
          {"beta_t", log.beta},
          {"regions", regions_json(log.regions, dimension)["regions"]},
          {"relocations", relocations},
          {"reinstated", log.reinstated},
          {"path_len", log.path_length},
          {"start_snap", log.start_snap},
          {"unsafe_visit", log.unsafe_visit},
          {"certified_future", log.certified_future},
          {"future_in_unsafe", log.future_in_unsafe}};
}

json write_run(const fs::path& dir, const ExperimentConfig& config, const EpisodeResult& result) {
  const int dim = config.episode.field.dimension;
  std::vector<std::pair<std::string, std::string>> files;
  const std::string config_text = to_json(config).dump(2) + "\n";
  files.emplace_back("config.json", config_text);
  files.emplace_back("measurements.csv", measurements_csv(result.data, dim));
  files.emplace_back("trajectory.csv", trajectory_csv(result.trajectory, dim));
  if (config.episode.mode == EpisodeMode::kBudgeted) {
    files.emplace_back("plan_initial.csv", plan_csv(result.initial_plan, dim));
    files.emplace_back("plan_final.csv", plan_csv(result.final_plan, dim));
  }
  std::string steps;
  for (const auto& log : result.logs) steps += step_json(log, dim).dump() + "\n";
  files.emplace_back("steps.jsonl", steps);
  for (const auto& map : result.maps) {
    const auto stem = fmt::format("maps/map_{:04d}", map.step - 1);
    files.emplace_back(stem + ".pgm", map_pgm(map));
    files.emplace_back(stem + ".json", map_sidecar(map).dump(2) + "\n");
  }
  files.emplace_back("regions.json", regions_json(result.final_regions, dim).dump(2) + "\n");
  if (!result.snapshots.empty()) files.emplace_back("snapshots.csv", snapshots_csv(result.snapshots));

  json manifest;
  manifest["command"] = "run";
  manifest["config_hash"] = sha256_hex(config_text);
  manifest["seed"] = config.episode.seed;
  manifest["status"] = result.abort_message ? "aborted" : "ok";
  manifest["abort"] = result.abort_message
                          ? json{{"step", result.abort_step}, {"message", *result.abort_message}}
                          : json(nullptr);
  manifest["summary"] = {{"measurements", result.data.size()},
                         {"regions", result.final_regions.count()},
                         {"relocations", result.relocation_count()},
                         {"lipschitz", result.lipschitz},
                         {"fill_distance", result.grid.fill_distance()},
                         {"grid_size", result.grid.size()}};
  json hashes = json::object();
  for (const auto& [name, bytes] : files) {
    write_file(dir / name, bytes);
    hashes[name] = sha256_hex(bytes);
  }
  manifest["files"] = hashes;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

void write_plan(const fs::path& dir, const ExperimentConfig& config) {
  const auto& e = config.episode;
  const TestGrid grid = make_grid(e);
  const auto selection = mvs_select(e.kernel(), grid.points(), static_cast<std::size_t>(e.budget));
  const auto plan = make_plan(grid.points(), selection, e.start);
  write_file(dir / "plan.csv", plan_csv(plan, e.field.dimension));
  const int probes = static_cast<int>(std::max(2, 4 * (grid.shape()[0] - 1) + 1));
  const auto probed = grid_geometry(grid.points(), grid.bounds(), probes);
  json geometry = {{"M", grid.size()},
                   {"h", grid.fill_distance()},
                   {"q", grid.separation_radius()},
                   {"h_probe", probed.fill_distance},
                   {"q_exact", probed.separation_radius},
                   {"tour_length", tour_length(plan.points(), e.start)}};
  write_file(dir / "geometry.json", geometry.dump(2) + "\n");
}

std::vector<Snapshot> parse_snapshots_csv(const std::string& text) {
  std::vector<Snapshot> out;
  std::vector<double> mean, var;
  int step = -1;
  auto flush = [&]() {
    if (step < 0) return;
    Snapshot s;
    s.step = step;
    s.posterior.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    s.posterior.variance = Eigen::Map<Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()));
    out.push_back(std::move(s));
    mean.clear();
    var.clear();
  };
  for (const auto& row : csv_rows(text, 4)) {
    const int s = static_cast<int>(to_integer(row[0]));
    if (s != step) {
      flush();
      step = s;
    }
    if (to_integer(row[1]) != static_cast<long long>(mean.size())) {
      throw ConfigError("snapshots.csv", "grid indices out of order");
    }
    mean.push_back(to_double(row[2]));
    var.push_back(to_double(row[3]));
  }
  flush();
  return out;
}

Dataset parse_measurements_csv(const std::string& text, int dimension) {
  Dataset data;
  for (const auto& row : csv_rows(text, static_cast<std::size_t>(dimension) + 2)) {
    Point p = Point::Zero();
    for (int a = 0; a < dimension; ++a) p[a] = to_double(row[1 + a]);
    data.add(p, to_double(row[1 + dimension]));
  }
  return data;
}

PointList parse_plan_points(const std::string& text, int dimension) {
  PointList out;
  for (const auto& row : csv_rows(text, static_cast<std::size_t>(dimension) + 3)) {
    Point p = Point::Zero();
    for (int a = 0; a < dimension; ++a) p[a] = to_double(row[1 + a]);
    out.push_back(p);
  }
  return out;
}

void analyze_run(const fs::path& dir, double eta) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw ConfigError(manifest_path.string(), "missing manifest");
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string(), std::string("corrupted manifest: ") + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("files") || !manifest["files"].is_object() ||
      !manifest.contains("summary")) {
    throw ConfigError(manifest_path.string(), "corrupted manifest: missing files or summary");
  }
  for (const auto& [name, hash] : manifest["files"].items()) {
    const auto path = dir / name;
    if (!fs::exists(path)) throw ConfigError(path.string(), "listed in manifest but missing");
    if (!hash.is_string() || sha256_file(path) != hash.get<std::string>()) {
      throw ConfigError(path.string(), "content hash does not match the manifest");
    }
  }

  const auto config = parse_config(json::parse(read_file(dir / "config.json")));
  const auto& e = config.episode;
  const int dim = e.field.dimension;
  const TestGrid grid = make_grid(e);
  const Dataset data = parse_measurements_csv(read_file(dir / "measurements.csv"), dim);
  const double lipschitz = manifest["summary"].at("lipschitz").get<double>();
  const fs::path out = dir / "analysis";
  fs::create_directories(out);

  json info = {{"available", false}};
  std::string spectra = "set,index,eigenvalue\n";
  if (fs::exists(dir / "plan_initial.csv")) {
    const auto greedy = parse_plan_points(read_file(dir / "plan_initial.csv"), dim);
    if (greedy.size() == data.size()) {
      const auto report = info_loss(e.kernel(), greedy, data.locations);
      info = {{"available", true},
              {"gamma_g", report.gamma_g},
              {"gamma_s", report.gamma_s},
              {"delta_gamma", report.delta_gamma},
              {"lower_bound_ratio", report.lower_bound_ratio},
              {"relocations", manifest["summary"].at("relocations")}};
      for (Eigen::Index i = 0; i < report.eig_g.size(); ++i) {
        spectra += fmt::format("greedy,{},{}\n", i, report.eig_g[i]);
      }
      for (Eigen::Index i = 0; i < report.eig_s.size(); ++i) {
        spectra += fmt::format("executed,{},{}\n", i, report.eig_s[i]);
      }
    } else {
      info["reason"] = "executed set is shorter than the plan";
    }
  } else {
    info["reason"] = "no offline plan in this run mode";
  }
  write_file(out / "info_report.json", info.dump(2) + "\n");
  write_file(out / "spectra.csv", spectra);

  json convergence = {{"available", false}, {"reason", "run has no posterior snapshots"}};
  std::string rmse = "step,rmse\n";
  if (fs::exists(dir / "snapshots.csv")) {
    const auto snapshots = parse_snapshots_csv(read_file(dir / "snapshots.csv"));
    const ConfidenceSchedule schedule{e.delta, e.pi_rule, lipschitz};
    const auto report = convergence_audit(snapshots, e.field, schedule, grid, e.f_bar, eta);
    std::size_t certified_final = 0;
    for (int t : report.first_certified) certified_final += t >= 0 ? 1 : 0;
    convergence = {{"available", true},
                   {"event_held", report.event_held},
                   {"event_violations", report.event_violations},
                   {"first_event_violation", report.first_event_violation
                                                 ? json(*report.first_event_violation)
                                                 : json(nullptr)},
                   {"soundness_violations", report.soundness_violations},
                   {"sound", report.sound()},
                   {"persistence_breaks", report.persistence_breaks},
                   {"interior_breaks", report.interior_breaks},
                   {"ever_certified", certified_final},
                   {"interior_size", report.interior.size()},
                   {"t_star", report.t_star ? json(*report.t_star) : json(nullptr)},
                   {"settled", report.settled ? json(*report.settled) : json(nullptr)},
                   {"horizon", report.horizon},
                   {"eta", eta}};
    for (const auto& p : rmse_series(snapshots, e.field, grid, e.f_bar)) {
      rmse += fmt::format("{},{}\n", p.step, p.rmse);
    }
  }
  write_file(out / "convergence_report.json", convergence.dump(2) + "\n");
  write_file(out / "rmse.csv", rmse);
}

}  // namespace safemap
