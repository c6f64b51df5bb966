#include "pshape/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "pshape/errors.hpp"
#include "pshape/rng.hpp"

namespace pshape {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string loc(const std::string& path, int line) { return path + ":" + std::to_string(line); }

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0' && std::isfinite(out);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ' || s.back() == '\t')) {
    s.pop_back();
  }
  return s;
}

PointCloud load_ply(const std::string& path, std::ifstream& in) {
  int line_no = 1;  // "ply" was line 1
  std::string line;
  Index vertex_count = -1;
  std::vector<std::string> vertex_props;
  bool in_vertex_element = false;
  bool saw_format = false;

  while (std::getline(in, line)) {
    ++line_no;
    line = rstrip(line);
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0] == "comment") continue;
    if (tokens[0] == "format") {
      if (tokens.size() < 2 || tokens[1] != "ascii") {
        throw DataError(loc(path, line_no) + ": unsupported PLY format '" +
                        (tokens.size() > 1 ? tokens[1] : "?") + "' (ASCII only)");
      }
      saw_format = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() != 3) throw DataError(loc(path, line_no) + ": malformed element declaration");
      if (tokens[1] == "vertex") {
        if (vertex_count >= 0) throw DataError(loc(path, line_no) + ": duplicate vertex element");
        double n;
        if (!parse_double(tokens[2], n) || n < 0 || n != std::floor(n)) {
          throw DataError(loc(path, line_no) + ": bad vertex count '" + tokens[2] + "'");
        }
        vertex_count = static_cast<Index>(n);
        in_vertex_element = true;
      } else {
        if (vertex_count < 0) {
          throw DataError(loc(path, line_no) + ": vertex element must come first");
        }
        in_vertex_element = false;
      }
    } else if (tokens[0] == "property") {
      if (in_vertex_element) {
        if (tokens.size() != 3) {
          throw DataError(loc(path, line_no) + ": vertex properties must be scalar");
        }
        if (tokens[1] != "float" && tokens[1] != "double" && tokens[1] != "float32" &&
            tokens[1] != "float64") {
          throw DataError(loc(path, line_no) + ": vertex property '" + tokens[2] +
                          "' has unsupported type '" + tokens[1] + "'");
        }
        vertex_props.push_back(tokens[2]);
      }
    } else if (tokens[0] == "end_header") {
      break;
    } else {
      throw DataError(loc(path, line_no) + ": unexpected header line '" + line + "'");
    }
  }
  if (!saw_format) throw DataError(path + ": missing PLY format declaration");
  if (vertex_count < 0) throw DataError(path + ": missing vertex element");

  Index ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i] == "x") ix = static_cast<Index>(i);
    if (vertex_props[i] == "y") iy = static_cast<Index>(i);
    if (vertex_props[i] == "z") iz = static_cast<Index>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw DataError(path + ": vertex element lacks x,y,z properties");

  PointCloud cloud(vertex_count, 3);
  for (Index v = 0; v < vertex_count; ++v) {
    if (!std::getline(in, line)) {
      throw DataError(path + ": expected " + std::to_string(vertex_count) + " vertices, file ended after " +
                      std::to_string(v));
    }
    ++line_no;
    const auto tokens = split_ws(rstrip(line));
    if (tokens.size() != vertex_props.size()) {
      throw DataError(loc(path, line_no) + ": expected " + std::to_string(vertex_props.size()) +
                      " values, got " + std::to_string(tokens.size()));
    }
    double x, y, z;
    if (!parse_double(tokens[static_cast<std::size_t>(ix)], x) ||
        !parse_double(tokens[static_cast<std::size_t>(iy)], y) ||
        !parse_double(tokens[static_cast<std::size_t>(iz)], z)) {
      throw DataError(loc(path, line_no) + ": non-numeric vertex value");
    }
    cloud(v, 0) = x;
    cloud(v, 1) = y;
    cloud(v, 2) = z;
  }
  return cloud;
}

PointCloud load_csv(const std::string& path, std::ifstream& in, const std::string& header) {
  if (rstrip(header) != "x,y,z") {
    throw DataError(loc(path, 1) + ": CSV header must be exactly 'x,y,z', got '" + rstrip(header) + "'");
  }
  std::vector<double> values;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = rstrip(line);
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    int count = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      if (!parse_double(cell, v)) {
        throw DataError(loc(path, line_no) + ": non-numeric value '" + cell + "'");
      }
      values.push_back(v);
      ++count;
    }
    if (count != 3) {
      throw DataError(loc(path, line_no) + ": expected 3 values per row, got " + std::to_string(count));
    }
  }
  if (values.empty()) throw DataError(path + ": no data rows");
  const Index rows = static_cast<Index>(values.size() / 3);
  return PointCloud(rows, 3, std::move(values));
}

}  // namespace

PointCloud load_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open cloud file '" + path + "'");
  std::string first;
  if (!std::getline(in, first)) throw DataError(path + ": empty file");
  if (rstrip(first) == "ply") return load_ply(path, in);
  return load_csv(path, in, first);
}

void save_cloud(const std::string& path, const PointCloud& cloud, const std::vector<double>* quality) {
  if (cloud.cols() != 3) throw DimensionError("cloud must be Nx3, got " + cloud.shape_str());
  if (quality && static_cast<Index>(quality->size()) != cloud.rows()) {
    throw DimensionError("quality vector length " + std::to_string(quality->size()) +
                         " != point count " + std::to_string(cloud.rows()));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.rows() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (quality) out << "property double quality\n";
  out << "end_header\n";
  char buf[160];
  for (Index i = 0; i < cloud.rows(); ++i) {
    const double* p = cloud.row(i);
    if (quality) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", p[0], p[1], p[2],
                    (*quality)[static_cast<std::size_t>(i)]);
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
    }
    out << buf;
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::string DatasetManifest::resolve(const std::string& relative) const {
  if (relative.empty()) throw DataError("empty cloud path in manifest");
  fs::path p(relative);
  if (p.is_absolute()) return relative;
  return (fs::path(base_dir) / p).string();
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("manifest '" + path + "' is not valid JSON: " + e.what());
  }

  DatasetManifest m;
  m.base_dir = fs::path(path).parent_path().string();
  if (m.base_dir.empty()) m.base_dir = ".";
  try {
    m.structures = j.at("structures").get<std::vector<std::string>>();
    for (const auto& js : j.at("samples")) {
      ManifestSample s;
      s.subject = js.at("subject").get<std::string>();
      s.cloud_paths = js.at("clouds").get<std::vector<std::string>>();
      if (js.contains("label") && !js.at("label").is_null()) s.label = js.at("label").get<Index>();
      if (js.contains("target") && !js.at("target").is_null()) s.target = js.at("target").get<double>();
      if (js.contains("condition")) s.condition = js.at("condition").get<std::vector<double>>();
      if (js.contains("bump_vertices")) s.bump_vertices = js.at("bump_vertices").get<std::vector<Index>>();
      m.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw DataError("manifest '" + path + "' has invalid structure: " + e.what());
  }
  if (m.structures.empty()) throw DataError("manifest '" + path + "' declares no structures");
  for (const auto& s : m.samples) {
    if (s.cloud_paths.size() != m.structures.size()) {
      throw DataError("manifest sample '" + s.subject + "' has " + std::to_string(s.cloud_paths.size()) +
                      " clouds, expected " + std::to_string(m.structures.size()));
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  json j;
  j["structures"] = manifest.structures;
  json samples = json::array();
  for (const auto& s : manifest.samples) {
    json js;
    js["subject"] = s.subject;
    js["clouds"] = s.cloud_paths;
    if (s.label) js["label"] = *s.label;
    if (s.target) js["target"] = *s.target;
    if (!s.condition.empty()) js["condition"] = s.condition;
    if (!s.bump_vertices.empty()) js["bump_vertices"] = s.bump_vertices;
    samples.push_back(std::move(js));
  }
  j["samples"] = std::move(samples);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open manifest '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw DataError("failed writing manifest '" + path + "'");
}

SplitManifests split(const DatasetManifest& manifest, const std::array<double, 3>& ratios,
                     std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  std::vector<std::string> subjects;
  for (const auto& s : manifest.samples) {
    if (std::find(subjects.begin(), subjects.end(), s.subject) == subjects.end()) {
      subjects.push_back(s.subject);
    }
  }
  int nonzero = 0;
  for (double r : ratios)
    if (r > 0) ++nonzero;
  if (static_cast<int>(subjects.size()) < nonzero) {
    throw DataError("only " + std::to_string(subjects.size()) + " subjects for " +
                    std::to_string(nonzero) + " splits");
  }

  Rng rng(Rng::mix(seed, 0x73706c6974ULL));
  for (std::size_t i = subjects.size(); i > 1; --i) {
    std::swap(subjects[i - 1], subjects[rng.uniform_index(i)]);
  }

  // Largest-remainder apportionment of subjects to splits.
  const std::size_t total = subjects.size();
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = ratios[static_cast<std::size_t>(k)] * static_cast<double>(total);
    counts[static_cast<std::size_t>(k)] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainders[static_cast<std::size_t>(k)] = exact - std::floor(exact + 1e-9);
    assigned += counts[static_cast<std::size_t>(k)];
  }
  while (assigned < total) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (remainders[static_cast<std::size_t>(k)] > remainders[static_cast<std::size_t>(best)] + 1e-12) {
        best = k;
      }
    }
    counts[static_cast<std::size_t>(best)] += 1;
    remainders[static_cast<std::size_t>(best)] = -1.0;
    ++assigned;
  }

  enum { kTrain = 0, kVal = 1, kTest = 2 };
  std::unordered_map<std::string, int> split_of;
  std::size_t cursor = 0;
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < counts[static_cast<std::size_t>(k)]; ++i) {
      split_of[subjects[cursor++]] = k;
    }
  }

  SplitManifests out;
  for (auto* m : {&out.train, &out.val, &out.test}) {
    m->structures = manifest.structures;
    m->base_dir = manifest.base_dir;
  }
  for (const auto& s : manifest.samples) {
    switch (split_of.at(s.subject)) {
      case kTrain: out.train.samples.push_back(s); break;
      case kVal: out.val.samples.push_back(s); break;
      default: out.test.samples.push_back(s); break;
    }
  }
  return out;
}

std::vector<Sample> materialize(const DatasetManifest& manifest, const MaterializeOptions& options) {
  std::vector<Sample> out(manifest.samples.size());
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const ManifestSample& ms = manifest.samples[i];
    Sample s;
    for (std::size_t st = 0; st < ms.cloud_paths.size(); ++st) {
      PointCloud cloud = load_cloud(manifest.resolve(ms.cloud_paths[st]));
      cloud = resample(cloud, options.points,
                       Rng::mix(options.seed, Rng::mix(static_cast<std::uint64_t>(i), st)));
      if (options.normalize) cloud = normalize(cloud);
      s.clouds.push_back(std::move(cloud));
    }
    s.label = ms.label;
    s.target = ms.target;
    if (options.condition_dim > 0) {
      if (!ms.condition.empty()) {
        if (static_cast<Index>(ms.condition.size()) != options.condition_dim) {
          throw DataError("sample '" + ms.subject + "' condition has dimension " +
                          std::to_string(ms.condition.size()) + ", expected " +
                          std::to_string(options.condition_dim));
        }
        s.condition.values = ms.condition;
      } else if (ms.label) {
        s.condition = ConditionVector::one_hot(*ms.label, options.condition_dim);
      } else {
        s.condition = ConditionVector::zeros(options.condition_dim);
      }
    }
    out[i] = std::move(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phantom generator
// ---------------------------------------------------------------------------

void PhantomSpec::validate() const {
  for (double r : radii)
    if (r <= 0) throw ConfigError("phantom radii must be positive");
  if (bump_angular_radius <= 0) throw ConfigError("phantom bump_angular_radius must be positive");
  if (bump_amplitudes.empty()) throw ConfigError("phantom needs at least one class amplitude");
  for (double a : bump_amplitudes)
    if (!std::isfinite(a)) throw ConfigError("phantom amplitudes must be finite");
  if (deform_magnitude < 0 || jitter_sigma < 0 || rotation_range < 0) {
    throw ConfigError("phantom magnitudes must be nonnegative");
  }
  if (points < 1) throw ConfigError("phantom points must be >= 1");
}

bool in_bump_region(const PhantomSpec& spec, const double* point) {
  const double norm = std::sqrt(point[0] * point[0] + point[1] * point[1] + point[2] * point[2]);
  if (norm <= 0) return false;
  double cn = std::sqrt(spec.bump_center[0] * spec.bump_center[0] +
                        spec.bump_center[1] * spec.bump_center[1] +
                        spec.bump_center[2] * spec.bump_center[2]);
  if (cn <= 0) return false;
  double dot = (point[0] * spec.bump_center[0] + point[1] * spec.bump_center[1] +
                point[2] * spec.bump_center[2]) /
               (norm * cn);
  dot = std::clamp(dot, -1.0, 1.0);
  return std::acos(dot) < spec.bump_angular_radius;
}

namespace {

struct DeformField {
  std::array<std::array<double, 3>, 3> dirs;
  std::array<double, 3> freqs;
  std::array<double, 3> phases;

  // Smooth low-frequency scalar field on the unit sphere.
  double operator()(const double* d) const {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double proj = d[0] * dirs[j][0] + d[1] * dirs[j][1] + d[2] * dirs[j][2];
      s += std::sin(freqs[j] * proj + phases[j]);
    }
    return s / 3.0;
  }
};

DeformField make_field(std::uint64_t seed) {
  Rng rng(Rng::mix(seed, 0x6669656c64ULL));
  DeformField f;
  for (int j = 0; j < 3; ++j) {
    double v[3] = {rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) + 1e-12;
    f.dirs[j] = {v[0] / n, v[1] / n, v[2] / n};
    f.freqs[j] = rng.uniform(1.5, 3.5);
    f.phases[j] = rng.uniform(0.0, 6.283185307179586);
  }
  return f;
}

void unit_sphere_dir(Rng& rng, double* d) {
  double n = 0.0;
  do {
    d[0] = rng.normal();
    d[1] = rng.normal();
    d[2] = rng.normal();
    n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  } while (n < 1e-9);
  d[0] /= n;
  d[1] /= n;
  d[2] /= n;
}

}  // namespace

DatasetManifest make_phantom_dataset(const PhantomSpec& spec, Index count_per_class, Index classes,
                                     Index structures, const std::string& out_dir) {
  spec.validate();
  if (count_per_class < 1) throw ConfigError("count_per_class must be >= 1");
  if (classes < 1 || classes > static_cast<Index>(spec.bump_amplitudes.size())) {
    throw ConfigError("classes must be in [1, " + std::to_string(spec.bump_amplitudes.size()) +
                      "] (one bump amplitude per class)");
  }
  if (structures < 1 || structures > 2) {
    throw ConfigError("phantom supports 1 (ellipsoid) or 2 (ellipsoid + torus) structures");
  }

  fs::create_directories(fs::path(out_dir) / "clouds");

  const DeformField field = make_field(spec.seed);
  const double a = spec.radii[0], b = spec.radii[1], c = spec.radii[2];
  double center[3] = {spec.bump_center[0], spec.bump_center[1], spec.bump_center[2]};
  {
    const double n =
        std::sqrt(center[0] * center[0] + center[1] * center[1] + center[2] * center[2]);
    if (n <= 0) throw ConfigError("phantom bump_center must be nonzero");
    center[0] /= n;
    center[1] /= n;
    center[2] /= n;
  }

  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  manifest.structures = {"ellipsoid"};
  if (structures == 2) manifest.structures.push_back("torus");

  const Index total = count_per_class * classes;
  for (Index idx = 0; idx < total; ++idx) {
    const Index cls = idx % classes;  // interleaved so contiguous slices stay balanced
    const double amp = spec.bump_amplitudes[static_cast<std::size_t>(cls)];
    Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(idx)));

    const double mag = rng.uniform() * spec.deform_magnitude;
    const std::array<double, 3> theta = {rng.uniform(-spec.rotation_range, spec.rotation_range),
                                         rng.uniform(-spec.rotation_range, spec.rotation_range),
                                         rng.uniform(-spec.rotation_range, spec.rotation_range)};
    const Tensor2 rot = rotation_matrix(theta);

    char subject[32];
    std::snprintf(subject, sizeof(subject), "s%04lld", static_cast<long long>(idx));

    ManifestSample ms;
    ms.subject = subject;
    ms.label = cls;
    ms.target = mag;
    ms.condition = ConditionVector::one_hot(cls, classes).values;

    for (Index st = 0; st < structures; ++st) {
      PointCloud cloud(spec.points, 3);
      for (Index i = 0; i < spec.points; ++i) {
        double p[3];
        if (st == 0) {
          // Ellipsoid with a class-dependent radial bump.
          double d[3];
          unit_sphere_dir(rng, d);
          p[0] = a * d[0];
          p[1] = b * d[1];
          p[2] = c * d[2];
          const double dot =
              std::clamp(d[0] * center[0] + d[1] * center[1] + d[2] * center[2], -1.0, 1.0);
          const double gamma = std::acos(dot);
          if (gamma < spec.bump_angular_radius) {
            const double profile = std::cos(1.5707963267948966 * gamma / spec.bump_angular_radius);
            const double factor = 1.0 + amp * profile * profile;
            p[0] *= factor;
            p[1] *= factor;
            p[2] *= factor;
            ms.bump_vertices.push_back(i);
          }
          const double s = field(d);
          const double warp = 1.0 + mag * s;
          p[0] *= warp;
          p[1] *= warp;
          p[2] *= warp;
        } else {
          // Torus whose tube radius carries a milder class effect; shares the
          // sample's smooth deformation so structures are jointly encoded.
          const double ring = 0.7 * a;
          const double tube = 0.25 * a * (1.0 + 0.5 * amp);
          const double u = rng.uniform(0.0, 6.283185307179586);
          const double v = rng.uniform(0.0, 6.283185307179586);
          p[0] = (ring + tube * std::cos(v)) * std::cos(u);
          p[1] = (ring + tube * std::cos(v)) * std::sin(u);
          p[2] = tube * std::sin(v);
          const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) + 1e-12;
          const double d[3] = {p[0] / n, p[1] / n, p[2] / n};
          const double warp = 1.0 + mag * field(d);
          p[0] *= warp;
          p[1] *= warp;
          p[2] *= warp;
        }
        // Shared per-sample pose, then sensor-style jitter.
        double q[3];
        for (int r = 0; r < 3; ++r) q[r] = rot(r, 0) * p[0] + rot(r, 1) * p[1] + rot(r, 2) * p[2];
        for (int r = 0; r < 3; ++r) cloud(i, r) = q[r] + spec.jitter_sigma * rng.normal();
      }
      char filename[96];
      std::snprintf(filename, sizeof(filename), "clouds/%s_%s.ply", subject,
                    manifest.structures[static_cast<std::size_t>(st)].c_str());
      save_cloud((fs::path(out_dir) / filename).string(), cloud);
      ms.cloud_paths.push_back(filename);
    }
    manifest.samples.push_back(std::move(ms));
  }

  save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  return manifest;
}

}  // namespace pshape

namespace pshape {

nlohmann::json to_json(const PhantomSpec& spec) {
  json j;
  j["radii"] = {spec.radii[0], spec.radii[1], spec.radii[2]};
  j["bump_center"] = {spec.bump_center[0], spec.bump_center[1], spec.bump_center[2]};
  j["bump_angular_radius"] = spec.bump_angular_radius;
  j["bump_amplitudes"] = spec.bump_amplitudes;
  j["deform_magnitude"] = spec.deform_magnitude;
  j["rotation_range"] = spec.rotation_range;
  j["jitter_sigma"] = spec.jitter_sigma;
  j["points"] = spec.points;
  j["seed"] = spec.seed;
  return j;
}

PhantomSpec phantom_spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "radii",        "bump_center",      "bump_angular_radius", "bump_amplitudes",
      "deform_magnitude", "rotation_range", "jitter_sigma",      "points",
      "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown phantom spec key '" + it.key() + "'");
  }
  PhantomSpec spec;
  try {
    if (j.contains("radii")) {
      auto v = j.at("radii").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("phantom radii must have three entries");
      spec.radii = {v[0], v[1], v[2]};
    }
    if (j.contains("bump_center")) {
      auto v = j.at("bump_center").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("phantom bump_center must have three entries");
      spec.bump_center = {v[0], v[1], v[2]};
    }
    if (j.contains("bump_angular_radius")) spec.bump_angular_radius = j.at("bump_angular_radius").get<double>();
    if (j.contains("bump_amplitudes")) spec.bump_amplitudes = j.at("bump_amplitudes").get<std::vector<double>>();
    if (j.contains("deform_magnitude")) spec.deform_magnitude = j.at("deform_magnitude").get<double>();
    if (j.contains("rotation_range")) spec.rotation_range = j.at("rotation_range").get<double>();
    if (j.contains("jitter_sigma")) spec.jitter_sigma = j.at("jitter_sigma").get<double>();
    if (j.contains("points")) spec.points = j.at("points").get<Index>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid phantom spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace pshape
