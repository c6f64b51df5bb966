#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pshape/cloud.hpp"
#include "pshape/models.hpp"

namespace pshape {

// ---------------------------------------------------------------------------
// Cloud files
// ---------------------------------------------------------------------------

// ASCII PLY (element vertex with x,y,z float/double properties) or CSV with
// an exact `x,y,z` header. No normalization is applied. Parse errors carry
// the file name and line number.
PointCloud load_cloud(const std::string& path);

// Writes an ASCII PLY. When `quality` is given (one value per point), it is
// emitted as an extra vertex property for external visualization.
void save_cloud(const std::string& path, const PointCloud& cloud,
                const std::vector<double>* quality = nullptr);

// ---------------------------------------------------------------------------
// Dataset manifests
// ---------------------------------------------------------------------------

struct ManifestSample {
  std::string subject;
  std::vector<std::string> cloud_paths;  // relative to the manifest location
  std::optional<Index> label;
  std::optional<double> target;
  std::vector<double> condition;      // empty = unconditioned
  std::vector<Index> bump_vertices;   // ground-truth deformed ids (phantoms)
};

struct DatasetManifest {
  std::vector<std::string> structures;
  std::vector<ManifestSample> samples;
  std::string base_dir;  // resolved at load time, not serialized

  std::string resolve(const std::string& relative) const;
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// Subject-respecting split: subjects (not samples) are shuffled by `seed`
// and partitioned by the given ratios, so no subject spans splits.
struct SplitManifests {
  DatasetManifest train, val, test;
};
SplitManifests split(const DatasetManifest& manifest, const std::array<double, 3>& ratios,
                     std::uint64_t seed);

// Loads, optionally normalizes, and resamples every referenced cloud so the
// result is directly consumable by a model. Conditions are taken from the
// manifest when present, otherwise derived as a one-hot of the label when
// condition_dim > 0.
struct MaterializeOptions {
  Index points = 512;
  bool normalize = true;
  Index condition_dim = 0;
  std::uint64_t seed = 1;
};
std::vector<Sample> materialize(const DatasetManifest& manifest, const MaterializeOptions& options);

// ---------------------------------------------------------------------------
// Synthetic phantom datasets
// ---------------------------------------------------------------------------

// Class-conditioned deformed-ellipsoid clouds standing in for restricted
// clinical data. Every sample derives from (seed, sample index), so datasets
// are byte-reproducible.
struct PhantomSpec {
  std::array<double, 3> radii{1.0, 0.8, 0.6};
  std::array<double, 3> bump_center{1.0, 0.0, 0.0};
  double bump_angular_radius = 0.5235987755982988;  // 30 degrees
  std::vector<double> bump_amplitudes{0.0, 0.25};   // per class, relative to radii[0]
  double deform_magnitude = 0.15;   // per-sample smooth deformation scale ("age" target)
  double rotation_range = 0.35;     // +- radians per axis
  double jitter_sigma = 0.01;
  Index points = 512;
  std::uint64_t seed = 1;

  void validate() const;
};

// Writes `count_per_class` samples per class (classes <= bump amplitudes)
// with `structures` clouds each (1 = ellipsoid, 2 = ellipsoid + torus) under
// out_dir, and returns the manifest written to out_dir/manifest.json. The
// regression target is the smooth-deformation magnitude actually used.
DatasetManifest make_phantom_dataset(const PhantomSpec& spec, Index count_per_class, Index classes,
                                     Index structures, const std::string& out_dir);

// Ground-truth membership test for the class bump region (directions within
// the angular cap around bump_center).
bool in_bump_region(const PhantomSpec& spec, const double* point);

nlohmann::json to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const nlohmann::json& j);

}  // namespace pshape
