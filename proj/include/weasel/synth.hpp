#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weasel/data.hpp"

namespace weasel {

/// Synthetic corpus description: one dataset per modality (background
/// texture family), each image containing one jittered instance of every
/// shape class with exact ground-truth masks.
struct SynthSpec {
  std::vector<std::string> modalities;  // from {"gradient","speckle","banded"}
  std::vector<std::string> classes;     // from {"ellipse","stripes","blob"}
  int images_per_dataset = 40;
  int side = 128;
  double noise = 0.04;

  void validate() const;
};

struct EllipseParams {
  double cx = 0, cy = 0;  // center (column, row)
  double a = 0, b = 0;    // semi-axes
  double phi = 0;         // rotation

  // Containment test for integer pixel (r, c); the rasterization rule.
  bool contains(int r, int c) const;
};

struct ShapeRecord {
  std::string class_name;
  std::vector<EllipseParams> ellipses;  // "ellipse": 1 entry; "blob": several
  // stripes geometry (class "stripes")
  double cx = 0, cy = 0, phi = 0, half_len = 0, half_wid = 0, period = 0, thickness = 0;
};

struct ImageRecord {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<ShapeRecord> shapes;
};

struct DatasetRecord {
  std::string name;
  std::vector<ImageRecord> images;
};

struct SynthManifest {
  std::uint64_t seed = 0;
  SynthSpec spec;
  std::vector<DatasetRecord> datasets;
};

/// Deterministic generator: identical spec+seed produce bit-identical
/// datasets. The manifest records per-image seeds and shape parameters.
std::vector<Dataset> synth_generate(const SynthSpec& spec, std::uint64_t seed,
                                    SynthManifest* manifest = nullptr);

}  // namespace weasel
