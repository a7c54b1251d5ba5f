#pragma once

#include <cstdint>
#include <string>

#include "weasel/data.hpp"

namespace weasel {

/// Annotation simulator parameters. Points labels n random pixels per class;
/// Grid labels a lattice with spacing s; Dense keeps every pixel.
struct SparsitySpec {
  enum class Kind { points, grid, dense };
  Kind kind = Kind::dense;
  int param = 0;  // n for points, s for grid

  static SparsitySpec points_n(int n) { return {Kind::points, n}; }
  static SparsitySpec grid_s(int s) { return {Kind::grid, s}; }
  static SparsitySpec dense() { return {Kind::dense, 0}; }

  std::string tag() const;                      // "points_n5" / "grid_s8" / "dense"
  static SparsitySpec parse(const std::string&);  // "points:5" / "grid:8" / "dense"
  void validate() const;
  bool operator==(const SparsitySpec&) const = default;
};

/// Points annotation: min(n,|fg|) foreground and min(n,|bg|) background
/// pixels sampled uniformly without replacement; everything else unknown.
SparseMask points(const DenseMask& dense, int n, std::uint64_t seed);

/// Grid annotation: per-axis offsets drawn uniformly from {0..s-1}, then
/// every lattice pixel is labeled with its true class.
SparseMask grid(const DenseMask& dense, int s, std::uint64_t seed);

/// Grid with explicit offsets; exposed so the lattice geometry is testable.
SparseMask grid_at_offsets(const DenseMask& dense, int s, int offset_r, int offset_c);

/// Dense labels routed through the sparse code path: zero unknown pixels.
SparseMask densify_passthrough(const DenseMask& dense);

SparseMask sparsify(const DenseMask& dense, const SparsitySpec& spec, std::uint64_t seed);

/// Annotation-budget accounting: one "user input" per positively labeled
/// (foreground) pixel.
long count_inputs(const SparseMask& sparse);

/// Fraction of pixels carrying any label.
double labeled_fraction(const SparseMask& sparse);

/// The per-image annotation seed. Pure function of the experiment seed and
/// the image identity, so every method sees byte-identical sparse labels.
std::uint64_t per_image_seed(std::uint64_t experiment_seed, const std::string& image_id);

}  // namespace weasel
