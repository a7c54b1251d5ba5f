#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "weasel/common.hpp"

namespace weasel {

constexpr std::uint8_t kUnknownLabel = 255;

/// Single-channel image, row-major, intensities in [0,1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pix;

  double at(int r, int c) const { return pix[static_cast<size_t>(r) * width + c]; }
  double& at(int r, int c) { return pix[static_cast<size_t>(r) * width + c]; }
};

/// Binary mask, values in {0,1}, same geometry as its paired image.
struct DenseMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  std::uint8_t at(int r, int c) const { return labels[static_cast<size_t>(r) * width + c]; }
  std::uint8_t& at(int r, int c) { return labels[static_cast<size_t>(r) * width + c]; }
};

/// Multi-class mask with labels in 0..C (0 = background).
struct MultiMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;
};

/// Ternary per-pixel annotation: 0 background, 1 foreground, 255 unknown.
struct SparseMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  std::uint8_t at(int r, int c) const { return labels[static_cast<size_t>(r) * width + c]; }
  std::uint8_t& at(int r, int c) { return labels[static_cast<size_t>(r) * width + c]; }
};

struct Sample {
  std::string id;
  Image image;
  MultiMask mask;
};

struct Dataset {
  std::string name;
  std::vector<Sample> samples;
  // class_names[i] is the name of label i+1; label 0 is background.
  std::vector<std::string> class_names;

  int class_label(const std::string& name) const;  // throws DataError if absent
};

/// An image with a binarized ground-truth mask.
struct LabeledPair {
  std::string id;
  Image image;
  DenseMask mask;
};

/// Segmentation task: disjoint support and query pools for one
/// (dataset, class) pair. Pools hold dense labels; sparsification happens
/// at episode/tuning time.
struct SegTask {
  std::string id;  // "<dataset>/<class>"
  std::string dataset_name;
  std::string class_name;
  std::vector<LabeledPair> support;
  std::vector<LabeledPair> query;
};

struct MetaDataset {
  std::vector<SegTask> tasks;
  std::vector<double> sampling_weights;  // sums to 1
  std::string held_out_id;
};

struct FoldSplit {
  int fold_count = 5;
  std::vector<int> assignments;  // sample index -> fold index

  std::vector<int> validation_indices(int fold) const;
  std::vector<int> training_indices(int fold) const;
};

// --- task_store operations --------------------------------------------------

/// Binarize a multi-class dataset against one foreground class: output is 1
/// exactly where the mask equals that class label, 0 everywhere else.
std::vector<LabeledPair> binarize(const Dataset& dataset, const std::string& foreground);

/// Binarize a single multi-class mask.
DenseMask binarize_mask(const MultiMask& mask, int foreground_label);

Image resize_image(const Image& image, int side);
DenseMask resize_mask(const DenseMask& mask, int side);

/// Resize an (image, mask) pair to side x side. The image is resampled
/// bilinearly, the mask by nearest label so it stays binary. Equal-size
/// inputs are returned bit-identically.
std::pair<Image, DenseMask> resize_pair(const Image& image, const DenseMask& mask,
                                        int side = 128);

/// Deterministic k-fold assignment; fold sizes differ by at most one.
FoldSplit make_folds(int dataset_size, int fold_count, std::uint64_t seed);

/// Leave-one-task-out assembly: drops every task whose (dataset, class) pair
/// matches the held-out task's pair, keeps everything else with uniform
/// sampling weights.
MetaDataset build_meta_dataset(const std::vector<SegTask>& all_tasks,
                               const std::string& held_out_id);

/// Expand datasets into one SegTask per (dataset, class), resized to `side`,
/// with each task's samples split into disjoint support/query pools.
/// `support_fraction` of the samples (rounded down, at least 1 and at most
/// n-1) form the support pool under a seed-derived permutation.
std::vector<SegTask> make_meta_tasks(const std::vector<Dataset>& datasets, int side,
                                     double support_fraction, std::uint64_t seed);

/// Few-shot view of one (dataset, class) pair for one cross-validation fold:
/// support = training partition, query = entire validation partition, both
/// resized to `side`.
SegTask make_fold_task(const Dataset& dataset, const std::string& foreground, int side,
                       const FoldSplit& folds, int fold);

void validate_task(const SegTask& task);  // support/query identity disjointness

}  // namespace weasel
