#include "weasel/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace weasel {

int Dataset::class_label(const std::string& name) const {
  for (size_t i = 0; i < class_names.size(); ++i) {
    if (class_names[i] == name) return static_cast<int>(i) + 1;
  }
  throw DataError("class '" + name + "' not in dataset '" + this->name + "' vocabulary");
}

std::vector<int> FoldSplit::validation_indices(int fold) const {
  std::vector<int> out;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> FoldSplit::training_indices(int fold) const {
  std::vector<int> out;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

DenseMask binarize_mask(const MultiMask& mask, int foreground_label) {
  DenseMask out;
  out.height = mask.height;
  out.width = mask.width;
  out.labels.resize(mask.labels.size());
  for (size_t i = 0; i < mask.labels.size(); ++i) {
    out.labels[i] = mask.labels[i] == foreground_label ? 1 : 0;
  }
  return out;
}

std::vector<LabeledPair> binarize(const Dataset& dataset, const std::string& foreground) {
  const int label = dataset.class_label(foreground);
  std::vector<LabeledPair> out;
  out.reserve(dataset.samples.size());
  for (const Sample& s : dataset.samples) {
    out.push_back({s.id, s.image, binarize_mask(s.mask, label)});
  }
  return out;
}

Image resize_image(const Image& image, int side) {
  if (image.height == side && image.width == side) return image;
  Image out;
  out.height = side;
  out.width = side;
  out.pix.resize(static_cast<size_t>(side) * side);
  const double sy = static_cast<double>(image.height) / side;
  const double sx = static_cast<double>(image.width) / side;
  for (int r = 0; r < side; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    if (fy < 0) fy = 0;
    int y0 = static_cast<int>(std::floor(fy));
    if (y0 > image.height - 1) y0 = image.height - 1;
    int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int c = 0; c < side; ++c) {
      double fx = (c + 0.5) * sx - 0.5;
      if (fx < 0) fx = 0;
      int x0 = static_cast<int>(std::floor(fx));
      if (x0 > image.width - 1) x0 = image.width - 1;
      int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      const double top = image.at(y0, x0) * (1.0 - wx) + image.at(y0, x1) * wx;
      const double bot = image.at(y1, x0) * (1.0 - wx) + image.at(y1, x1) * wx;
      out.at(r, c) = top * (1.0 - wy) + bot * wy;
    }
  }
  return out;
}

DenseMask resize_mask(const DenseMask& mask, int side) {
  if (mask.height == side && mask.width == side) return mask;
  DenseMask out;
  out.height = side;
  out.width = side;
  out.labels.resize(static_cast<size_t>(side) * side);
  const double sy = static_cast<double>(mask.height) / side;
  const double sx = static_cast<double>(mask.width) / side;
  for (int r = 0; r < side; ++r) {
    int y = static_cast<int>(std::floor((r + 0.5) * sy));
    y = std::clamp(y, 0, mask.height - 1);
    for (int c = 0; c < side; ++c) {
      int x = static_cast<int>(std::floor((c + 0.5) * sx));
      x = std::clamp(x, 0, mask.width - 1);
      out.at(r, c) = mask.at(y, x);
    }
  }
  return out;
}

std::pair<Image, DenseMask> resize_pair(const Image& image, const DenseMask& mask,
                                        int side) {
  if (side < 8) throw DataError("resize_pair: side must be >= 8");
  if (image.height != mask.height || image.width != mask.width) {
    throw DataError("resize_pair: image/mask shape mismatch");
  }
  return {resize_image(image, side), resize_mask(mask, side)};
}

FoldSplit make_folds(int dataset_size, int fold_count, std::uint64_t seed) {
  if (dataset_size < fold_count) {
    throw DataError("make_folds: dataset size " + std::to_string(dataset_size) +
                    " smaller than fold count " + std::to_string(fold_count));
  }
  Rng rng(derive_seed(seed, "folds"));
  const std::vector<int> perm = rng.permutation(dataset_size);
  FoldSplit split;
  split.fold_count = fold_count;
  split.assignments.resize(dataset_size);
  for (int i = 0; i < dataset_size; ++i) {
    split.assignments[perm[i]] = i % fold_count;
  }
  return split;
}

MetaDataset build_meta_dataset(const std::vector<SegTask>& all_tasks,
                               const std::string& held_out_id) {
  const SegTask* held = nullptr;
  for (const SegTask& t : all_tasks) {
    if (t.id == held_out_id) {
      held = &t;
      break;
    }
  }
  if (held == nullptr) {
    throw DataError("build_meta_dataset: unknown held-out task '" + held_out_id + "'");
  }
  MetaDataset meta;
  meta.held_out_id = held_out_id;
  for (const SegTask& t : all_tasks) {
    if (t.dataset_name == held->dataset_name && t.class_name == held->class_name) continue;
    meta.tasks.push_back(t);
  }
  if (meta.tasks.empty()) {
    throw DataError("build_meta_dataset: no tasks left after holding out '" +
                    held_out_id + "'");
  }
  meta.sampling_weights.assign(meta.tasks.size(), 1.0 / meta.tasks.size());
  return meta;
}

void validate_task(const SegTask& task) {
  std::set<std::string> sup;
  for (const LabeledPair& p : task.support) sup.insert(p.id);
  for (const LabeledPair& p : task.query) {
    if (sup.count(p.id)) {
      throw DataError("task '" + task.id + "': sample '" + p.id +
                      "' appears in both support and query");
    }
  }
}

std::vector<SegTask> make_meta_tasks(const std::vector<Dataset>& datasets, int side,
                                     double support_fraction, std::uint64_t seed) {
  if (support_fraction <= 0.0 || support_fraction >= 1.0) {
    throw DataError("make_meta_tasks: support_fraction must lie in (0,1)");
  }
  std::vector<SegTask> tasks;
  for (const Dataset& ds : datasets) {
    for (const std::string& cls : ds.class_names) {
      SegTask task;
      task.id = ds.name + "/" + cls;
      task.dataset_name = ds.name;
      task.class_name = cls;
      std::vector<LabeledPair> pairs = binarize(ds, cls);
      for (LabeledPair& p : pairs) {
        auto [img, msk] = resize_pair(p.image, p.mask, side);
        p.id = ds.name + "/" + p.id;
        p.image = std::move(img);
        p.mask = std::move(msk);
      }
      const int n = static_cast<int>(pairs.size());
      if (n < 2) throw DataError("dataset '" + ds.name + "' too small to split");
      int n_sup = static_cast<int>(std::floor(n * support_fraction));
      n_sup = std::clamp(n_sup, 1, n - 1);
      Rng rng(derive_seed(seed, "task-split", task.id));
      const std::vector<int> perm = rng.permutation(n);
      for (int i = 0; i < n; ++i) {
        if (i < n_sup) {
          task.support.push_back(pairs[perm[i]]);
        } else {
          task.query.push_back(pairs[perm[i]]);
        }
      }
      validate_task(task);
      tasks.push_back(std::move(task));
    }
  }
  return tasks;
}

SegTask make_fold_task(const Dataset& dataset, const std::string& foreground, int side,
                       const FoldSplit& folds, int fold) {
  if (fold < 0 || fold >= folds.fold_count) throw DataError("make_fold_task: bad fold");
  if (folds.assignments.size() != dataset.samples.size()) {
    throw DataError("make_fold_task: fold split does not match dataset size");
  }
  std::vector<LabeledPair> pairs = binarize(dataset, foreground);
  for (LabeledPair& p : pairs) {
    auto [img, msk] = resize_pair(p.image, p.mask, side);
    p.id = dataset.name + "/" + p.id;
    p.image = std::move(img);
    p.mask = std::move(msk);
  }
  SegTask task;
  task.id = dataset.name + "/" + foreground;
  task.dataset_name = dataset.name;
  task.class_name = foreground;
  for (int i : folds.training_indices(fold)) task.support.push_back(pairs[i]);
  for (int i : folds.validation_indices(fold)) task.query.push_back(pairs[i]);
  validate_task(task);
  return task;
}

}  // namespace weasel
