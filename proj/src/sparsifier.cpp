#include "weasel/sparsifier.hpp"

#include <algorithm>

namespace weasel {

std::string SparsitySpec::tag() const {
  switch (kind) {
    case Kind::points:
      return "points_n" + std::to_string(param);
    case Kind::grid:
      return "grid_s" + std::to_string(param);
    case Kind::dense:
      return "dense";
  }
  throw ConfigError("bad sparsity kind");
}

SparsitySpec SparsitySpec::parse(const std::string& text) {
  if (text == "dense") return dense();
  const size_t colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string num = text.substr(colon + 1);
    try {
      const int v = std::stoi(num);
      if (head == "points") return points_n(v);
      if (head == "grid") return grid_s(v);
    } catch (const std::exception&) {
      throw ConfigError("bad sparsity parameter in '" + text + "'");
    }
  }
  throw ConfigError("cannot parse sparsity '" + text +
                    "' (expected points:<n>, grid:<s> or dense)");
}

void SparsitySpec::validate() const {
  if (kind == Kind::points && param < 1) throw ConfigError("points: n must be >= 1");
  if (kind == Kind::grid && param < 2) throw ConfigError("grid: s must be >= 2");
}

SparseMask points(const DenseMask& dense, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("points: n must be >= 1");
  std::vector<int> fg, bg;
  for (size_t i = 0; i < dense.labels.size(); ++i) {
    if (dense.labels[i] == 1) {
      fg.push_back(static_cast<int>(i));
    } else {
      bg.push_back(static_cast<int>(i));
    }
  }
  SparseMask out;
  out.height = dense.height;
  out.width = dense.width;
  out.labels.assign(dense.labels.size(), kUnknownLabel);

  Rng rng(seed);
  const int n_fg = std::min<int>(n, static_cast<int>(fg.size()));
  const int n_bg = std::min<int>(n, static_cast<int>(bg.size()));
  for (int idx : rng.sample_without_replacement(static_cast<int>(fg.size()), n_fg)) {
    out.labels[fg[idx]] = 1;
  }
  for (int idx : rng.sample_without_replacement(static_cast<int>(bg.size()), n_bg)) {
    out.labels[bg[idx]] = 0;
  }
  return out;
}

SparseMask grid_at_offsets(const DenseMask& dense, int s, int offset_r, int offset_c) {
  if (s < 2) throw ConfigError("grid: s must be >= 2");
  if (s > std::min(dense.height, dense.width)) {
    throw ConfigError("grid: spacing " + std::to_string(s) + " exceeds image side");
  }
  SparseMask out;
  out.height = dense.height;
  out.width = dense.width;
  out.labels.assign(dense.labels.size(), kUnknownLabel);
  for (int r = offset_r; r < dense.height; r += s) {
    for (int c = offset_c; c < dense.width; c += s) {
      out.at(r, c) = dense.at(r, c);
    }
  }
  return out;
}

SparseMask grid(const DenseMask& dense, int s, std::uint64_t seed) {
  Rng rng(seed);
  const int offset_r = static_cast<int>(rng.uniform_int(s));
  const int offset_c = static_cast<int>(rng.uniform_int(s));
  return grid_at_offsets(dense, s, offset_r, offset_c);
}

SparseMask densify_passthrough(const DenseMask& dense) {
  SparseMask out;
  out.height = dense.height;
  out.width = dense.width;
  out.labels = dense.labels;
  return out;
}

SparseMask sparsify(const DenseMask& dense, const SparsitySpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case SparsitySpec::Kind::points:
      return points(dense, spec.param, seed);
    case SparsitySpec::Kind::grid:
      return grid(dense, spec.param, seed);
    case SparsitySpec::Kind::dense:
      return densify_passthrough(dense);
  }
  throw ConfigError("bad sparsity kind");
}

long count_inputs(const SparseMask& sparse) {
  long n = 0;
  for (std::uint8_t v : sparse.labels) {
    if (v == 1) ++n;
  }
  return n;
}

double labeled_fraction(const SparseMask& sparse) {
  if (sparse.labels.empty()) return 0.0;
  long known = 0;
  for (std::uint8_t v : sparse.labels) {
    if (v != kUnknownLabel) ++known;
  }
  return static_cast<double>(known) / static_cast<double>(sparse.labels.size());
}

std::uint64_t per_image_seed(std::uint64_t experiment_seed, const std::string& image_id) {
  return SeedStream(experiment_seed).add("sparse-labels").add(image_id).value;
}

}  // namespace weasel
