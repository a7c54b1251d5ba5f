#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "weasel/data.hpp"

namespace weasel {

/// 8-bit grayscale PNG payload. Images store intensity/255; masks store the
/// raw byte value (class label, or {0,1,255} for sparse masks).
struct Gray8 {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bytes;
};

Gray8 read_gray_png(const std::filesystem::path& path);
void write_gray_png(const std::filesystem::path& path, const Gray8& img);

Image image_from_gray(const Gray8& g);
Gray8 gray_from_image(const Image& img);

void save_sparse_png(const std::filesystem::path& path, const SparseMask& mask);
SparseMask load_sparse_png(const std::filesystem::path& path);

/// Read `<root>/classes.txt` ("label<TAB>name" per line; label 0 =
/// background may be listed or omitted).
std::map<int, std::string> read_class_map(const std::filesystem::path& root);

/// Load one dataset from `<root>/images/*.png` + `<root>/masks/*.png`.
/// Every image must have a mask of identical shape (and vice versa), and all
/// mask values must be 0 or a label in class_map.
Dataset ingest_dataset(const std::filesystem::path& root,
                       const std::map<int, std::string>& class_map);

/// Convenience: read the class map from disk, then ingest.
Dataset ingest_dataset(const std::filesystem::path& root);

}  // namespace weasel
