#include "weasel/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace weasel {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Gray8 read_gray_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw DataError("cannot open '" + path.string() + "'");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng: read struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng: info struct allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng: failed to read '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  // Normalize anything we might get handed to 8-bit single channel.
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_strip_16(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  Gray8 out;
  out.height = static_cast<int>(h);
  out.width = static_cast<int>(w);
  out.bytes.resize(static_cast<size_t>(h) * w);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 r = 0; r < h; ++r) rows[r] = out.bytes.data() + static_cast<size_t>(r) * w;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_gray_png(const std::filesystem::path& path, const Gray8& img) {
  std::filesystem::create_directories(path.parent_path());
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw DataError("cannot write '" + path.string() + "'");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng: write struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng: info struct allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng: failed to write '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // Fixed compression settings keep outputs byte-stable across runs.
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height);
  for (int r = 0; r < img.height; ++r) {
    rows[r] = const_cast<png_bytep>(img.bytes.data() + static_cast<size_t>(r) * img.width);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image image_from_gray(const Gray8& g) {
  Image img;
  img.height = g.height;
  img.width = g.width;
  img.pix.resize(g.bytes.size());
  for (size_t i = 0; i < g.bytes.size(); ++i) img.pix[i] = g.bytes[i] / 255.0;
  return img;
}

Gray8 gray_from_image(const Image& img) {
  Gray8 g;
  g.height = img.height;
  g.width = img.width;
  g.bytes.resize(img.pix.size());
  for (size_t i = 0; i < img.pix.size(); ++i) {
    const double v = std::clamp(img.pix[i], 0.0, 1.0);
    g.bytes[i] = static_cast<std::uint8_t>(v * 255.0 + 0.5);
  }
  return g;
}

void save_sparse_png(const std::filesystem::path& path, const SparseMask& mask) {
  Gray8 g;
  g.height = mask.height;
  g.width = mask.width;
  g.bytes = mask.labels;
  write_gray_png(path, g);
}

SparseMask load_sparse_png(const std::filesystem::path& path) {
  const Gray8 g = read_gray_png(path);
  for (std::uint8_t v : g.bytes) {
    if (v != 0 && v != 1 && v != kUnknownLabel) {
      throw DataError("sparse mask '" + path.string() + "' has invalid value " +
                      std::to_string(static_cast<int>(v)));
    }
  }
  SparseMask mask;
  mask.height = g.height;
  mask.width = g.width;
  mask.labels = g.bytes;
  return mask;
}

std::map<int, std::string> read_class_map(const std::filesystem::path& root) {
  const std::filesystem::path file = root / "classes.txt";
  std::ifstream in(file);
  if (!in) throw DataError("missing class map '" + file.string() + "'");
  std::map<int, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("malformed line in '" + file.string() + "': " + line);
    }
    const int label = std::stoi(line.substr(0, tab));
    out[label] = line.substr(tab + 1);
  }
  return out;
}

Dataset ingest_dataset(const std::filesystem::path& root,
                       const std::map<int, std::string>& class_map) {
  const std::filesystem::path img_dir = root / "images";
  const std::filesystem::path mask_dir = root / "masks";
  if (!std::filesystem::is_directory(img_dir) || !std::filesystem::is_directory(mask_dir)) {
    throw DataError("dataset not found at '" + root.string() +
                    "' (expected images/ and masks/)");
  }

  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(img_dir)) {
    if (entry.path().extension() == ".png") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw DataError("dataset '" + root.string() + "' has no images");

  std::set<std::string> mask_ids;
  for (const auto& entry : std::filesystem::directory_iterator(mask_dir)) {
    if (entry.path().extension() == ".png") mask_ids.insert(entry.path().stem().string());
  }
  for (const std::string& m : mask_ids) {
    if (!std::binary_search(ids.begin(), ids.end(), m)) {
      throw DataError("unpaired sample: mask '" + m + "' has no image");
    }
  }

  Dataset ds;
  ds.name = root.filename().string();
  int max_label = 0;
  for (const auto& [label, name] : class_map) {
    if (label > 0) max_label = std::max(max_label, label);
  }
  ds.class_names.resize(max_label);
  for (const auto& [label, name] : class_map) {
    if (label == 0) continue;
    ds.class_names[label - 1] = name;
  }
  for (const std::string& name : ds.class_names) {
    if (name.empty()) throw DataError("class map labels must be contiguous from 1");
  }

  for (const std::string& id : ids) {
    if (!mask_ids.count(id)) throw DataError("unpaired sample: image '" + id + "' has no mask");
    const Gray8 img = read_gray_png(img_dir / (id + ".png"));
    const Gray8 msk = read_gray_png(mask_dir / (id + ".png"));
    if (img.height != msk.height || img.width != msk.width) {
      throw DataError("shape mismatch between image and mask for '" + id + "'");
    }
    for (std::uint8_t v : msk.bytes) {
      if (v != 0 && !class_map.count(v)) {
        throw DataError("unknown label " + std::to_string(static_cast<int>(v)) +
                        " in mask '" + id + "'");
      }
    }
    Sample s;
    s.id = id;
    s.image = image_from_gray(img);
    s.mask = MultiMask{msk.height, msk.width, msk.bytes};
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset ingest_dataset(const std::filesystem::path& root) {
  return ingest_dataset(root, read_class_map(root));
}

}  // namespace weasel
