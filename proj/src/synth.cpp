#include "weasel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace weasel {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

const std::set<std::string> kKnownModalities = {"gradient", "speckle", "banded"};
const std::set<std::string> kKnownClasses = {"ellipse", "stripes", "blob"};

void paint_gradient(Image& img, Rng& rng) {
  const double ang = rng.uniform(0.0, kTau);
  const double dx = std::cos(ang), dy = std::sin(ang);
  const double base = rng.uniform(0.3, 0.45);
  const double amp = rng.uniform(0.18, 0.3);
  const double n = img.height + img.width;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double t = (r * dy + c * dx + n) / (2.0 * n);  // in [0,1]
      img.at(r, c) = base + amp * t;
    }
  }
}

void paint_speckle(Image& img, Rng& rng) {
  // Value noise: a coarse random lattice interpolated bilinearly.
  const int cells = 8;
  std::vector<double> grid((cells + 1) * (cells + 1));
  for (double& v : grid) v = rng.uniform(0.25, 0.6);
  const double sy = static_cast<double>(cells) / img.height;
  const double sx = static_cast<double>(cells) / img.width;
  for (int r = 0; r < img.height; ++r) {
    const double fy = r * sy;
    const int y0 = std::min(static_cast<int>(fy), cells - 1);
    const double wy = fy - y0;
    for (int c = 0; c < img.width; ++c) {
      const double fx = c * sx;
      const int x0 = std::min(static_cast<int>(fx), cells - 1);
      const double wx = fx - x0;
      const double v00 = grid[y0 * (cells + 1) + x0];
      const double v01 = grid[y0 * (cells + 1) + x0 + 1];
      const double v10 = grid[(y0 + 1) * (cells + 1) + x0];
      const double v11 = grid[(y0 + 1) * (cells + 1) + x0 + 1];
      img.at(r, c) = (v00 * (1 - wx) + v01 * wx) * (1 - wy) + (v10 * (1 - wx) + v11 * wx) * wy;
    }
  }
}

void paint_banded(Image& img, Rng& rng) {
  const double ang = rng.uniform(0.0, kTau);
  const double freq = rng.uniform(3.0, 6.0);
  const double phase = rng.uniform(0.0, kTau);
  const double ca = std::cos(ang), sa = std::sin(ang);
  const double base = rng.uniform(0.38, 0.48);
  const double amp = rng.uniform(0.1, 0.16);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double u = (r * ca + c * sa) / img.height;
      img.at(r, c) = base + amp * std::sin(kTau * freq * u + phase);
    }
  }
}

// Foreground intensity offset per modality. Signs differ across modalities
// so held-out transfer needs shape cues, not a global threshold.
double modality_delta(const std::string& modality, Rng& rng) {
  double base = 0.26;
  if (modality == "speckle") base = -0.24;
  if (modality == "banded") base = 0.24;
  return base + rng.uniform(-0.05, 0.05) * (base < 0 ? -1.0 : 1.0);
}

struct Strip {
  int r0, r1, c0, c1;  // half-open pixel box
};

// Disjoint placement: the image is cut into one strip per class (random
// orientation and order per image), and each shape stays inside its strip.
std::vector<Strip> make_strips(int side, int n, bool vertical, const std::vector<int>& order) {
  std::vector<Strip> strips(n);
  for (int i = 0; i < n; ++i) {
    const int lo = side * i / n;
    const int hi = side * (i + 1) / n;
    Strip s;
    if (vertical) {
      s.r0 = 0;
      s.r1 = side;
      s.c0 = lo;
      s.c1 = hi;
    } else {
      s.r0 = lo;
      s.r1 = hi;
      s.c0 = 0;
      s.c1 = side;
    }
    strips[order[i]] = s;
  }
  return strips;
}

// Shapes are drawn centered at the origin, then scaled to honor the strip's
// feasible bounding radius and translated to a uniformly drawn center. This
// keeps every shape strictly inside its strip, which in turn makes the
// ground-truth masks exact and mutually disjoint.
struct PlacedShape {
  ShapeRecord rec;
  double bounding_radius = 0;
};

void scale_shape(ShapeRecord& rec, double factor) {
  for (EllipseParams& e : rec.ellipses) {
    e.a *= factor;
    e.b *= factor;
    e.cx *= factor;
    e.cy *= factor;
  }
  rec.half_len *= factor;
  rec.half_wid *= factor;
  rec.period *= factor;
  rec.thickness *= factor;
}

void translate_shape(ShapeRecord& rec, double cx, double cy) {
  for (EllipseParams& e : rec.ellipses) {
    e.cx += cx;
    e.cy += cy;
  }
  rec.cx = cx;
  rec.cy = cy;
}

PlacedShape make_ellipse(double ext, Rng& rng) {
  PlacedShape out;
  out.rec.class_name = "ellipse";
  EllipseParams e;
  e.a = rng.uniform(0.16, 0.28) * ext;
  e.b = rng.uniform(0.16, 0.28) * ext;
  e.phi = rng.uniform(0.0, kTau);
  out.rec.ellipses.push_back(e);
  out.bounding_radius = std::max(e.a, e.b);
  return out;
}

PlacedShape make_blob(double ext, Rng& rng) {
  PlacedShape out;
  out.rec.class_name = "blob";
  const double rad = rng.uniform(0.1, 0.15) * ext;
  const int lobes = 2 + static_cast<int>(rng.uniform_int(2));
  double br = 0;
  for (int i = 0; i < lobes; ++i) {
    EllipseParams e;
    e.a = rad * rng.uniform(0.7, 1.0);
    e.b = rad * rng.uniform(0.7, 1.0);
    e.phi = rng.uniform(0.0, kTau);
    e.cx = rng.uniform(-0.8, 0.8) * rad;
    e.cy = rng.uniform(-0.8, 0.8) * rad;
    out.rec.ellipses.push_back(e);
    br = std::max(br, std::hypot(e.cx, e.cy) + std::max(e.a, e.b));
  }
  out.bounding_radius = br;
  return out;
}

PlacedShape make_stripes(double ext, Rng& rng) {
  PlacedShape out;
  out.rec.class_name = "stripes";
  out.rec.half_len = rng.uniform(0.24, 0.32) * ext;
  out.rec.half_wid = rng.uniform(0.16, 0.24) * ext;
  out.rec.phi = rng.uniform(0.0, kTau);
  out.rec.period = rng.uniform(0.14, 0.2) * ext;
  out.rec.thickness = out.rec.period * rng.uniform(0.35, 0.5);
  out.bounding_radius = std::hypot(out.rec.half_len, out.rec.half_wid);
  return out;
}

bool stripes_contains(const ShapeRecord& rec, int r, int c) {
  const double dx = c - rec.cx, dy = r - rec.cy;
  const double u = dx * std::cos(rec.phi) + dy * std::sin(rec.phi);
  const double w = -dx * std::sin(rec.phi) + dy * std::cos(rec.phi);
  if (std::abs(u) > rec.half_len || std::abs(w) > rec.half_wid) return false;
  const double t = std::fmod(u + rec.half_len, rec.period);
  return t < rec.thickness;
}

bool shape_contains(const ShapeRecord& rec, int r, int c) {
  if (rec.class_name == "stripes") return stripes_contains(rec, r, c);
  for (const EllipseParams& e : rec.ellipses) {
    if (e.contains(r, c)) return true;
  }
  return false;
}

}  // namespace

bool EllipseParams::contains(int r, int c) const {
  const double dx = c - cx, dy = r - cy;
  const double u = dx * std::cos(phi) + dy * std::sin(phi);
  const double w = -dx * std::sin(phi) + dy * std::cos(phi);
  const double ua = u / a, wb = w / b;
  return ua * ua + wb * wb <= 1.0;
}

void SynthSpec::validate() const {
  if (modalities.empty()) throw ConfigError("synth spec has zero modalities");
  if (classes.empty()) throw ConfigError("synth spec has zero classes");
  for (const std::string& m : modalities) {
    if (!kKnownModalities.count(m)) throw ConfigError("unknown synth modality '" + m + "'");
  }
  for (const std::string& c : classes) {
    if (!kKnownClasses.count(c)) throw ConfigError("unknown synth class '" + c + "'");
  }
  if (images_per_dataset < 5) throw ConfigError("synth: images_per_dataset must be >= 5");
  if (side < 16) throw ConfigError("synth: side must be >= 16");
  if (noise < 0.0 || noise > 0.5) throw ConfigError("synth: noise must lie in [0, 0.5]");
}

std::vector<Dataset> synth_generate(const SynthSpec& spec, std::uint64_t seed,
                                    SynthManifest* manifest) {
  spec.validate();
  if (manifest) {
    manifest->seed = seed;
    manifest->spec = spec;
    manifest->datasets.clear();
  }

  const int n_classes = static_cast<int>(spec.classes.size());
  {
    const int strip_ext = std::min(spec.side, spec.side / n_classes);
    if ((strip_ext - 3) / 2 - 2 < 4) {
      throw ConfigError("synth: strips too small for shapes; fewer classes or larger side");
    }
  }

  std::vector<Dataset> out;
  for (const std::string& modality : spec.modalities) {
    Dataset ds;
    ds.name = modality;
    ds.class_names = spec.classes;
    DatasetRecord ds_rec;
    ds_rec.name = modality;

    for (int i = 0; i < spec.images_per_dataset; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "img%03d", i);
      const std::uint64_t img_seed =
          SeedStream(seed).add("synth").add(modality).add(i).value;
      Rng rng(img_seed);

      Image img;
      img.height = spec.side;
      img.width = spec.side;
      img.pix.assign(static_cast<size_t>(spec.side) * spec.side, 0.0);
      if (modality == "gradient") {
        paint_gradient(img, rng);
      } else if (modality == "speckle") {
        paint_speckle(img, rng);
      } else {
        paint_banded(img, rng);
      }

      const bool vertical = rng.uniform_int(2) == 0;
      const std::vector<int> order = rng.permutation(n_classes);
      const std::vector<Strip> strips = make_strips(spec.side, n_classes, vertical, order);

      MultiMask mask;
      mask.height = spec.side;
      mask.width = spec.side;
      mask.labels.assign(img.pix.size(), 0);

      ImageRecord img_rec;
      img_rec.id = buf;
      img_rec.seed = img_seed;

      const double delta = modality_delta(modality, rng);
      for (int k = 0; k < n_classes; ++k) {
        const std::string& cls = spec.classes[k];
        const Strip& strip = strips[k];
        const double h = strip.r1 - strip.r0, w = strip.c1 - strip.c0;
        const double ext = std::min(h, w);

        PlacedShape shape;
        if (cls == "ellipse") {
          shape = make_ellipse(ext, rng);
        } else if (cls == "stripes") {
          shape = make_stripes(ext, rng);
        } else {
          shape = make_blob(ext, rng);
        }
        const double feasible = (std::min(h, w) - 3.0) / 2.0 - 2.0;
        if (shape.bounding_radius > feasible) {
          scale_shape(shape.rec, feasible / shape.bounding_radius);
          shape.bounding_radius = feasible;
        }
        const double m = shape.bounding_radius + 2.0;
        const double cx = rng.uniform(strip.c0 + m, strip.c1 - 1 - m);
        const double cy = rng.uniform(strip.r0 + m, strip.r1 - 1 - m);
        translate_shape(shape.rec, cx, cy);

        const double cls_delta = delta * rng.uniform(0.85, 1.15);
        for (int r = strip.r0; r < strip.r1; ++r) {
          for (int c = strip.c0; c < strip.c1; ++c) {
            if (shape_contains(shape.rec, r, c)) {
              mask.labels[static_cast<size_t>(r) * spec.side + c] =
                  static_cast<std::uint8_t>(k + 1);
              img.at(r, c) += cls_delta;
            }
          }
        }
        img_rec.shapes.push_back(std::move(shape.rec));
      }

      for (double& v : img.pix) {
        v += rng.uniform(-spec.noise, spec.noise);
        v = std::clamp(v, 0.0, 1.0);
      }

      Sample s;
      s.id = buf;
      s.image = std::move(img);
      s.mask = std::move(mask);
      ds.samples.push_back(std::move(s));
      ds_rec.images.push_back(std::move(img_rec));
    }
    out.push_back(std::move(ds));
    if (manifest) manifest->datasets.push_back(std::move(ds_rec));
  }
  return out;
}

}  // namespace weasel
