#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace weasel {

// Error taxonomy mirrored by the CLI exit codes: config 1, data 2, numerics 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// All randomness in the project flows through Rng (a SplitMix64 stream) and
// the seed-derivation helpers below. std::random distributions are avoided
// on purpose: their output is implementation-defined, and experiment
// artifacts must be byte-identical across reruns.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0,1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Multiply-shift mapping; stable across platforms.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw NumericalError("uniform_int: empty range");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(uniform_int(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

  // First k entries of a permutation of 0..n-1 (sampling without replacement).
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> p = permutation(n);
    if (k < n) p.resize(k);
    return p;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Stable seed derivation. The scheme is part of the reproducibility contract:
// FNV-1a 64 over strings, SplitMix64 finalization over the running state.
// Documented in README; changing it invalidates recorded experiment seeds.
// ---------------------------------------------------------------------------

inline std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

struct SeedStream {
  std::uint64_t value;
  explicit SeedStream(std::uint64_t seed) : value(seed) {}
  SeedStream& add(std::uint64_t v) {
    value = hash_mix(value, v);
    return *this;
  }
  SeedStream& add(std::string_view s) { return add(hash_str(s)); }
  SeedStream& add(int v) { return add(static_cast<std::uint64_t>(v)); }
};

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return SeedStream(root).add(label).value;
}
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::string_view a) {
  return SeedStream(root).add(label).add(a).value;
}
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::string_view a, int b) {
  return SeedStream(root).add(label).add(a).add(b).value;
}

// Shortest round-trip decimal for doubles; used everywhere results are
// serialized so rerun bytes match exactly.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace weasel
