#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sega {

namespace detail {
inline std::size_t checked_len(int h, int w, int c) {
  if (h <= 0 || w <= 0 || c <= 0)
    throw std::invalid_argument("Tensor: dimensions must be positive");
  return static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
         static_cast<std::size_t>(c);
}
}  // namespace detail

/// Dense row-major tensor with interleaved channels: element (y, x, c) lives
/// at data[(y * width + x) * channels + c]. Images hold intensities on the
/// [0,1] scale; gradient fields hold unbounded reals of the same shape.
/// The flattened length height*width*channels is the dimension d used by
/// the smoothing bounds.
struct Tensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), data(detail::checked_len(h, w, c), fill) {}

  int size() const { return height * width * channels; }

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const Tensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

using Image = Tensor;
using GradientField = Tensor;

void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

// ---------------------------------------------------------------------------
// Deterministic random streams
// ---------------------------------------------------------------------------

/// Address of one substream: the master seed plus the (model k, sample i)
/// pair it belongs to. Identical addresses always reproduce the same draws,
/// independent of evaluation order or thread count, so ensemble sums can be
/// reduced in a fixed (k, i) order with bitwise-stable results.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint32_t model_index = 0;   // k
  std::uint64_t sample_index = 0;  // i
};

/// Counter-style generator: a SplitMix64 walk whose initial state is a hash
/// of (seed, k, i). Gaussians come from Box-Muller on the uniform output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed + kGolden)) {}
  explicit Rng(const RngStream& s)
      : state_(mix(mix(mix(s.master_seed + kGolden) +
                       kGolden * (static_cast<std::uint64_t>(s.model_index) + 1)) +
                   kGolden * (s.sample_index + 1))) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1]; never returns 0 so log() is safe.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, pairwise).
  double next_normal();

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static std::uint64_t mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// d i.i.d. standard normal draws as a flat 1 x d x 1 field.
GradientField sample_gaussian(const RngStream& stream, int d);

/// Standard normal field with the given image shape.
GradientField sample_gaussian(const RngStream& stream, int height, int width,
                              int channels);

// ---------------------------------------------------------------------------
// Norms and pixel-range plumbing
// ---------------------------------------------------------------------------

enum class Norm { l1, l2, linf };

/// Standard lp norm of the flattened field.
double lp_norm(const Tensor& field, Norm p);

/// Mean absolute value per element; the per-pixel l1 used in reports.
double mean_abs(const Tensor& field);

/// Root mean square per element.
double rms(const Tensor& field);

inline double to_255(double v) { return v * 255.0; }

/// Clip every element to [0,1]. Idempotent.
Image clamp_image(const Image& img);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// SEGT tensor format: magic "SEGT", u32 LE rank, rank u32 LE dims, then a
/// row-major IEEE-754 float32 LE payload. Tensors are written rank 3 as
/// (height, width, channels); rank 1 and 2 payloads read back with the
/// missing dimensions filled in as 1.
void write_segt(const std::string& path, const Tensor& t);
Tensor read_segt(const std::string& path);

/// Binary PPM (P6, 8-bit), linearly mapped to [0,1]. Single-channel tensors
/// are written with the gray value replicated; reads always produce 3
/// channels.
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(const std::string& path);

/// Error carrying a path for I/O failures; the CLI maps it to its own
/// missing-input exit code.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sega
