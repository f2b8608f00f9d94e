#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asp/model.hpp"

namespace asp {

// splitmix64 (Steele, Lea, Flood 2014): a counter-based 64-bit generator.
// Fixed here so any implementation reproduces identical streams from a seed.
// Gaussians come from one Box-Muller cosine evaluation per call, consuming
// two uniforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 significant bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double next_gaussian();

 private:
  std::uint64_t state_;
};

// Real-valued pixel grid; ground-truth labelings hold exact 0/1 values.
struct GridImage {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;  // row-major

  double& at(int r, int c) { return pixels[static_cast<size_t>(r) * width + c]; }
  double at(int r, int c) const { return pixels[static_cast<size_t>(r) * width + c]; }
  int size() const { return height * width; }
  bool is_binary() const;
};

enum class BaseImageKind { halves, stripes, checker, disk };

BaseImageKind base_image_kind_from_string(const std::string& s);
const char* to_string(BaseImageKind kind);

// Deterministic binary test patterns. Stripes are vertical with period 4,
// checker blocks scale with the short side, the disk is centered.
GridImage make_base_image(BaseImageKind kind, int height, int width);

// Each bit flipped independently with the given probability.
GridImage flip_noise(const GridImage& img, double prob, std::uint64_t seed);

// observation = label + N(0, sigma); not clamped to [0, 1].
GridImage gaussian_noise(const GridImage& img, double sigma, std::uint64_t seed);

struct MixtureComponent {
  double mean = 0.0;
  double stddev = 1.0;
  double weight = 0.5;
};

struct BimodalSpec {
  std::vector<MixtureComponent> class0;
  std::vector<MixtureComponent> class1;
  // Two equal-weight Gaussians per class: (0.08, 0.03), (0.46, 0.03) for
  // class 0 and (0.55, 0.02), (0.42, 0.10) for class 1.
  static BimodalSpec standard();
};

// Each pixel's value replaced by a draw from its class mixture.
GridImage bimodal_noise(const GridImage& img, const BimodalSpec& spec, std::uint64_t seed);

enum class NoiseKind { flip, gaussian, bimodal };

NoiseKind noise_kind_from_string(const std::string& s);
const char* to_string(NoiseKind kind);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::flip;
  double flip_prob = 0.2;
  double sigma = 0.3;
  BimodalSpec bimodal = BimodalSpec::standard();
};

GridImage apply_noise(const GridImage& img, const NoiseSpec& spec, std::uint64_t seed);

std::vector<int> image_labels(const GridImage& img);
GridImage labels_to_image(int height, int width, std::span<const int> labels);

// Plain-text grid file: first line "h w", then h lines of w space-separated
// values printed with 17 significant digits; round-trips bit-exactly.
void save_grid_image(const std::string& path, const GridImage& img);
GridImage load_grid_image(const std::string& path);

}  // namespace asp
