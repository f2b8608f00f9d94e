#include "asp/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace asp {

double SplitMix64::next_gaussian() {
  double u1 = next_double();
  double u2 = next_double();
  if (u1 == 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool GridImage::is_binary() const {
  for (double p : pixels)
    if (p != 0.0 && p != 1.0) return false;
  return true;
}

BaseImageKind base_image_kind_from_string(const std::string& s) {
  if (s == "halves") return BaseImageKind::halves;
  if (s == "stripes") return BaseImageKind::stripes;
  if (s == "checker" || s == "checker-blocks") return BaseImageKind::checker;
  if (s == "disk") return BaseImageKind::disk;
  throw std::invalid_argument("unknown base image kind: " + s);
}

const char* to_string(BaseImageKind kind) {
  switch (kind) {
    case BaseImageKind::halves: return "halves";
    case BaseImageKind::stripes: return "stripes";
    case BaseImageKind::checker: return "checker";
    case BaseImageKind::disk: return "disk";
  }
  return "unknown";
}

GridImage make_base_image(BaseImageKind kind, int height, int width) {
  if (height < 1 || width < 1)
    throw std::invalid_argument("make_base_image: dimensions must be positive");
  GridImage img;
  img.height = height;
  img.width = width;
  img.pixels.assign(static_cast<size_t>(height) * width, 0.0);
  switch (kind) {
    case BaseImageKind::halves:
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) img.at(r, c) = c >= (width + 1) / 2 ? 1.0 : 0.0;
      break;
    case BaseImageKind::stripes:
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) img.at(r, c) = (c / 2) % 2;
      break;
    case BaseImageKind::checker: {
      int block = std::max(1, std::min(height, width) / 4);
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) img.at(r, c) = (r / block + c / block) % 2;
      break;
    }
    case BaseImageKind::disk: {
      double cr = (height - 1) / 2.0;
      double cc = (width - 1) / 2.0;
      double radius = std::min(height, width) / 3.0;
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
          img.at(r, c) = (r - cr) * (r - cr) + (c - cc) * (c - cc) <= radius * radius;
      break;
    }
  }
  return img;
}

GridImage flip_noise(const GridImage& img, double prob, std::uint64_t seed) {
  if (!img.is_binary()) throw std::invalid_argument("flip_noise: binary input required");
  if (prob < 0 || prob > 1) throw std::invalid_argument("flip_noise: probability out of range");
  SplitMix64 rng(seed);
  GridImage out = img;
  for (double& p : out.pixels)
    if (rng.next_double() < prob) p = 1.0 - p;
  return out;
}

GridImage gaussian_noise(const GridImage& img, double sigma, std::uint64_t seed) {
  if (!img.is_binary()) throw std::invalid_argument("gaussian_noise: binary input required");
  if (sigma <= 0) throw std::invalid_argument("gaussian_noise: sigma must be positive");
  SplitMix64 rng(seed);
  GridImage out = img;
  for (double& p : out.pixels) p += sigma * rng.next_gaussian();
  return out;
}

BimodalSpec BimodalSpec::standard() {
  BimodalSpec spec;
  spec.class0 = {{0.08, 0.03, 0.5}, {0.46, 0.03, 0.5}};
  spec.class1 = {{0.55, 0.02, 0.5}, {0.42, 0.10, 0.5}};
  return spec;
}

namespace {

void check_mixture(const std::vector<MixtureComponent>& mix) {
  if (mix.empty()) throw std::invalid_argument("bimodal_noise: empty mixture");
  double total = 0.0;
  for (const auto& c : mix) {
    if (c.stddev <= 0) throw std::invalid_argument("bimodal_noise: stddev must be positive");
    if (c.weight < 0) throw std::invalid_argument("bimodal_noise: negative mixture weight");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("bimodal_noise: mixture weights must sum to 1");
}

double sample_mixture(const std::vector<MixtureComponent>& mix, SplitMix64& rng) {
  double u = rng.next_double();
  double acc = 0.0;
  const MixtureComponent* chosen = &mix.back();
  for (const auto& c : mix) {
    acc += c.weight;
    if (u < acc) {
      chosen = &c;
      break;
    }
  }
  return chosen->mean + chosen->stddev * rng.next_gaussian();
}

}  // namespace

GridImage bimodal_noise(const GridImage& img, const BimodalSpec& spec, std::uint64_t seed) {
  if (!img.is_binary()) throw std::invalid_argument("bimodal_noise: binary input required");
  check_mixture(spec.class0);
  check_mixture(spec.class1);
  SplitMix64 rng(seed);
  GridImage out = img;
  for (double& p : out.pixels) p = sample_mixture(p == 0.0 ? spec.class0 : spec.class1, rng);
  return out;
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "flip") return NoiseKind::flip;
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "bimodal") return NoiseKind::bimodal;
  throw std::invalid_argument("unknown noise kind: " + s);
}

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::flip: return "flip";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::bimodal: return "bimodal";
  }
  return "unknown";
}

GridImage apply_noise(const GridImage& img, const NoiseSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case NoiseKind::flip: return flip_noise(img, spec.flip_prob, seed);
    case NoiseKind::gaussian: return gaussian_noise(img, spec.sigma, seed);
    case NoiseKind::bimodal: return bimodal_noise(img, spec.bimodal, seed);
  }
  throw std::invalid_argument("apply_noise: unknown noise kind");
}

std::vector<int> image_labels(const GridImage& img) {
  if (!img.is_binary()) throw std::invalid_argument("image_labels: binary input required");
  std::vector<int> labels(img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i) labels[i] = img.pixels[i] == 1.0 ? 1 : 0;
  return labels;
}

GridImage labels_to_image(int height, int width, std::span<const int> labels) {
  GridImage img;
  img.height = height;
  img.width = width;
  img.pixels.resize(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) img.pixels[i] = labels[i];
  return img;
}

void save_grid_image(const std::string& path, const GridImage& img) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open image file for writing: " + path);
  out << img.height << " " << img.width << "\n";
  char buf[64];
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", img.at(r, c));
      out << buf << (c + 1 < img.width ? " " : "\n");
    }
  }
  if (!out) throw std::runtime_error("failed writing image file: " + path);
}

GridImage load_grid_image(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open image file: " + path);
  GridImage img;
  if (!(in >> img.height >> img.width) || img.height < 1 || img.width < 1)
    throw std::runtime_error("malformed image file: " + path);
  img.pixels.resize(static_cast<size_t>(img.height) * img.width);
  for (double& p : img.pixels)
    if (!(in >> p)) throw std::runtime_error("truncated image file: " + path);
  return img;
}

}  // namespace asp
