#include <stdexcept>
#include <cmath>
#include <filesystem>

#include "asp/datagen.hpp"
#include "doctest.h"

using namespace asp;

TEST_CASE("base images") {
  SUBCASE("halves splits columns") {
    GridImage img = make_base_image(BaseImageKind::halves, 10, 10);
    int zeros = 0, ones = 0;
    for (int r = 0; r < 10; ++r)
      for (int c = 0; c < 10; ++c) (img.at(r, c) == 0.0 ? zeros : ones)++;
    CHECK(zeros == 50);
    CHECK(ones == 50);
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(0, 9) == 1.0);
  }

  SUBCASE("stripes of period four") {
    GridImage img = make_base_image(BaseImageKind::stripes, 64, 64);
    int transitions = 0;
    for (int c = 0; c + 1 < 64; ++c)
      if (img.at(0, c) != img.at(0, c + 1)) ++transitions;
    CHECK(transitions == 31);  // 16 zero/one stripe pairs
    CHECK(img.at(5, 0) == 0.0);
    CHECK(img.at(5, 2) == 1.0);
  }

  SUBCASE("disk is centrally symmetric at odd sizes") {
    GridImage img = make_base_image(BaseImageKind::disk, 11, 11);
    for (int r = 0; r < 11; ++r)
      for (int c = 0; c < 11; ++c) CHECK(img.at(r, c) == img.at(10 - r, 10 - c));
    CHECK(img.at(5, 5) == 1.0);
    CHECK(img.at(0, 0) == 0.0);
  }

  SUBCASE("rejects empty shapes") {
    CHECK_THROWS_AS(make_base_image(BaseImageKind::halves, 0, 4), std::invalid_argument);
  }
}

TEST_CASE("flip noise") {
  GridImage img = make_base_image(BaseImageKind::checker, 10, 10);

  SUBCASE("probability zero is the identity, one the complement") {
    GridImage same = flip_noise(img, 0.0, 123);
    GridImage flipped = flip_noise(img, 1.0, 123);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      CHECK(same.pixels[i] == img.pixels[i]);
      CHECK(flipped.pixels[i] == 1.0 - img.pixels[i]);
    }
  }

  SUBCASE("flip fraction concentrates near the probability") {
    GridImage noisy = flip_noise(img, 0.2, 7);
    int flips = 0;
    for (size_t i = 0; i < img.pixels.size(); ++i)
      if (noisy.pixels[i] != img.pixels[i]) ++flips;
    CHECK(flips >= 10);
    CHECK(flips <= 30);
  }

  SUBCASE("identical seeds give identical output") {
    GridImage a = flip_noise(img, 0.3, 99);
    GridImage b = flip_noise(img, 0.3, 99);
    CHECK(a.pixels == b.pixels);
    GridImage c = flip_noise(img, 0.3, 100);
    CHECK(a.pixels != c.pixels);
  }

  SUBCASE("probability one half makes observation independent of the label") {
    GridImage big = make_base_image(BaseImageKind::halves, 64, 64);
    GridImage noisy = flip_noise(big, 0.5, 5);
    // 2x2 contingency of (label, observation); chi-square with df = 1 at the
    // 1e-3 level is 10.828.
    double n[2][2] = {{0, 0}, {0, 0}};
    for (size_t i = 0; i < big.pixels.size(); ++i)
      n[big.pixels[i] == 1.0][noisy.pixels[i] == 1.0] += 1;
    double total = 4096;
    double chi2 = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double expected = (n[a][0] + n[a][1]) * (n[0][b] + n[1][b]) / total;
        chi2 += (n[a][b] - expected) * (n[a][b] - expected) / expected;
      }
    CHECK(chi2 < 10.828);
  }

  SUBCASE("rejects non-binary input") {
    GridImage real = gaussian_noise(img, 0.3, 1);
    CHECK_THROWS_AS(flip_noise(real, 0.2, 1), std::invalid_argument);
  }
}

TEST_CASE("gaussian noise") {
  GridImage img = make_base_image(BaseImageKind::halves, 64, 64);
  double sigma = 0.3;
  GridImage noisy = gaussian_noise(img, sigma, 11);

  double mean = 0, sq = 0;
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    double diff = noisy.pixels[i] - img.pixels[i];
    mean += diff;
    sq += diff * diff;
  }
  mean /= 4096;
  double stddev = std::sqrt(sq / 4096 - mean * mean);
  CHECK(std::abs(mean) <= 3 * sigma / 64.0);
  CHECK(std::abs(stddev - sigma) <= 0.1 * sigma);
  CHECK_THROWS_AS(gaussian_noise(img, 0.0, 1), std::invalid_argument);

  // Vanishing sigma leaves the labels untouched.
  GridImage faint = gaussian_noise(img, 1e-13, 2);
  for (size_t i = 0; i < img.pixels.size(); ++i)
    CHECK(faint.pixels[i] == doctest::Approx(img.pixels[i]).epsilon(1e-11));
}

TEST_CASE("bimodal noise") {
  GridImage img = make_base_image(BaseImageKind::halves, 64, 64);
  BimodalSpec spec = BimodalSpec::standard();
  GridImage noisy = bimodal_noise(img, spec, 13);

  double mean0 = 0, mean1 = 0;
  int n0 = 0, n1 = 0;
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.pixels[i] == 0.0) {
      mean0 += noisy.pixels[i];
      ++n0;
    } else {
      mean1 += noisy.pixels[i];
      ++n1;
    }
  }
  mean0 /= n0;
  mean1 /= n1;
  CHECK(std::abs(mean0 - 0.27) <= 0.05);   // (0.08 + 0.46) / 2
  CHECK(std::abs(mean1 - 0.485) <= 0.05);  // (0.55 + 0.42) / 2

  SUBCASE("degenerate spec pins every observation") {
    BimodalSpec tight;
    tight.class0 = {{0.5, 1e-9, 1.0}};
    tight.class1 = {{0.5, 1e-9, 1.0}};
    GridImage pinned = bimodal_noise(img, tight, 3);
    for (double p : pinned.pixels) CHECK(p == doctest::Approx(0.5).epsilon(1e-6));
  }

  SUBCASE("invalid mixtures are rejected") {
    BimodalSpec bad = BimodalSpec::standard();
    bad.class0[0].weight = 0.9;
    CHECK_THROWS_AS(bimodal_noise(img, bad, 1), std::invalid_argument);
    bad = BimodalSpec::standard();
    bad.class1[0].stddev = 0.0;
    CHECK_THROWS_AS(bimodal_noise(img, bad, 1), std::invalid_argument);
  }
}

TEST_CASE("grid image files round-trip bit-exactly") {
  GridImage img = gaussian_noise(make_base_image(BaseImageKind::disk, 5, 7), 0.3, 21);
  auto path = std::filesystem::temp_directory_path() / "asp_grid_test.txt";
  save_grid_image(path.string(), img);
  GridImage loaded = load_grid_image(path.string());
  CHECK(loaded.height == img.height);
  CHECK(loaded.width == img.width);
  REQUIRE(loaded.pixels.size() == img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i) CHECK(loaded.pixels[i] == img.pixels[i]);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_grid_image("/nonexistent/grid.txt"), std::runtime_error);
}

TEST_CASE("labels round-trip through images") {
  GridImage img = make_base_image(BaseImageKind::checker, 4, 6);
  auto labels = image_labels(img);
  GridImage back = labels_to_image(4, 6, labels);
  CHECK(back.pixels == img.pixels);
}
