#include <stdexcept>
#include <filesystem>
#include <fstream>

#include "asp/experiment.hpp"
#include "doctest.h"

using namespace asp;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.base = BaseImageKind::halves;
  cfg.height = 4;
  cfg.width = 4;
  cfg.noise.kind = NoiseKind::flip;
  cfg.noise.flip_prob = 0.2;
  cfg.train_count = 3;
  cfg.test_count = 2;
  cfg.mode = ParamMode::full;
  cfg.train.epsilon = 1.0;
  cfg.train.regularization = 1.0;
  cfg.train.max_outer = 200;
  cfg.train.gap_tolerance = 1e-4;
  cfg.train.seed = 4;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("score") {
  GridImage a = make_base_image(BaseImageKind::checker, 8, 8);
  GridImage b = a;
  CHECK(score(a, b) == 0.0);
  for (double& p : b.pixels) p = 1.0 - p;
  CHECK(score(a, b) == 100.0);

  GridImage truth = make_base_image(BaseImageKind::halves, 64, 64);
  GridImage one_off = truth;
  one_off.pixels[17] = 1.0 - one_off.pixels[17];
  CHECK(score(one_off, truth) == doctest::Approx(100.0 / 4096).epsilon(1e-12));

  GridImage small = make_base_image(BaseImageKind::halves, 4, 4);
  CHECK_THROWS_AS(score(small, truth), std::invalid_argument);
}

TEST_CASE("noiseless data trains to zero test error") {
  ExperimentConfig cfg = small_config();
  cfg.noise.flip_prob = 0.0;
  Report report = run_experiment(cfg);
  CHECK(report.test_error_pct == 0.0);
  CHECK(report.train_error_pct == 0.0);
}

TEST_CASE("reports are bit-identical across runs and thread counts") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = small_config();
  fs::path base = fs::temp_directory_path() / "asp_repro_test";
  fs::remove_all(base);

  ExperimentConfig one = cfg;
  one.train.threads = 1;
  one.out_dir = (base / "one").string();
  ExperimentConfig two = cfg;
  two.train.threads = 3;
  two.out_dir = (base / "two").string();

  run_experiment(one);
  run_experiment(two);

  CHECK(slurp(base / "one" / "report.json") == slurp(base / "two" / "report.json"));
  CHECK(slurp(base / "one" / "model.txt") == slurp(base / "two" / "model.txt"));
  for (int i = 0; i < cfg.test_count; ++i) {
    std::string name = "pred_test_" + std::to_string(i) + ".txt";
    CHECK(slurp(base / "one" / name) == slurp(base / "two" / name));
  }

  // The reported error is recomputable from the emitted prediction files.
  Report again = run_experiment(one);
  long long wrong = 0;
  GridImage truth = load_grid_image((base / "one" / "truth.txt").string());
  for (int i = 0; i < cfg.test_count; ++i) {
    GridImage pred =
        load_grid_image((base / "one" / ("pred_test_" + std::to_string(i) + ".txt")).string());
    wrong += static_cast<long long>(score(pred, truth) / 100.0 * truth.pixels.size() + 0.5);
  }
  CHECK(wrong == again.test_wrong);
  fs::remove_all(base);
}

TEST_CASE("cross-epsilon evaluation at the training epsilon matches the report") {
  ExperimentConfig cfg = small_config();
  TrainResult trained;
  Report report = run_experiment(cfg, &trained);
  Report matched = cross_epsilon_eval(cfg, trained.params, cfg.train.epsilon);
  CHECK(matched.test_wrong == report.test_wrong);
  CHECK(matched.train_wrong == report.train_wrong);
  Report defaulted = cross_epsilon_eval(cfg, trained.params, -1.0);
  CHECK(defaulted.test_wrong == report.test_wrong);
}

TEST_CASE("predicting with a larger epsilon than trained degrades accuracy") {
  ExperimentConfig cfg;
  cfg.base = BaseImageKind::halves;
  cfg.height = 10;
  cfg.width = 10;
  cfg.noise.kind = NoiseKind::flip;
  cfg.noise.flip_prob = 0.2;
  cfg.train_count = 10;
  cfg.test_count = 10;
  cfg.mode = ParamMode::shared;
  cfg.train.epsilon = 0.01;
  cfg.train.regularization = 1.0;
  cfg.train.max_outer = 300;
  cfg.train.gap_tolerance = 1e-4;
  cfg.train.threads = 2;
  cfg.train.seed = 6;

  TrainResult trained;
  Report matched = run_experiment(cfg, &trained);
  Report larger = cross_epsilon_eval(cfg, trained.params, 1.0);
  Report smaller = cross_epsilon_eval(cfg, trained.params, 0.001);
  CHECK(larger.test_wrong >= matched.test_wrong);
  CHECK(larger.test_wrong > 2 * matched.test_wrong);  // markedly worse here
  CHECK(smaller.test_wrong <= 2 * matched.test_wrong);
}

TEST_CASE("config files parse and reject unknown keys") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "asp_config_test.cfg";
  {
    std::ofstream out(path);
    out << "# toy config\n"
        << "base = stripes\n"
        << "height = 6\n"
        << "width = 8\n"
        << "noise = gaussian\n"
        << "sigma = 0.25\n"
        << "epsilon = 0.5\n"
        << "C = 2.5\n"
        << "mode = shared\n"
        << "seed = 42\n";
  }
  ExperimentConfig cfg = default_experiment_config();
  load_config_file(cfg, path.string());
  CHECK(cfg.base == BaseImageKind::stripes);
  CHECK(cfg.height == 6);
  CHECK(cfg.width == 8);
  CHECK(cfg.noise.kind == NoiseKind::gaussian);
  CHECK(cfg.noise.sigma == 0.25);
  CHECK(cfg.train.epsilon == 0.5);
  CHECK(cfg.train.regularization == 2.5);
  CHECK(cfg.mode == ParamMode::shared);
  CHECK(cfg.train.seed == 42);

  {
    std::ofstream out(path);
    out << "nonsense = 1\n";
  }
  ExperimentConfig other = default_experiment_config();
  CHECK_THROWS_AS(load_config_file(other, path.string()), std::invalid_argument);
  fs::remove(path);
  CHECK_THROWS_AS(load_config_file(other, path.string()), std::runtime_error);
}

TEST_CASE("sweep trains every epsilon on identical data") {
  ExperimentConfig cfg = small_config();
  cfg.train.max_outer = 60;
  auto reports = run_sweep(cfg, {1.0, 0.5}, 2);
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    CHECK(r.test_pixels == 2LL * 16);
    CHECK(r.iterations > 0);
  }
}
