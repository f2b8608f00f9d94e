#pragma once

#include <string>
#include <vector>

#include "asp/datagen.hpp"
#include "asp/learner.hpp"
#include "asp/model.hpp"

namespace asp {

// One denoising run: a synthetic base image corrupted train_count + test_count
// times, trained with TrainConfig and scored by pixel error.
struct ExperimentConfig {
  BaseImageKind base = BaseImageKind::halves;
  int height = 10;
  int width = 10;
  NoiseSpec noise;
  int train_count = 40;
  int test_count = 10;
  TrainConfig train;
  ParamMode mode = ParamMode::full;
  double predict_epsilon = -1.0;  // < 0: predict at the training epsilon
  std::string out_dir;            // empty: nothing written
};

struct DenoiseDataset {
  FactorGraph graph;
  GridImage base;
  std::vector<int> truth;
  std::vector<GridImage> train_observations;
  std::vector<GridImage> test_observations;
};

DenoiseDataset make_dataset(const ExperimentConfig& cfg);
TrainingSet make_training_set(const ExperimentConfig& cfg, const DenoiseDataset& data);

struct Report {
  long long train_wrong = 0;
  long long test_wrong = 0;
  long long train_pixels = 0;
  long long test_pixels = 0;
  double train_error_pct = 0.0;
  double test_error_pct = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  std::string termination;
  double predict_epsilon = 0.0;
  double wall_seconds = 0.0;  // kept out of the machine-readable report
};

// Hamming error percentage between two labelings of equal shape.
double score(const GridImage& predicted, const GridImage& truth);

// Predict every train/test observation with the given parameters at
// predict_epsilon (< 0: the training epsilon) and score against the truth.
Report evaluate_params(const ExperimentConfig& cfg, const DenoiseDataset& data,
                       const Parameters& params, double predict_epsilon);

// Full protocol: generate data, train, predict, score, and when out_dir is
// set write model, trace CSV + gnuplot script, reports and prediction files.
Report run_experiment(const ExperimentConfig& cfg);
Report run_experiment(const ExperimentConfig& cfg, TrainResult* train_out);

// Prediction at an epsilon decoupled from the training one.
Report cross_epsilon_eval(const ExperimentConfig& cfg, const Parameters& params,
                          double predict_epsilon);

// Concurrent epsilon grid over a shared dataset; run i trains at epsilons[i]
// (outputs under <out_dir>/eps_<i> when set) with a per-run derived seed for
// any run-local randomness.
std::vector<Report> run_sweep(const ExperimentConfig& cfg,
                              const std::vector<double>& epsilons, int concurrency);

// Flat key=value config files; '#' starts a comment. Unknown keys are errors.
ExperimentConfig default_experiment_config();
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void load_config_file(ExperimentConfig& cfg, const std::string& path);

std::string report_to_json(const ExperimentConfig& cfg, const Report& report);
void write_report_files(const ExperimentConfig& cfg, const Report& report);

}  // namespace asp
