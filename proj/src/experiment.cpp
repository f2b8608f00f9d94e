#include "asp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "asp/inference.hpp"
#include "asp/parallel.hpp"
#include "json.hpp"

namespace asp {

DenoiseDataset make_dataset(const ExperimentConfig& cfg) {
  if (cfg.train_count < 1 || cfg.test_count < 1)
    throw std::invalid_argument("experiment: train/test counts must be >= 1");
  DenoiseDataset data{build_grid(cfg.height, cfg.width, 2),
                      make_base_image(cfg.base, cfg.height, cfg.width),
                      {},
                      {},
                      {}};
  data.truth = image_labels(data.base);
  SplitMix64 seeder(cfg.train.seed);
  data.train_observations.reserve(cfg.train_count);
  for (int i = 0; i < cfg.train_count; ++i)
    data.train_observations.push_back(apply_noise(data.base, cfg.noise, seeder.next()));
  data.test_observations.reserve(cfg.test_count);
  for (int i = 0; i < cfg.test_count; ++i)
    data.test_observations.push_back(apply_noise(data.base, cfg.noise, seeder.next()));
  return data;
}

TrainingSet make_training_set(const ExperimentConfig& cfg, const DenoiseDataset& data) {
  TrainingSet set;
  set.features.dimension = denoise_dimension(data.graph, cfg.mode);
  for (const auto& obs : data.train_observations) {
    set.features.examples.push_back(denoise_features(data.graph, obs.pixels, cfg.mode));
    set.labels.push_back(data.truth);
    set.priors.push_back(hamming_prior(data.graph, data.truth));
  }
  return set;
}

double score(const GridImage& predicted, const GridImage& truth) {
  if (predicted.height != truth.height || predicted.width != truth.width)
    throw std::invalid_argument("score: image dimensions differ");
  long long wrong = 0;
  for (size_t i = 0; i < truth.pixels.size(); ++i)
    if (predicted.pixels[i] != truth.pixels[i]) ++wrong;
  return 100.0 * wrong / truth.pixels.size();
}

namespace {

long long count_wrong(std::span<const int> predicted, std::span<const int> truth) {
  long long wrong = 0;
  for (size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] != truth[i]) ++wrong;
  return wrong;
}

std::vector<std::vector<int>> predict_all(const ExperimentConfig& cfg,
                                          const DenoiseDataset& data,
                                          const Parameters& params, double epsilon,
                                          const std::vector<GridImage>& observations) {
  EntropyWeights weights = make_weights(data.graph, cfg.train);
  std::vector<std::vector<int>> out(observations.size());
  parallel_for(static_cast<int>(observations.size()), cfg.train.threads, [&](int i) {
    ExampleFeatures features = denoise_features(data.graph, observations[i].pixels, cfg.mode);
    Potentials pot = assemble_potentials(data.graph, params, features, nullptr);
    out[i] = predict(data.graph, pot, weights, epsilon);
  });
  return out;
}

}  // namespace

namespace {

Report score_predictions(const DenoiseDataset& data,
                         const std::vector<std::vector<int>>& train_pred,
                         const std::vector<std::vector<int>>& test_pred) {
  Report report;
  for (const auto& p : train_pred) report.train_wrong += count_wrong(p, data.truth);
  for (const auto& p : test_pred) report.test_wrong += count_wrong(p, data.truth);
  report.train_pixels = static_cast<long long>(train_pred.size()) * data.truth.size();
  report.test_pixels = static_cast<long long>(test_pred.size()) * data.truth.size();
  report.train_error_pct = 100.0 * report.train_wrong / report.train_pixels;
  report.test_error_pct = 100.0 * report.test_wrong / report.test_pixels;
  return report;
}

}  // namespace

Report evaluate_params(const ExperimentConfig& cfg, const DenoiseDataset& data,
                       const Parameters& params, double predict_epsilon) {
  double eps = predict_epsilon < 0 ? cfg.train.epsilon : predict_epsilon;
  Report report =
      score_predictions(data, predict_all(cfg, data, params, eps, data.train_observations),
                        predict_all(cfg, data, params, eps, data.test_observations));
  report.predict_epsilon = eps;
  return report;
}

Report run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, nullptr); }

Report run_experiment(const ExperimentConfig& cfg, TrainResult* train_out) {
  DenoiseDataset data = make_dataset(cfg);
  TrainingSet set = make_training_set(cfg, data);
  Learner learner(data.graph, set, cfg.train);

  auto started = std::chrono::steady_clock::now();
  TrainResult trained = learner.train();
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  double predict_eps = cfg.predict_epsilon < 0 ? cfg.train.epsilon : cfg.predict_epsilon;
  auto train_pred =
      predict_all(cfg, data, trained.params, predict_eps, data.train_observations);
  auto test_pred = predict_all(cfg, data, trained.params, predict_eps, data.test_observations);
  Report report = score_predictions(data, train_pred, test_pred);
  report.predict_epsilon = predict_eps;
  report.primal = trained.primal;
  report.dual = trained.dual;
  report.relative_gap = trained.relative_gap;
  report.iterations = trained.iterations;
  report.termination = to_string(trained.status);
  report.wall_seconds = wall;

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    fs::path dir(cfg.out_dir);

    ModelHeader header{denoise_dimension(data.graph, cfg.mode), cfg.height, cfg.width, 2,
                       cfg.mode};
    save_model((dir / "model.txt").string(), header, trained.params);
    write_trace_csv((dir / "trace.csv").string(), trained.trace);
    {
      std::ofstream gnu(dir / "trace.gnu");
      gnu << "set datafile separator ','\n"
          << "set key autotitle columnhead\n"
          << "set xlabel 'iteration'\n"
          << "plot 'trace.csv' using 1:2 with lines title 'primal', \\\n"
          << "     'trace.csv' using 1:3 with lines title 'dual'\n";
    }
    save_grid_image((dir / "truth.txt").string(), data.base);
    for (size_t i = 0; i < test_pred.size(); ++i) {
      std::ostringstream name;
      name << "pred_test_" << i << ".txt";
      save_grid_image((dir / name.str()).string(),
                      labels_to_image(cfg.height, cfg.width, test_pred[i]));
    }
    write_report_files(cfg, report);
  }
  if (train_out) *train_out = std::move(trained);
  return report;
}

Report cross_epsilon_eval(const ExperimentConfig& cfg, const Parameters& params,
                          double predict_epsilon) {
  DenoiseDataset data = make_dataset(cfg);
  return evaluate_params(cfg, data, params, predict_epsilon);
}

std::vector<Report> run_sweep(const ExperimentConfig& cfg,
                              const std::vector<double>& epsilons, int concurrency) {
  std::vector<Report> reports(epsilons.size());
  parallel_for(static_cast<int>(epsilons.size()), concurrency, [&](int i) {
    // All runs keep the master seed so they train and test on identical data;
    // training itself consumes no randomness.
    ExperimentConfig run = cfg;
    run.train.epsilon = epsilons[i];
    if (!cfg.out_dir.empty()) {
      std::ostringstream sub;
      sub << cfg.out_dir << "/eps_" << i;
      run.out_dir = sub.str();
    }
    reports[i] = run_experiment(run);
  });
  return reports;
}

ExperimentConfig default_experiment_config() { return ExperimentConfig{}; }

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  auto as_double = [&] { return std::stod(value); };
  auto as_int = [&] { return std::stoi(value); };
  if (key == "base") cfg.base = base_image_kind_from_string(value);
  else if (key == "height") cfg.height = as_int();
  else if (key == "width") cfg.width = as_int();
  else if (key == "noise") cfg.noise.kind = noise_kind_from_string(value);
  else if (key == "flip_prob") cfg.noise.flip_prob = as_double();
  else if (key == "sigma") cfg.noise.sigma = as_double();
  else if (key == "train_count") cfg.train_count = as_int();
  else if (key == "test_count") cfg.test_count = as_int();
  else if (key == "mode") cfg.mode = param_mode_from_string(value);
  else if (key == "epsilon") cfg.train.epsilon = as_double();
  else if (key == "C") cfg.train.regularization = as_double();
  else if (key == "p") cfg.train.p = as_int();
  else if (key == "c_node") cfg.train.c_node = as_double();
  else if (key == "c_factor") cfg.train.c_factor = as_double();
  else if (key == "bethe") cfg.train.bethe = as_int() != 0;
  else if (key == "max_outer") cfg.train.max_outer = as_int();
  else if (key == "gap_tolerance") cfg.train.gap_tolerance = as_double();
  else if (key == "grad_tolerance") cfg.train.grad_tolerance = as_double();
  else if (key == "lambda_sweeps") cfg.train.lambda_sweeps = as_int();
  else if (key == "step_init") cfg.train.step_init = as_double();
  else if (key == "subgradient_step") cfg.train.subgradient_step = as_double();
  else if (key == "threads") cfg.train.threads = as_int();
  else if (key == "seed") cfg.train.seed = std::stoull(value);
  else if (key == "predict_epsilon") cfg.predict_epsilon = as_double();
  else if (key == "out") cfg.out_dir = value;
  else throw std::invalid_argument("unknown config key: " + key);
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string report_to_json(const ExperimentConfig& cfg, const Report& report) {
  nlohmann::json j;
  j["config"] = {{"base", to_string(cfg.base)},
                 {"height", cfg.height},
                 {"width", cfg.width},
                 {"noise", to_string(cfg.noise.kind)},
                 {"flip_prob", cfg.noise.flip_prob},
                 {"sigma", cfg.noise.sigma},
                 {"train_count", cfg.train_count},
                 {"test_count", cfg.test_count},
                 {"mode", to_string(cfg.mode)},
                 {"epsilon", cfg.train.epsilon},
                 {"C", cfg.train.regularization},
                 {"p", cfg.train.p},
                 {"c_node", cfg.train.c_node},
                 {"c_factor", cfg.train.c_factor},
                 {"bethe", cfg.train.bethe},
                 {"seed", cfg.train.seed}};
  j["result"] = {{"train_wrong", report.train_wrong},
                 {"test_wrong", report.test_wrong},
                 {"train_pixels", report.train_pixels},
                 {"test_pixels", report.test_pixels},
                 {"train_error_pct", report.train_error_pct},
                 {"test_error_pct", report.test_error_pct},
                 {"primal", report.primal},
                 {"dual", report.dual},
                 {"relative_gap", report.relative_gap},
                 {"iterations", report.iterations},
                 {"termination", report.termination},
                 {"predict_epsilon", report.predict_epsilon}};
  return j.dump(2) + "\n";
}

void write_report_files(const ExperimentConfig& cfg, const Report& report) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  fs::path dir(cfg.out_dir);
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw std::runtime_error("cannot write report: " + (dir / "report.json").string());
    out << report_to_json(cfg, report);
  }
  std::ofstream out(dir / "report.txt");
  if (!out) throw std::runtime_error("cannot write report: " + (dir / "report.txt").string());
  out << "train error: " << report.train_error_pct << "% (" << report.train_wrong << "/"
      << report.train_pixels << " pixels)\n"
      << "test error:  " << report.test_error_pct << "% (" << report.test_wrong << "/"
      << report.test_pixels << " pixels)\n"
      << "primal " << report.primal << "  dual " << report.dual << "  relative gap "
      << report.relative_gap << "\n"
      << "iterations " << report.iterations << " (" << report.termination << ")\n"
      << "prediction epsilon " << report.predict_epsilon << "\n"
      << "wall seconds " << report.wall_seconds << "\n";
}

}  // namespace asp
