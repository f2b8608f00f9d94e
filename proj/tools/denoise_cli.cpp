#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "asp/experiment.hpp"
#include "asp/inference.hpp"

namespace {

using namespace asp;

struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::string mode;
  double epsilon = std::nan("");
  double C = std::nan("");
  double c_node = std::nan("");
  double c_factor = std::nan("");
  double predict_epsilon = std::nan("");
  int p = -1;
  long long seed = -1;
  int threads = -1;
};

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "key=value config file");
  cmd->add_option("--seed", o.seed, "master RNG seed");
  cmd->add_option("--epsilon", o.epsilon, "training epsilon (1 = CRF, 0 = structured SVM)");
  cmd->add_option("--c-node", o.c_node, "node entropy weight");
  cmd->add_option("--c-factor", o.c_factor, "factor entropy weight");
  cmd->add_option("--C", o.C, "regularization constant");
  cmd->add_option("--p", o.p, "regularization norm power (1 or 2)")
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--mode", o.mode, "parameter mode: full or shared");
  cmd->add_option("--predict-epsilon", o.predict_epsilon, "epsilon used at prediction time");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--threads", o.threads, "parallelism over training examples");
}

ExperimentConfig build_config(const Overrides& o, bool require_C) {
  ExperimentConfig cfg = default_experiment_config();
  cfg.train.regularization = std::nan("");  // must be given explicitly
  if (!o.config_path.empty()) load_config_file(cfg, o.config_path);
  if (!std::isnan(o.epsilon)) cfg.train.epsilon = o.epsilon;
  if (!std::isnan(o.C)) cfg.train.regularization = o.C;
  if (!std::isnan(o.c_node)) cfg.train.c_node = o.c_node;
  if (!std::isnan(o.c_factor)) cfg.train.c_factor = o.c_factor;
  if (!std::isnan(o.predict_epsilon)) cfg.predict_epsilon = o.predict_epsilon;
  if (o.p > 0) cfg.train.p = o.p;
  if (o.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(o.seed);
  if (o.threads > 0) cfg.train.threads = o.threads;
  if (!o.mode.empty()) cfg.mode = param_mode_from_string(o.mode);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (require_C && std::isnan(cfg.train.regularization))
    throw std::invalid_argument(
        "the regularization constant must be given explicitly (--C or config key C); "
        "reported errors depend on it and on the seed");
  if (std::isnan(cfg.train.regularization)) cfg.train.regularization = 1.0;
  return cfg;
}

std::string indexed_name(const char* stem, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.txt", stem, i);
  return buf;
}

int cmd_generate(const Overrides& o) {
  ExperimentConfig cfg = build_config(o, false);
  if (cfg.out_dir.empty()) throw std::invalid_argument("generate: --out is required");
  DenoiseDataset data = make_dataset(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  fs::path dir(cfg.out_dir);
  save_grid_image((dir / "truth.txt").string(), data.base);
  for (size_t i = 0; i < data.train_observations.size(); ++i)
    save_grid_image((dir / indexed_name("train", static_cast<int>(i))).string(),
                    data.train_observations[i]);
  for (size_t i = 0; i < data.test_observations.size(); ++i)
    save_grid_image((dir / indexed_name("test", static_cast<int>(i))).string(),
                    data.test_observations[i]);
  std::cout << "wrote " << data.train_observations.size() << " train and "
            << data.test_observations.size() << " test observations to " << cfg.out_dir
            << "\n";
  return 0;
}

int cmd_train(const Overrides& o) {
  ExperimentConfig cfg = build_config(o, true);
  if (cfg.out_dir.empty()) throw std::invalid_argument("train: --out is required");
  Report report = run_experiment(cfg);
  std::cout << report_to_json(cfg, report);
  return 0;
}

int cmd_predict(const Overrides& o, const std::string& model_path,
                const std::string& image_path) {
  ExperimentConfig cfg = build_config(o, false);
  if (cfg.out_dir.empty()) throw std::invalid_argument("predict: --out is required");
  auto [header, params] = load_model(model_path);
  GridImage obs = load_grid_image(image_path);
  if (obs.height != header.height || obs.width != header.width)
    throw std::invalid_argument("predict: image dimensions do not match the model");
  FactorGraph graph = build_grid(header.height, header.width, header.labels);
  ExampleFeatures features = denoise_features(graph, obs.pixels, header.mode);
  Potentials pot = assemble_potentials(graph, params, features, nullptr);
  double eps = cfg.predict_epsilon >= 0 ? cfg.predict_epsilon : cfg.train.epsilon;
  std::vector<int> labels =
      predict(graph, pot, make_weights(graph, cfg.train), eps);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  fs::path out = fs::path(cfg.out_dir) /
                 (fs::path(image_path).stem().string() + "_pred.txt");
  save_grid_image(out.string(), labels_to_image(header.height, header.width, labels));
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_evaluate(const Overrides& o, const std::string& model_path,
                 const std::string& pred_path, const std::string& truth_path) {
  if (!pred_path.empty() || !truth_path.empty()) {
    if (pred_path.empty() || truth_path.empty())
      throw std::invalid_argument("evaluate: --pred and --truth go together");
    double pct = score(load_grid_image(pred_path), load_grid_image(truth_path));
    std::cout << "error " << pct << "%\n";
    return 0;
  }
  if (model_path.empty())
    throw std::invalid_argument("evaluate: either --model or --pred/--truth is required");
  ExperimentConfig cfg = build_config(o, false);
  auto [header, params] = load_model(model_path);
  if (header.height != cfg.height || header.width != cfg.width)
    throw std::invalid_argument("evaluate: model dimensions do not match the config");
  cfg.mode = header.mode;
  Report report = cross_epsilon_eval(cfg, params, cfg.predict_epsilon);
  std::cout << report_to_json(cfg, report);
  if (!cfg.out_dir.empty()) write_report_files(cfg, report);
  return 0;
}

int cmd_sweep(const Overrides& o, const std::string& epsilons_csv, int jobs) {
  ExperimentConfig cfg = build_config(o, true);
  std::vector<double> epsilons;
  std::stringstream ss(epsilons_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) epsilons.push_back(std::stod(tok));
  if (epsilons.empty()) throw std::invalid_argument("sweep: --epsilons list is empty");
  std::vector<Report> reports = run_sweep(cfg, epsilons, jobs);
  std::printf("%10s %14s %14s %14s %10s %10s\n", "epsilon", "train_err_%", "test_err_%",
              "rel_gap", "iters", "seconds");
  for (size_t i = 0; i < reports.size(); ++i)
    std::printf("%10g %14.4f %14.4f %14.3e %10d %10.2f\n", epsilons[i],
                reports[i].train_error_pct, reports[i].test_error_pct,
                reports[i].relative_gap, reports[i].iterations, reports[i].wall_seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Denoising experiments for structured prediction on loopy grids"};
  app.require_subcommand(1);

  Overrides o;
  std::string model_path, image_path, pred_path, truth_path, epsilons_csv = "1,0.5,0.01,0";
  int jobs = 2;

  CLI::App* generate = app.add_subcommand("generate", "synthesize noisy observations");
  add_common_options(generate, o);

  CLI::App* train = app.add_subcommand("train", "run the full train/predict/score protocol");
  add_common_options(train, o);

  CLI::App* predict_cmd = app.add_subcommand("predict", "predict labels for one image");
  add_common_options(predict_cmd, o);
  predict_cmd->add_option("--model", model_path, "model file")->required();
  predict_cmd->add_option("--image", image_path, "observation grid file")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions or a model");
  add_common_options(evaluate, o);
  evaluate->add_option("--model", model_path, "model file (cross-epsilon evaluation)");
  evaluate->add_option("--pred", pred_path, "predicted labeling file");
  evaluate->add_option("--truth", truth_path, "ground truth labeling file");

  CLI::App* sweep = app.add_subcommand("sweep", "train over an epsilon grid");
  add_common_options(sweep, o);
  sweep->add_option("--epsilons", epsilons_csv, "comma-separated epsilon list");
  sweep->add_option("--jobs", jobs, "concurrent runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(o);
    if (train->parsed()) return cmd_train(o);
    if (predict_cmd->parsed()) return cmd_predict(o, model_path, image_path);
    if (evaluate->parsed()) return cmd_evaluate(o, model_path, pred_path, truth_path);
    if (sweep->parsed()) return cmd_sweep(o, epsilons_csv, jobs);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
