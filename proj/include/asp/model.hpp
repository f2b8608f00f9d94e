#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asp/factor_graph.hpp"

namespace asp {

struct Parameters {
  std::vector<double> theta;
};

// One local feature table phi_{r,v}(x, .) tying parameter `param` to a vertex.
struct NodeFeature {
  int param = 0;
  int vertex = 0;
  std::vector<double> table;  // size |Y_v|
};

// phi_{r,alpha}(x, .) tying parameter `param` to a factor.
struct FactorFeature {
  int param = 0;
  int factor = 0;
  std::vector<double> table;  // size |Y_alpha|, graph flat order
};

// All local feature tables of a single example x.
struct ExampleFeatures {
  std::vector<NodeFeature> node;
  std::vector<FactorFeature> factor;
};

struct FeatureSet {
  int dimension = 0;  // d
  std::vector<ExampleFeatures> examples;
};

// Fully factorized loss prior e_y: one nonnegative table per vertex with
// e_{y,v}(y_v) = 0 at the true label.
struct LossPrior {
  std::vector<std::vector<double>> node;
};

// Per-vertex Hamming loss: 1 for every wrong label, 0 at the truth.
LossPrior hamming_prior(const FactorGraph& g, std::span<const int> truth);

// Fractional entropy weights c_v, c_alpha.
struct EntropyWeights {
  std::vector<double> node;
  std::vector<double> factor;
};

EntropyWeights uniform_weights(const FactorGraph& g, double c_node, double c_factor);
// Bethe entropy: c_alpha = 1, c_v = 1 - |N(v)|. Non-concave on loopy graphs.
EntropyWeights bethe_weights(const FactorGraph& g);

// theta-weighted potential tables of one example. The loss prior, when given,
// enters the node tables only.
struct Potentials {
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> factor;
};

Potentials assemble_potentials(const FactorGraph& g, const Parameters& params,
                               const ExampleFeatures& features,
                               const LossPrior* prior = nullptr);

struct TrainingSet {
  FeatureSet features;
  std::vector<std::vector<int>> labels;  // y per example
  std::vector<LossPrior> priors;         // e_y per example
};

// d_r = sum over examples of Phi_r(x, y) evaluated at the true labels.
std::vector<double> empirical_means(const FactorGraph& g, const TrainingSet& data);

struct TrainConfig {
  double epsilon = 1.0;        // 1 = CRF, 0 = structured SVM
  double regularization = 1.0; // C > 0
  int p = 2;                   // {1, 2}; the dual exponent is q = p/(p-1)
  double c_node = 1.0;
  double c_factor = 1.0;
  bool bethe = false;          // non-convex entropy weights (c_v = 1 - |N(v)|)
  int max_outer = 2000;
  double gap_tolerance = 1e-5;   // relative duality gap
  double grad_tolerance = 1e-6;  // sup norm
  int lambda_sweeps = 1;         // inner multiplier sweeps per theta step
  double step_init = 1.0;        // line search eta_0
  double step_shrink = 0.5;
  double armijo = 1e-4;
  double step_min = 1e-12;
  double subgradient_step = 1.0;  // eta_0/(1+t) schedule at epsilon = 0
  int threads = 1;                // parallelism over training examples
  std::uint64_t seed = 0;
};

EntropyWeights make_weights(const FactorGraph& g, const TrainConfig& cfg);
void validate(const FactorGraph& g, const TrainConfig& cfg);

// Denoising parameterization on binary grids. "full" learns one evidence
// parameter per vertex-label pair plus one bias per factor-label pair;
// "shared" ties them into per-label evidence plus agree/disagree biases.
enum class ParamMode { full, shared };

const char* to_string(ParamMode mode);
ParamMode param_mode_from_string(const std::string& s);

int denoise_dimension(const FactorGraph& grid, ParamMode mode);
ExampleFeatures denoise_features(const FactorGraph& grid, std::span<const double> pixels,
                                 ParamMode mode);

// Versioned plain-text model file; round-trips theta bit-exactly.
struct ModelHeader {
  int dimension = 0;
  int height = 0;
  int width = 0;
  int labels = 2;
  ParamMode mode = ParamMode::full;
};

void save_model(const std::string& path, const ModelHeader& header, const Parameters& params);
std::pair<ModelHeader, Parameters> load_model(const std::string& path);

}  // namespace asp
