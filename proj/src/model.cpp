#include "asp/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace asp {

LossPrior hamming_prior(const FactorGraph& g, std::span<const int> truth) {
  if (static_cast<int>(truth.size()) != g.vertex_count())
    throw std::invalid_argument("hamming_prior: labeling size mismatch");
  LossPrior prior;
  prior.node.resize(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (truth[v] < 0 || truth[v] >= g.cardinality(v))
      throw std::invalid_argument("hamming_prior: label out of range");
    prior.node[v].assign(g.cardinality(v), 1.0);
    prior.node[v][truth[v]] = 0.0;
  }
  return prior;
}

EntropyWeights uniform_weights(const FactorGraph& g, double c_node, double c_factor) {
  EntropyWeights w;
  w.node.assign(g.vertex_count(), c_node);
  w.factor.assign(g.factor_count(), c_factor);
  return w;
}

EntropyWeights bethe_weights(const FactorGraph& g) {
  EntropyWeights w;
  w.node.resize(g.vertex_count());
  w.factor.assign(g.factor_count(), 1.0);
  for (int v = 0; v < g.vertex_count(); ++v) w.node[v] = 1.0 - g.degree(v);
  return w;
}

Potentials assemble_potentials(const FactorGraph& g, const Parameters& params,
                               const ExampleFeatures& features, const LossPrior* prior) {
  Potentials pot;
  pot.node.resize(g.vertex_count());
  pot.factor.resize(g.factor_count());
  for (int v = 0; v < g.vertex_count(); ++v) pot.node[v].assign(g.cardinality(v), 0.0);
  for (int a = 0; a < g.factor_count(); ++a) pot.factor[a].assign(g.factor_labels(a), 0.0);

  if (prior) {
    if (static_cast<int>(prior->node.size()) != g.vertex_count())
      throw std::invalid_argument("assemble_potentials: prior size mismatch");
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (prior->node[v].size() != pot.node[v].size())
        throw std::invalid_argument("assemble_potentials: prior table size mismatch");
      for (size_t y = 0; y < pot.node[v].size(); ++y) pot.node[v][y] += prior->node[v][y];
    }
  }

  const auto& theta = params.theta;
  for (const auto& f : features.node) {
    if (f.param < 0 || f.param >= static_cast<int>(theta.size()))
      throw std::invalid_argument("assemble_potentials: parameter index out of range");
    auto& table = pot.node[f.vertex];
    if (f.table.size() != table.size())
      throw std::invalid_argument("assemble_potentials: node feature table size mismatch");
    double w = theta[f.param];
    for (size_t y = 0; y < table.size(); ++y) table[y] += w * f.table[y];
  }
  for (const auto& f : features.factor) {
    if (f.param < 0 || f.param >= static_cast<int>(theta.size()))
      throw std::invalid_argument("assemble_potentials: parameter index out of range");
    auto& table = pot.factor[f.factor];
    if (f.table.size() != table.size())
      throw std::invalid_argument("assemble_potentials: factor feature table size mismatch");
    double w = theta[f.param];
    for (size_t y = 0; y < table.size(); ++y) table[y] += w * f.table[y];
  }
  return pot;
}

std::vector<double> empirical_means(const FactorGraph& g, const TrainingSet& data) {
  std::vector<double> d(data.features.dimension, 0.0);
  for (size_t e = 0; e < data.features.examples.size(); ++e) {
    const auto& features = data.features.examples[e];
    const auto& y = data.labels[e];
    for (const auto& f : features.node) d[f.param] += f.table[y[f.vertex]];
    for (const auto& f : features.factor)
      d[f.param] += f.table[g.factor_flat_index(f.factor, y)];
  }
  return d;
}

EntropyWeights make_weights(const FactorGraph& g, const TrainConfig& cfg) {
  return cfg.bethe ? bethe_weights(g) : uniform_weights(g, cfg.c_node, cfg.c_factor);
}

void validate(const FactorGraph& g, const TrainConfig& cfg) {
  if (cfg.epsilon < 0) throw std::invalid_argument("TrainConfig: epsilon must be >= 0");
  if (cfg.regularization <= 0) throw std::invalid_argument("TrainConfig: C must be > 0");
  if (cfg.p != 1 && cfg.p != 2) throw std::invalid_argument("TrainConfig: p must be 1 or 2");
  if (cfg.c_factor < 0) throw std::invalid_argument("TrainConfig: c_factor must be >= 0");
  if (!cfg.bethe && cfg.c_node < 0)
    throw std::invalid_argument("TrainConfig: negative c_node requires the bethe mode");
  if (cfg.max_outer < 1 || cfg.lambda_sweeps < 1 || cfg.threads < 1)
    throw std::invalid_argument("TrainConfig: counts must be >= 1");
  EntropyWeights w = make_weights(g, cfg);
  for (int v = 0; v < g.vertex_count(); ++v) {
    double chat = w.node[v];
    for (int a : g.vertex_factors(v)) chat += w.factor[a];
    if (chat <= 0 && cfg.epsilon > 0)
      throw std::invalid_argument("TrainConfig: c_v + sum c_alpha must be positive");
  }
}

const char* to_string(ParamMode mode) {
  return mode == ParamMode::full ? "full" : "shared";
}

ParamMode param_mode_from_string(const std::string& s) {
  if (s == "full") return ParamMode::full;
  if (s == "shared") return ParamMode::shared;
  throw std::invalid_argument("unknown parameter mode: " + s);
}

int denoise_dimension(const FactorGraph& grid, ParamMode mode) {
  int labels = grid.cardinality(0);
  if (mode == ParamMode::shared) return 4;
  long long d = 2LL * grid.vertex_count() * labels;
  for (int a = 0; a < grid.factor_count(); ++a) d += grid.factor_labels(a);
  return static_cast<int>(d);
}

ExampleFeatures denoise_features(const FactorGraph& grid, std::span<const double> pixels,
                                 ParamMode mode) {
  if (static_cast<int>(pixels.size()) != grid.vertex_count())
    throw std::invalid_argument("denoise_features: pixel count mismatch");
  const int labels = grid.cardinality(0);
  ExampleFeatures f;
  if (mode == ParamMode::shared) {
    // Four tied parameters: label-1 bias, label-1 pixel evidence, and
    // agree/disagree couplings. Pinning label 0 loses nothing on binary
    // grids since only potential differences matter.
    for (int v = 0; v < grid.vertex_count(); ++v) {
      NodeFeature bias{0, v, std::vector<double>(labels, 0.0)};
      bias.table[1] = 1.0;
      f.node.push_back(std::move(bias));
      NodeFeature evidence{1, v, std::vector<double>(labels, 0.0)};
      evidence.table[1] = pixels[v];
      f.node.push_back(std::move(evidence));
    }
    for (int a = 0; a < grid.factor_count(); ++a) {
      long long size = grid.factor_labels(a);
      FactorFeature agree{2, a, std::vector<double>(size, 0.0)};
      FactorFeature differ{3, a, std::vector<double>(size, 0.0)};
      std::vector<int> lab(grid.factor_arity(a));
      for (long long idx = 0; idx < size; ++idx) {
        grid.factor_label_decode(a, idx, lab);
        bool same = true;
        for (size_t k = 1; k < lab.size(); ++k) same = same && lab[k] == lab[0];
        (same ? agree : differ).table[idx] = 1.0;
      }
      f.factor.push_back(std::move(agree));
      f.factor.push_back(std::move(differ));
    }
    return f;
  }
  // full: per vertex-label bias and pixel evidence, then one indicator per
  // factor-label entry.
  f.node.reserve(2LL * grid.vertex_count() * labels);
  for (int v = 0; v < grid.vertex_count(); ++v) {
    for (int l = 0; l < labels; ++l) {
      NodeFeature bias{2 * v * labels + l, v, std::vector<double>(labels, 0.0)};
      bias.table[l] = 1.0;
      f.node.push_back(std::move(bias));
      NodeFeature evidence{2 * v * labels + labels + l, v, std::vector<double>(labels, 0.0)};
      evidence.table[l] = pixels[v];
      f.node.push_back(std::move(evidence));
    }
  }
  int param = 2 * grid.vertex_count() * labels;
  for (int a = 0; a < grid.factor_count(); ++a) {
    long long size = grid.factor_labels(a);
    for (long long idx = 0; idx < size; ++idx) {
      FactorFeature ff{param++, a, std::vector<double>(size, 0.0)};
      ff.table[idx] = 1.0;
      f.factor.push_back(std::move(ff));
    }
  }
  return f;
}

namespace {
constexpr const char* kModelFormat = "asp-model";
constexpr int kModelVersion = 1;
}  // namespace

void save_model(const std::string& path, const ModelHeader& header, const Parameters& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << kModelFormat << " " << kModelVersion << "\n";
  out << header.dimension << " " << header.height << " " << header.width << " "
      << header.labels << " " << to_string(header.mode) << "\n";
  char buf[64];
  for (double t : params.theta) {
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    out << buf << "\n";
  }
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

std::pair<ModelHeader, Parameters> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string format, mode;
  int version = 0;
  ModelHeader header;
  in >> format >> version;
  if (format != kModelFormat || version != kModelVersion)
    throw std::runtime_error("unsupported model file format: " + path);
  in >> header.dimension >> header.height >> header.width >> header.labels >> mode;
  header.mode = param_mode_from_string(mode);
  Parameters params;
  params.theta.resize(header.dimension);
  for (int r = 0; r < header.dimension; ++r) {
    if (!(in >> params.theta[r]))
      throw std::runtime_error("truncated model file: " + path);
  }
  return {header, params};
}

}  // namespace asp
