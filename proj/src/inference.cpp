#include "asp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "asp/numerics.hpp"

namespace asp {

namespace detail {

void check_weights(const FactorGraph& g, const EntropyWeights& weights, double epsilon) {
  if (static_cast<int>(weights.node.size()) != g.vertex_count() ||
      static_cast<int>(weights.factor.size()) != g.factor_count())
    throw std::invalid_argument("entropy weights sized for a different graph");
  for (double c : weights.factor)
    if (c < 0) throw std::invalid_argument("factor entropy weights must be >= 0");
  if (epsilon > 0) {
    for (int v = 0; v < g.vertex_count(); ++v) {
      double chat = weights.node[v];
      for (int a : g.vertex_factors(v)) chat += weights.factor[a];
      if (g.degree(v) > 0 && chat <= 0)
        throw std::invalid_argument("c_v + sum of c_alpha must be positive");
    }
  }
}

namespace {

// Scaled log-sum-exp of (factor potential + other endpoints' node-to-factor
// tables) over the factor labels compatible with each label of vertex v.
void marginalize_into(const FactorGraph& g, int a, int v_slot, const Potentials& pot,
                      const std::vector<std::vector<double>>& node_to_factor,
                      double scale, std::vector<double>& out) {
  const auto& members = g.factor_vertices(a);
  const auto& table = pot.factor[a];
  const long long size = g.factor_labels(a);
  const int v = members[v_slot];
  const long long v_stride = g.factor_stride(a, v_slot);
  const int v_card = g.cardinality(v);

  out.assign(v_card, 0.0);
  std::vector<double> best(v_card, -std::numeric_limits<double>::infinity());
  std::vector<double> sum(v_card, 0.0);

  for (long long flat = 0; flat < size; ++flat) {
    double score = table[flat];
    for (size_t k = 0; k < members.size(); ++k) {
      if (static_cast<int>(k) == v_slot) continue;
      int lab = static_cast<int>((flat / g.factor_stride(a, k)) % g.cardinality(members[k]));
      score += node_to_factor[g.edge_id(a, static_cast<int>(k))][lab];
    }
    int yv = static_cast<int>((flat / v_stride) % v_card);
    if (scale == 0.0) {
      if (score > best[yv]) best[yv] = score;
    } else if (score <= best[yv]) {
      sum[yv] += std::exp((score - best[yv]) / scale);
    } else {
      sum[yv] = sum[yv] * std::exp((best[yv] - score) / scale) + 1.0;
      best[yv] = score;
    }
  }
  for (int y = 0; y < v_card; ++y)
    out[y] = scale == 0.0 ? best[y] : best[y] + scale * std::log(sum[y]);
}

}  // namespace

double update_vertex_block(const FactorGraph& g, int v, const Potentials& pot,
                           const EntropyWeights& weights, double epsilon,
                           std::vector<std::vector<double>>& node_to_factor,
                           std::vector<std::vector<double>>& factor_to_node) {
  const auto& factors = g.vertex_factors(v);
  if (factors.empty()) return 0.0;
  const int card = g.cardinality(v);

  std::vector<double> sums(pot.node[v].begin(), pot.node[v].end());
  double chat = epsilon == 0.0 && weights.node[v] <= 0 ? 1.0 : weights.node[v];
  for (int a : factors) {
    int eid = g.edge_id(a, g.slot_of(a, v));
    marginalize_into(g, a, g.slot_of(a, v), pot, node_to_factor,
                     epsilon * weights.factor[a], factor_to_node[eid]);
    for (int y = 0; y < card; ++y) sums[y] += factor_to_node[eid][y];
    chat += epsilon == 0.0 && weights.factor[a] <= 0 ? 1.0 : weights.factor[a];
  }
  if (chat <= 0) throw std::invalid_argument("update_vertex_block: nonpositive c_v hat");

  double residual = 0.0;
  for (int a : factors) {
    int eid = g.edge_id(a, g.slot_of(a, v));
    double coef = (epsilon == 0.0 && weights.factor[a] <= 0 ? 1.0 : weights.factor[a]) / chat;
    auto& table = node_to_factor[eid];
    const auto& incoming = factor_to_node[eid];
    double mean = 0.0;
    for (int y = 0; y < card; ++y) mean += coef * sums[y] - incoming[y];
    mean /= card;
    for (int y = 0; y < card; ++y) {
      double value = coef * sums[y] - incoming[y] - mean;
      residual = std::max(residual, std::abs(value - table[y]));
      table[y] = value;
    }
  }
  return residual;
}

}  // namespace detail

InferenceMessages make_messages(const FactorGraph& g) {
  InferenceMessages msgs;
  msgs.factor_to_node.resize(g.edge_count());
  msgs.node_to_factor.resize(g.edge_count());
  for (int a = 0; a < g.factor_count(); ++a) {
    for (int k = 0; k < g.factor_arity(a); ++k) {
      int card = g.cardinality(g.factor_vertices(a)[k]);
      msgs.factor_to_node[g.edge_id(a, k)].assign(card, 0.0);
      msgs.node_to_factor[g.edge_id(a, k)].assign(card, 0.0);
    }
  }
  return msgs;
}

InferenceResult run_norm_product(const FactorGraph& g, const Potentials& pot,
                                 const EntropyWeights& weights, double epsilon,
                                 const InferenceOptions& options) {
  detail::check_weights(g, weights, epsilon);
  InferenceResult result;
  result.messages = make_messages(g);
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double residual = 0.0;
    for (int v = 0; v < g.vertex_count(); ++v) {
      double r = detail::update_vertex_block(g, v, pot, weights, epsilon,
                                             result.messages.node_to_factor,
                                             result.messages.factor_to_node);
      residual = std::max(residual, r);
    }
    result.sweeps = sweep;
    result.residual = residual;
    if (residual < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (g.edge_count() == 0) result.converged = true;
  return result;
}

BeliefSet extract_beliefs(const FactorGraph& g, const InferenceMessages& messages,
                          const Potentials& pot, const EntropyWeights& weights,
                          double epsilon) {
  BeliefSet beliefs;
  beliefs.node.resize(g.vertex_count());
  beliefs.factor.resize(g.factor_count());

  std::vector<double> arg;
  for (int v = 0; v < g.vertex_count(); ++v) {
    arg.assign(pot.node[v].begin(), pot.node[v].end());
    double chat = weights.node[v];
    for (int a : g.vertex_factors(v)) {
      chat += weights.factor[a];
      const auto& m = messages.factor_to_node[g.edge_id(a, g.slot_of(a, v))];
      for (size_t y = 0; y < arg.size(); ++y) arg[y] += m[y];
    }
    beliefs.node[v].resize(arg.size());
    scaled_softmax_distribution(arg, epsilon * chat, beliefs.node[v]);
  }

  std::vector<int> lab;
  for (int a = 0; a < g.factor_count(); ++a) {
    const auto& members = g.factor_vertices(a);
    const long long size = g.factor_labels(a);
    arg.assign(pot.factor[a].begin(), pot.factor[a].end());
    lab.resize(members.size());
    for (long long flat = 0; flat < size; ++flat) {
      g.factor_label_decode(a, flat, lab);
      for (size_t k = 0; k < members.size(); ++k)
        arg[flat] += messages.node_to_factor[g.edge_id(a, static_cast<int>(k))][lab[k]];
    }
    beliefs.factor[a].resize(size);
    scaled_softmax_distribution(arg, epsilon * weights.factor[a], beliefs.factor[a]);
  }
  return beliefs;
}

double soft_max_estimate(const FactorGraph& g, const BeliefSet& beliefs,
                         const Potentials& pot, const EntropyWeights& weights,
                         double epsilon) {
  double linear = 0.0;
  double local_entropy = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    for (size_t y = 0; y < beliefs.node[v].size(); ++y)
      linear += beliefs.node[v][y] * pot.node[v][y];
    local_entropy += weights.node[v] * entropy(beliefs.node[v]);
  }
  for (int a = 0; a < g.factor_count(); ++a) {
    for (size_t y = 0; y < beliefs.factor[a].size(); ++y)
      linear += beliefs.factor[a][y] * pot.factor[a][y];
    local_entropy += weights.factor[a] * entropy(beliefs.factor[a]);
  }
  return linear + epsilon * local_entropy;
}

std::vector<int> predict(const FactorGraph& g, const Potentials& pot,
                         const EntropyWeights& weights, double epsilon,
                         const InferenceOptions& options) {
  InferenceResult result = run_norm_product(g, pot, weights, epsilon, options);
  BeliefSet beliefs = extract_beliefs(g, result.messages, pot, weights, epsilon);
  std::vector<int> labeling(g.vertex_count(), 0);
  for (int v = 0; v < g.vertex_count(); ++v) {
    const auto& b = beliefs.node[v];
    int best = 0;
    for (size_t y = 1; y < b.size(); ++y)
      if (b[y] > b[best]) best = static_cast<int>(y);
    labeling[v] = best;
  }
  return labeling;
}

}  // namespace asp
