#pragma once

#include "asp/model.hpp"

namespace asp {

// Log-domain messages on the edges of the factor graph, indexed by edge id.
// node_to_factor tables are normalized to sum to zero.
struct InferenceMessages {
  std::vector<std::vector<double>> factor_to_node;  // ln m_{alpha -> v}
  std::vector<std::vector<double>> node_to_factor;  // ln n_{v -> alpha}
};

struct BeliefSet {
  std::vector<std::vector<double>> node;    // b_v
  std::vector<std::vector<double>> factor;  // b_alpha
};

struct InferenceOptions {
  double tolerance = 1e-8;  // max absolute log-message change per sweep
  int max_sweeps = 1000;
};

struct InferenceResult {
  InferenceMessages messages;
  bool converged = false;
  int sweeps = 0;
  double residual = 0.0;
};

InferenceMessages make_messages(const FactorGraph& g);

// Norm-product message passing at a fixed set of potentials. Sweeps vertices
// in index order, for each recomputing all incoming factor-to-node messages
// and then all outgoing node-to-factor messages. Convergence is guaranteed
// only for nonnegative entropy weights; the flag reports what happened.
InferenceResult run_norm_product(const FactorGraph& g, const Potentials& pot,
                                 const EntropyWeights& weights, double epsilon,
                                 const InferenceOptions& options = {});

BeliefSet extract_beliefs(const FactorGraph& g, const InferenceMessages& messages,
                          const Potentials& pot, const EntropyWeights& weights,
                          double epsilon);

// Value of the local variational objective at the beliefs; on acyclic graphs
// with Bethe weights this equals the eps-soft-max of the potentials.
double soft_max_estimate(const FactorGraph& g, const BeliefSet& beliefs,
                         const Potentials& pot, const EntropyWeights& weights,
                         double epsilon);

// Per-vertex argmax of the node beliefs, ties broken toward the lowest label.
std::vector<int> predict(const FactorGraph& g, const Potentials& pot,
                         const EntropyWeights& weights, double epsilon,
                         const InferenceOptions& options = {});

namespace detail {

// Block update at vertex v: recompute the factor-to-node tables into v from
// the other endpoints' node-to-factor tables, then replace every outgoing
// node-to-factor table. Node potentials must already carry any loss prior.
// Returns the max absolute change over the outgoing tables.
//
// The factor-to-node table uses the eps*c_alpha scaled log-sum-exp (the max
// function when the scale is zero). For epsilon > 0 the mixing coefficients
// use the entropy weights as given; for epsilon = 0 nonpositive weights are
// replaced by 1, any positive value being optimal there.
double update_vertex_block(const FactorGraph& g, int v, const Potentials& pot,
                           const EntropyWeights& weights, double epsilon,
                           std::vector<std::vector<double>>& node_to_factor,
                           std::vector<std::vector<double>>& factor_to_node);

void check_weights(const FactorGraph& g, const EntropyWeights& weights, double epsilon);

}  // namespace detail

}  // namespace asp
