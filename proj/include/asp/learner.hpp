#pragma once

#include <string>

#include "asp/inference.hpp"
#include "asp/model.hpp"

namespace asp {

// Lagrange multiplier tables per training example, aligned with the graph's
// edge ids. Every lambda table is normalized to sum to zero; mu caches the
// latest factor-to-node values of the block updates.
struct MessageState {
  struct Example {
    std::vector<std::vector<double>> lambda;
    std::vector<std::vector<double>> mu;
  };
  std::vector<Example> examples;
};

struct TraceRow {
  int iter = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double grad_norm = 0.0;  // sup norm
  double eta = 0.0;
  double seconds = 0.0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
};

void write_trace_csv(const std::string& path, const TrainTrace& trace);

enum class TrainStatus { gap_reached, gradient_reached, stalled, budget_exhausted };
const char* to_string(TrainStatus status);

struct TrainResult {
  Parameters params;
  TrainTrace trace;
  TrainStatus status = TrainStatus::budget_exhausted;
  double primal = 0.0;
  double dual = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
};

struct LineSearchResult {
  double eta = 0.0;
  Parameters theta;
  double objective = 0.0;
  bool stalled = false;
};

// Block coordinate descent on the decomposed structured prediction objective:
// closed-form multiplier updates per vertex, gradient steps with Armijo
// backtracking in theta (diminishing subgradient steps at epsilon = 0), and
// primal/dual gap monitoring. All examples share one factor graph.
class Learner {
 public:
  Learner(const FactorGraph& g, const TrainingSet& data, TrainConfig cfg);

  MessageState make_state() const;

  // Closed-form minimizer of the objective over all multipliers leaving one
  // vertex of one example; no-op for isolated vertices.
  void lambda_block_update(MessageState& state, int example, int vertex,
                           const Parameters& params) const;

  // One fixed-order pass over every example and vertex; examples may run on
  // cfg.threads workers. Returns the max absolute multiplier change.
  double lambda_sweep(MessageState& state, const Parameters& params) const;

  BeliefSet beliefs_from_state(const MessageState& state, int example,
                               const Parameters& params) const;

  std::vector<double> theta_gradient(const MessageState& state, const Parameters& params) const;

  double primal_objective(const MessageState& state, const Parameters& params) const;

  // Dual value at beliefs derived from the state: factor beliefs are kept,
  // node beliefs are replaced by their factor-averaged marginals, and the
  // residual multiplier terms are added back, which certifies the value as a
  // lower bound on the primal for nonnegative weights and makes it exact at
  // a multiplier stationary point. Requires p = 2.
  double dual_objective(const MessageState& state, const Parameters& params) const;

  // Dual value at explicit beliefs. Without projection the marginalization
  // constraints are checked and infeasible beliefs are rejected.
  double dual_objective_at(const std::vector<BeliefSet>& beliefs, bool project) const;

  LineSearchResult line_search(const Parameters& params, const std::vector<double>& gradient,
                               const MessageState& state, double objective_before) const;

  TrainResult train() const;

  const std::vector<double>& empirical() const { return empirical_; }
  const EntropyWeights& weights() const { return weights_; }
  const TrainConfig& config() const { return cfg_; }
  int example_count() const { return static_cast<int>(data_.features.examples.size()); }

 private:
  struct Evaluation {
    double primal = 0.0;
    double dual = 0.0;
    std::vector<double> gradient;
    double grad_norm = 0.0;
  };

  std::vector<Potentials> assemble_all(const Parameters& params) const;
  double example_primal(const MessageState::Example& ex, const Potentials& pot) const;
  void example_beliefs(const MessageState::Example& ex, const Potentials& pot,
                       BeliefSet& out) const;
  // Replaces node beliefs by factor-averaged marginals. With an example's
  // multipliers given, returns sum_{v,a} lambda^T (marg b_a - avg), the exact
  // correction that keeps the dual below the primal away from stationarity.
  double project_node_beliefs(BeliefSet& beliefs, const MessageState::Example* ex) const;
  double regularizer(const Parameters& params) const;
  double moment_penalty(const std::vector<double>& moments) const;
  Evaluation evaluate(const MessageState& state, const Parameters& params,
                      const std::vector<Potentials>& pots) const;

  const FactorGraph& graph_;
  const TrainingSet& data_;
  TrainConfig cfg_;
  EntropyWeights weights_;
  std::vector<double> empirical_;
  bool convex_ = true;  // all entropy weights nonnegative
};

}  // namespace asp
