#include <stdexcept>
#include <cmath>

#include "asp/inference.hpp"
#include "asp/numerics.hpp"
#include "asp/oracle.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace asp;

namespace {

Potentials zero_potentials(const FactorGraph& g) {
  Potentials pot;
  pot.node.resize(g.vertex_count());
  pot.factor.resize(g.factor_count());
  for (int v = 0; v < g.vertex_count(); ++v) pot.node[v].assign(g.cardinality(v), 0.0);
  for (int a = 0; a < g.factor_count(); ++a) pot.factor[a].assign(g.factor_labels(a), 0.0);
  return pot;
}

void check_belief_validity(const FactorGraph& g, const BeliefSet& beliefs) {
  for (int v = 0; v < g.vertex_count(); ++v) {
    double total = 0.0;
    for (double x : beliefs.node[v]) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) <= 1e-10);
  }
  for (int a = 0; a < g.factor_count(); ++a) {
    double total = 0.0;
    for (double x : beliefs.factor[a]) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) <= 1e-10);
  }
}

}  // namespace

TEST_CASE("norm product on a single vertex") {
  FactorGraph g({2}, {});
  Potentials pot = zero_potentials(g);
  pot.node[0] = {0.0, 2.0};
  auto result = run_norm_product(g, pot, uniform_weights(g, 1.0, 1.0), 1.0);
  CHECK(result.converged);
  CHECK(result.messages.node_to_factor.empty());
  auto beliefs =
      extract_beliefs(g, result.messages, pot, uniform_weights(g, 1.0, 1.0), 1.0);
  CHECK(beliefs.node[0][1] == doctest::Approx(std::exp(2.0) / (1 + std::exp(2.0))));
}

TEST_CASE("acyclic chain reproduces exact marginals with Bethe weights") {
  SplitMix64 rng(51);
  FactorGraph g = build_grid(1, 3, 2);
  Potentials pot = test_util::random_potentials(rng, g);
  EntropyWeights weights = bethe_weights(g);
  auto result = run_norm_product(g, pot, weights, 1.0);
  CHECK(result.converged);
  auto beliefs = extract_beliefs(g, result.messages, pot, weights, 1.0);
  auto summary = oracle::exact_marginals(g, pot, nullptr, 1.0);
  for (int v = 0; v < g.vertex_count(); ++v)
    for (int y = 0; y < 2; ++y)
      CHECK(beliefs.node[v][y] == doctest::Approx(summary.node_marginals[v][y]).epsilon(1e-8));
  for (int a = 0; a < g.factor_count(); ++a)
    for (int y = 0; y < 4; ++y)
      CHECK(beliefs.factor[a][y] ==
            doctest::Approx(summary.factor_marginals[a][y]).epsilon(1e-8));
  CHECK(soft_max_estimate(g, beliefs, pot, weights, 1.0) ==
        doctest::Approx(summary.log_z).epsilon(1e-8));
}

TEST_CASE("acyclic exactness across random graphs, labels and epsilons") {
  SplitMix64 rng(52);
  for (int trial = 0; trial < 40; ++trial) {
    FactorGraph g = test_util::random_acyclic_graph(rng, 8, 3);
    Potentials pot = test_util::random_potentials(rng, g);
    EntropyWeights weights = bethe_weights(g);
    for (double eps : {1.0, 0.5, 0.01}) {
      auto result = run_norm_product(g, pot, weights, eps, {1e-12, 2000});
      CHECK(result.converged);
      auto beliefs = extract_beliefs(g, result.messages, pot, weights, eps);
      auto summary = oracle::exact_marginals(g, pot, nullptr, eps);
      CHECK(std::abs(soft_max_estimate(g, beliefs, pot, weights, eps) - summary.log_z) <=
            1e-7);
      for (int v = 0; v < g.vertex_count(); ++v)
        for (int y = 0; y < g.cardinality(v); ++y)
          CHECK(std::abs(beliefs.node[v][y] - summary.node_marginals[v][y]) <= 1e-7);
    }
  }
}

TEST_CASE("beliefs stay valid and normalization of messages is immaterial") {
  SplitMix64 rng(53);
  FactorGraph g = build_grid(2, 3, 2);
  Potentials pot = test_util::random_potentials(rng, g);
  EntropyWeights weights = uniform_weights(g, 1.0, 1.0);
  auto result = run_norm_product(g, pot, weights, 1.0);
  CHECK(result.converged);
  auto beliefs = extract_beliefs(g, result.messages, pot, weights, 1.0);
  check_belief_validity(g, beliefs);

  // Adding a constant to one node-to-factor table leaves beliefs unchanged:
  // factor beliefs renormalize it away and node beliefs never read it.
  InferenceMessages shifted = result.messages;
  for (double& x : shifted.node_to_factor[0]) x += 3.7;
  auto beliefs2 = extract_beliefs(g, shifted, pot, weights, 1.0);
  for (int v = 0; v < g.vertex_count(); ++v)
    for (int y = 0; y < 2; ++y)
      CHECK(beliefs2.node[v][y] == doctest::Approx(beliefs.node[v][y]).epsilon(1e-12));
  for (int a = 0; a < g.factor_count(); ++a)
    for (int y = 0; y < 4; ++y)
      CHECK(beliefs2.factor[a][y] == doctest::Approx(beliefs.factor[a][y]).epsilon(1e-12));
}

TEST_CASE("zero potentials give uniform beliefs") {
  FactorGraph g = build_grid(2, 2, 2);
  Potentials pot = zero_potentials(g);
  EntropyWeights weights = uniform_weights(g, 1.0, 1.0);
  auto msgs = make_messages(g);
  auto beliefs = extract_beliefs(g, msgs, pot, weights, 1.0);
  for (int v = 0; v < g.vertex_count(); ++v)
    for (double x : beliefs.node[v]) CHECK(x == doctest::Approx(0.5));
}

TEST_CASE("epsilon zero beliefs live on the maximizers") {
  SplitMix64 rng(54);
  FactorGraph g = build_grid(1, 2, 2);
  Potentials pot = test_util::random_potentials(rng, g, 2.0);
  EntropyWeights weights = uniform_weights(g, 1.0, 1.0);
  auto result = run_norm_product(g, pot, weights, 0.0, {1e-10, 200});
  auto beliefs = extract_beliefs(g, result.messages, pot, weights, 0.0);
  check_belief_validity(g, beliefs);
  for (int a = 0; a < g.factor_count(); ++a) {
    double best = -1e300;
    std::vector<double> arg(pot.factor[a].size());
    std::vector<int> lab(2);
    for (long long flat = 0; flat < g.factor_labels(a); ++flat) {
      g.factor_label_decode(a, flat, lab);
      arg[flat] = pot.factor[a][flat] +
                  result.messages.node_to_factor[g.edge_id(a, 0)][lab[0]] +
                  result.messages.node_to_factor[g.edge_id(a, 1)][lab[1]];
      best = std::max(best, arg[flat]);
    }
    for (long long flat = 0; flat < g.factor_labels(a); ++flat)
      if (beliefs.factor[a][flat] > 0) CHECK(arg[flat] == doctest::Approx(best));
  }
}

TEST_CASE("concave weights converge on loopy grids") {
  SplitMix64 rng(55);
  for (int size = 2; size <= 10; size += 4) {
    FactorGraph g = build_grid(size, size, 2);
    Potentials pot = test_util::random_potentials(rng, g);
    auto result = run_norm_product(g, pot, uniform_weights(g, 1.0, 1.0), 1.0);
    CHECK(result.converged);
    CHECK(result.residual < 1e-8);
  }
}

TEST_CASE("predict") {
  SUBCASE("single vertex argmax") {
    FactorGraph g({2}, {});
    Potentials pot = zero_potentials(g);
    pot.node[0] = {0.0, 2.0};
    auto labeling = predict(g, pot, uniform_weights(g, 1.0, 1.0), 1.0);
    CHECK(labeling[0] == 1);
  }

  SUBCASE("attractive chain copies a pinned vertex") {
    FactorGraph g = build_grid(1, 5, 2);
    Potentials pot = zero_potentials(g);
    pot.node[0] = {0.0, 4.0};  // pin vertex 0 to label 1
    for (int a = 0; a < g.factor_count(); ++a)
      pot.factor[a] = {3.0, 0.0, 0.0, 3.0};  // strong agreement
    EntropyWeights weights = bethe_weights(g);
    auto labeling = predict(g, pot, weights, 0.01);
    // Exact MAP by enumeration agrees.
    auto summary = oracle::exact_marginals(g, pot, nullptr, 0.0);
    for (int v = 0; v < 5; ++v) {
      CHECK(labeling[v] == 1);
      CHECK(labeling[v] == summary.map_labeling[v]);
    }
  }

  SUBCASE("ties break toward the lowest label") {
    FactorGraph g = build_grid(2, 2, 2);
    Potentials pot = zero_potentials(g);
    auto labeling = predict(g, pot, uniform_weights(g, 1.0, 1.0), 1.0);
    for (int v = 0; v < 4; ++v) CHECK(labeling[v] == 0);
  }
}

TEST_CASE("invalid weights are rejected") {
  FactorGraph g = build_grid(1, 2, 2);
  Potentials pot = zero_potentials(g);
  EntropyWeights negative = uniform_weights(g, 1.0, -1.0);
  CHECK_THROWS_AS(run_norm_product(g, pot, negative, 1.0), std::invalid_argument);
  EntropyWeights degenerate = uniform_weights(g, -1.0, 1.0);
  // c_v + sum c_alpha = 0 for the two endpoints of a single edge.
  CHECK_THROWS_AS(run_norm_product(g, pot, degenerate, 1.0), std::invalid_argument);
}
