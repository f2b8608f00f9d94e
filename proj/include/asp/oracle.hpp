#pragma once

#include "asp/inference.hpp"
#include "asp/model.hpp"

namespace asp {
namespace oracle {

// Brute-force enumeration over complete labelings. Every function refuses
// graphs with more than 2^20 joint labelings rather than approximate.
// Enumeration is row-major over vertices: the last vertex varies fastest.

inline constexpr long long kMaxStates = 1LL << 20;

long long state_count(const FactorGraph& g);

// Total score of one labeling: sum of node and factor potentials, plus the
// loss prior when given (pass potentials assembled without it).
double labeling_score(const FactorGraph& g, const Potentials& pot, const LossPrior* prior,
                      std::span<const int> labeling);

// eps-scaled log-sum-exp of all labeling scores; the max at eps = 0.
double exact_soft_max(const FactorGraph& g, const Potentials& pot, const LossPrior* prior,
                      double epsilon);

struct ExactSummary {
  double log_z = 0.0;                               // exact eps-soft-max
  std::vector<double> joint;                        // p_eps over all labelings
  std::vector<std::vector<double>> node_marginals;
  std::vector<std::vector<double>> factor_marginals;
  std::vector<int> map_labeling;                    // first maximizer in enumeration order
};

ExactSummary exact_marginals(const FactorGraph& g, const Potentials& pot,
                             const LossPrior* prior, double epsilon);

// Exact structured prediction objective sum ln Z_eps - d^T theta + (C/p)||theta||_p^p
// and its gradient through the exact marginals.
std::pair<double, std::vector<double>> exact_objective_and_gradient(
    const FactorGraph& g, const TrainingSet& data, const Parameters& params,
    const TrainConfig& cfg);

struct ExactLosses {
  double hinge = 0.0;
  double log_likelihood = 0.0;
};

// Structured hinge loss and negative log-likelihood of one example.
ExactLosses exact_losses(const FactorGraph& g, const Parameters& params,
                         const ExampleFeatures& features, std::span<const int> truth,
                         const LossPrior& prior);

}  // namespace oracle
}  // namespace asp
