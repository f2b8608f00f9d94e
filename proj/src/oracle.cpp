#include "asp/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "asp/numerics.hpp"

namespace asp {
namespace oracle {

namespace {

void next_labeling(const FactorGraph& g, std::vector<int>& labeling) {
  for (int v = g.vertex_count() - 1; v >= 0; --v) {
    if (++labeling[v] < g.cardinality(v)) return;
    labeling[v] = 0;
  }
}

}  // namespace

long long state_count(const FactorGraph& g) {
  long long count = 1;
  for (int v = 0; v < g.vertex_count(); ++v) {
    count *= g.cardinality(v);
    if (count > kMaxStates)
      throw std::invalid_argument("oracle: state space exceeds the enumeration bound");
  }
  return count;
}

double labeling_score(const FactorGraph& g, const Potentials& pot, const LossPrior* prior,
                      std::span<const int> labeling) {
  double score = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    score += pot.node[v][labeling[v]];
    if (prior) score += prior->node[v][labeling[v]];
  }
  for (int a = 0; a < g.factor_count(); ++a)
    score += pot.factor[a][g.factor_flat_index(a, labeling)];
  return score;
}

double exact_soft_max(const FactorGraph& g, const Potentials& pot, const LossPrior* prior,
                      double epsilon) {
  const long long count = state_count(g);
  std::vector<double> scores(count);
  std::vector<int> labeling(g.vertex_count(), 0);
  for (long long i = 0; i < count; ++i, next_labeling(g, labeling))
    scores[i] = labeling_score(g, pot, prior, labeling);
  return soft_max(scores, epsilon);
}

ExactSummary exact_marginals(const FactorGraph& g, const Potentials& pot,
                             const LossPrior* prior, double epsilon) {
  const long long count = state_count(g);
  ExactSummary summary;
  std::vector<double> scores(count);
  std::vector<int> labeling(g.vertex_count(), 0);
  long long best = 0;
  for (long long i = 0; i < count; ++i, next_labeling(g, labeling)) {
    scores[i] = labeling_score(g, pot, prior, labeling);
    if (scores[i] > scores[best]) best = i;
  }
  summary.log_z = soft_max(scores, epsilon);
  summary.joint = soft_max_distribution(scores, epsilon);

  summary.map_labeling.assign(g.vertex_count(), 0);
  std::vector<int> tmp(g.vertex_count(), 0);
  for (long long i = 0; i < best; ++i) next_labeling(g, tmp);
  summary.map_labeling = tmp;

  summary.node_marginals.resize(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v)
    summary.node_marginals[v].assign(g.cardinality(v), 0.0);
  summary.factor_marginals.resize(g.factor_count());
  for (int a = 0; a < g.factor_count(); ++a)
    summary.factor_marginals[a].assign(g.factor_labels(a), 0.0);

  labeling.assign(g.vertex_count(), 0);
  for (long long i = 0; i < count; ++i, next_labeling(g, labeling)) {
    double p = summary.joint[i];
    if (p == 0.0) continue;
    for (int v = 0; v < g.vertex_count(); ++v)
      summary.node_marginals[v][labeling[v]] += p;
    for (int a = 0; a < g.factor_count(); ++a)
      summary.factor_marginals[a][g.factor_flat_index(a, labeling)] += p;
  }
  return summary;
}

std::pair<double, std::vector<double>> exact_objective_and_gradient(
    const FactorGraph& g, const TrainingSet& data, const Parameters& params,
    const TrainConfig& cfg) {
  std::vector<double> d = empirical_means(g, data);
  std::vector<double> grad(d.size(), 0.0);
  double objective = 0.0;
  for (size_t e = 0; e < data.features.examples.size(); ++e) {
    const auto& features = data.features.examples[e];
    Potentials pot = assemble_potentials(g, params, features, &data.priors[e]);
    ExactSummary summary = exact_marginals(g, pot, nullptr, cfg.epsilon);
    objective += summary.log_z;
    for (const auto& f : features.node)
      for (size_t y = 0; y < f.table.size(); ++y)
        grad[f.param] += summary.node_marginals[f.vertex][y] * f.table[y];
    for (const auto& f : features.factor)
      for (size_t y = 0; y < f.table.size(); ++y)
        grad[f.param] += summary.factor_marginals[f.factor][y] * f.table[y];
  }
  const double C = cfg.regularization;
  for (size_t r = 0; r < d.size(); ++r) {
    double t = params.theta[r];
    objective -= d[r] * t;
    grad[r] -= d[r];
    if (cfg.p == 2) {
      objective += 0.5 * C * t * t;
      grad[r] += C * t;
    } else {
      objective += C * std::abs(t);
      grad[r] += t > 0 ? C : t < 0 ? -C : 0.0;
    }
  }
  return {objective, grad};
}

ExactLosses exact_losses(const FactorGraph& g, const Parameters& params,
                         const ExampleFeatures& features, std::span<const int> truth,
                         const LossPrior& prior) {
  Potentials pot = assemble_potentials(g, params, features, nullptr);
  double truth_score = labeling_score(g, pot, nullptr, truth);
  ExactLosses losses;
  losses.hinge = exact_soft_max(g, pot, &prior, 0.0) - truth_score;
  losses.log_likelihood = exact_soft_max(g, pot, &prior, 1.0) - truth_score;
  return losses;
}

}  // namespace oracle
}  // namespace asp
