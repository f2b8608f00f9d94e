#include "asp/learner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "asp/numerics.hpp"
#include "asp/parallel.hpp"

namespace asp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double relative_gap(double primal, double dual) {
  return (primal - dual) / (1.0 + std::abs(primal));
}

}  // namespace

void write_trace_csv(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  out << "iter,primal,dual,gap,grad_norm,eta,seconds\n";
  char buf[256];
  for (const auto& r : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f\n", r.iter,
                  r.primal, r.dual, r.gap, r.grad_norm, r.eta, r.seconds);
    out << buf;
  }
}

const char* to_string(TrainStatus status) {
  switch (status) {
    case TrainStatus::gap_reached: return "gap_reached";
    case TrainStatus::gradient_reached: return "gradient_reached";
    case TrainStatus::stalled: return "stalled";
    case TrainStatus::budget_exhausted: return "budget_exhausted";
  }
  return "unknown";
}

Learner::Learner(const FactorGraph& g, const TrainingSet& data, TrainConfig cfg)
    : graph_(g), data_(data), cfg_(cfg) {
  validate(g, cfg_);
  size_t n = data_.features.examples.size();
  if (data_.labels.size() != n || data_.priors.size() != n)
    throw std::invalid_argument("Learner: labels/priors/features counts differ");
  weights_ = make_weights(g, cfg_);
  empirical_ = empirical_means(g, data_);
  for (double c : weights_.node) convex_ = convex_ && c >= 0;
  for (double c : weights_.factor) convex_ = convex_ && c >= 0;
}

MessageState Learner::make_state() const {
  MessageState state;
  state.examples.resize(data_.features.examples.size());
  for (auto& ex : state.examples) {
    ex.lambda.resize(graph_.edge_count());
    ex.mu.resize(graph_.edge_count());
    for (int a = 0; a < graph_.factor_count(); ++a) {
      for (int k = 0; k < graph_.factor_arity(a); ++k) {
        int card = graph_.cardinality(graph_.factor_vertices(a)[k]);
        ex.lambda[graph_.edge_id(a, k)].assign(card, 0.0);
        ex.mu[graph_.edge_id(a, k)].assign(card, 0.0);
      }
    }
  }
  return state;
}

std::vector<Potentials> Learner::assemble_all(const Parameters& params) const {
  std::vector<Potentials> pots(data_.features.examples.size());
  parallel_for(static_cast<int>(pots.size()), cfg_.threads, [&](int e) {
    pots[e] = assemble_potentials(graph_, params, data_.features.examples[e], &data_.priors[e]);
  });
  return pots;
}

void Learner::lambda_block_update(MessageState& state, int example, int vertex,
                                  const Parameters& params) const {
  Potentials pot = assemble_potentials(graph_, params, data_.features.examples[example],
                                       &data_.priors[example]);
  detail::update_vertex_block(graph_, vertex, pot, weights_, cfg_.epsilon,
                              state.examples[example].lambda, state.examples[example].mu);
}

double Learner::lambda_sweep(MessageState& state, const Parameters& params) const {
  std::vector<Potentials> pots = assemble_all(params);
  std::vector<double> residuals(state.examples.size(), 0.0);
  parallel_for(static_cast<int>(state.examples.size()), cfg_.threads, [&](int e) {
    double r = 0.0;
    for (int v = 0; v < graph_.vertex_count(); ++v)
      r = std::max(r, detail::update_vertex_block(graph_, v, pots[e], weights_, cfg_.epsilon,
                                                  state.examples[e].lambda,
                                                  state.examples[e].mu));
    residuals[e] = r;
  });
  double residual = 0.0;
  for (double r : residuals) residual = std::max(residual, r);
  return residual;
}

double Learner::example_primal(const MessageState::Example& ex, const Potentials& pot) const {
  double total = 0.0;
  std::vector<double> arg;
  for (int v = 0; v < graph_.vertex_count(); ++v) {
    arg.assign(pot.node[v].begin(), pot.node[v].end());
    for (int a : graph_.vertex_factors(v)) {
      const auto& lam = ex.lambda[graph_.edge_id(a, graph_.slot_of(a, v))];
      for (size_t y = 0; y < arg.size(); ++y) arg[y] -= lam[y];
    }
    total += scaled_log_sum_exp(arg, cfg_.epsilon * weights_.node[v]);
  }
  std::vector<int> lab;
  for (int a = 0; a < graph_.factor_count(); ++a) {
    const auto& members = graph_.factor_vertices(a);
    arg.assign(pot.factor[a].begin(), pot.factor[a].end());
    lab.resize(members.size());
    for (long long flat = 0; flat < graph_.factor_labels(a); ++flat) {
      graph_.factor_label_decode(a, flat, lab);
      for (size_t k = 0; k < members.size(); ++k)
        arg[flat] += ex.lambda[graph_.edge_id(a, static_cast<int>(k))][lab[k]];
    }
    total += scaled_log_sum_exp(arg, cfg_.epsilon * weights_.factor[a]);
  }
  return total;
}

void Learner::example_beliefs(const MessageState::Example& ex, const Potentials& pot,
                              BeliefSet& out) const {
  out.node.resize(graph_.vertex_count());
  out.factor.resize(graph_.factor_count());
  std::vector<double> arg;
  std::vector<int> lab;
  for (int a = 0; a < graph_.factor_count(); ++a) {
    const auto& members = graph_.factor_vertices(a);
    arg.assign(pot.factor[a].begin(), pot.factor[a].end());
    lab.resize(members.size());
    for (long long flat = 0; flat < graph_.factor_labels(a); ++flat) {
      graph_.factor_label_decode(a, flat, lab);
      for (size_t k = 0; k < members.size(); ++k)
        arg[flat] += ex.lambda[graph_.edge_id(a, static_cast<int>(k))][lab[k]];
    }
    out.factor[a].resize(arg.size());
    scaled_softmax_distribution(arg, cfg_.epsilon * weights_.factor[a], out.factor[a]);
  }
  for (int v = 0; v < graph_.vertex_count(); ++v) {
    const auto& factors = graph_.vertex_factors(v);
    if (cfg_.epsilon > 0 && weights_.node[v] == 0.0 && !factors.empty()) {
      // The node term is a max whose argument is constant at a multiplier
      // stationary point, so any distribution is admissible; the averaged
      // factor marginal is the one that agrees with the factor beliefs.
      std::vector<double> avg(graph_.cardinality(v), 0.0);
      for (int a : factors) {
        int slot = graph_.slot_of(a, v);
        long long stride = graph_.factor_stride(a, slot);
        for (long long flat = 0; flat < graph_.factor_labels(a); ++flat)
          avg[(flat / stride) % graph_.cardinality(v)] += out.factor[a][flat];
      }
      for (double& x : avg) x /= factors.size();
      out.node[v] = std::move(avg);
      continue;
    }
    arg.assign(pot.node[v].begin(), pot.node[v].end());
    for (int a : factors) {
      const auto& lam = ex.lambda[graph_.edge_id(a, graph_.slot_of(a, v))];
      for (size_t y = 0; y < arg.size(); ++y) arg[y] -= lam[y];
    }
    out.node[v].resize(arg.size());
    scaled_softmax_distribution(arg, cfg_.epsilon * weights_.node[v], out.node[v]);
  }
}

BeliefSet Learner::beliefs_from_state(const MessageState& state, int example,
                                      const Parameters& params) const {
  Potentials pot = assemble_potentials(graph_, params, data_.features.examples[example],
                                       &data_.priors[example]);
  BeliefSet beliefs;
  example_beliefs(state.examples[example], pot, beliefs);
  return beliefs;
}

double Learner::project_node_beliefs(BeliefSet& beliefs, const MessageState::Example* ex) const {
  double correction = 0.0;
  std::vector<double> marg, avg, lambda_sum;
  for (int v = 0; v < graph_.vertex_count(); ++v) {
    const auto& factors = graph_.vertex_factors(v);
    if (factors.empty()) continue;
    const int card = graph_.cardinality(v);
    avg.assign(card, 0.0);
    lambda_sum.assign(card, 0.0);
    double lambda_dot_marg = 0.0;
    for (int a : factors) {
      int slot = graph_.slot_of(a, v);
      long long stride = graph_.factor_stride(a, slot);
      const auto& b = beliefs.factor[a];
      marg.assign(card, 0.0);
      for (long long flat = 0; flat < graph_.factor_labels(a); ++flat)
        marg[(flat / stride) % card] += b[flat];
      for (int y = 0; y < card; ++y) avg[y] += marg[y];
      if (ex) {
        const auto& lam = ex->lambda[graph_.edge_id(a, slot)];
        for (int y = 0; y < card; ++y) {
          lambda_dot_marg += lam[y] * marg[y];
          lambda_sum[y] += lam[y];
        }
      }
    }
    for (double& x : avg) x /= factors.size();
    if (ex) {
      correction += lambda_dot_marg;
      for (int y = 0; y < card; ++y) correction -= lambda_sum[y] * avg[y];
    }
    beliefs.node[v] = avg;
  }
  return correction;
}

double Learner::regularizer(const Parameters& params) const {
  double reg = 0.0;
  if (cfg_.p == 2) {
    for (double t : params.theta) reg += t * t;
    return 0.5 * cfg_.regularization * reg;
  }
  for (double t : params.theta) reg += std::abs(t);
  return cfg_.regularization * reg;
}

double Learner::moment_penalty(const std::vector<double>& moments) const {
  // (C^{1-q}/q) * sum |z_r - d_r|^q with q = 2; undefined for p = 1.
  double sum = 0.0;
  for (size_t r = 0; r < moments.size(); ++r) {
    double gap = moments[r] - empirical_[r];
    sum += gap * gap;
  }
  return 0.5 * sum / cfg_.regularization;
}

double Learner::primal_objective(const MessageState& state, const Parameters& params) const {
  std::vector<Potentials> pots = assemble_all(params);
  std::vector<double> parts(state.examples.size(), 0.0);
  parallel_for(static_cast<int>(state.examples.size()), cfg_.threads,
               [&](int e) { parts[e] = example_primal(state.examples[e], pots[e]); });
  double total = 0.0;
  for (double p : parts) total += p;
  for (size_t r = 0; r < empirical_.size(); ++r) total -= empirical_[r] * params.theta[r];
  return total + regularizer(params);
}

double Learner::dual_objective_at(const std::vector<BeliefSet>& beliefs, bool project) const {
  if (cfg_.p != 2)
    throw std::invalid_argument("dual_objective: defined only for p = 2 (finite q)");
  if (beliefs.size() != data_.features.examples.size())
    throw std::invalid_argument("dual_objective: one belief set per example required");

  std::vector<double> moments(empirical_.size(), 0.0);
  double scalar = 0.0;
  std::vector<BeliefSet> projected;
  const std::vector<BeliefSet>* view = &beliefs;
  if (project) {
    projected = beliefs;
    for (auto& b : projected) project_node_beliefs(b, nullptr);
    view = &projected;
  }
  for (size_t e = 0; e < view->size(); ++e) {
    const BeliefSet& b = (*view)[e];
    if (!project) {
      // Marginalization constraints within a fixed tolerance.
      for (int a = 0; a < graph_.factor_count(); ++a) {
        const auto& members = graph_.factor_vertices(a);
        for (size_t k = 0; k < members.size(); ++k) {
          int v = members[k];
          long long stride = graph_.factor_stride(a, static_cast<int>(k));
          std::vector<double> marg(graph_.cardinality(v), 0.0);
          for (long long flat = 0; flat < graph_.factor_labels(a); ++flat)
            marg[(flat / stride) % graph_.cardinality(v)] += b.factor[a][flat];
          for (int y = 0; y < graph_.cardinality(v); ++y)
            if (std::abs(marg[y] - b.node[v][y]) > 1e-8)
              throw std::invalid_argument("dual_objective: infeasible beliefs");
        }
      }
    }
    for (int v = 0; v < graph_.vertex_count(); ++v) {
      scalar += cfg_.epsilon * weights_.node[v] * entropy(b.node[v]);
      const auto& prior = data_.priors[e].node[v];
      for (size_t y = 0; y < prior.size(); ++y) scalar += b.node[v][y] * prior[y];
    }
    for (int a = 0; a < graph_.factor_count(); ++a)
      scalar += cfg_.epsilon * weights_.factor[a] * entropy(b.factor[a]);
    const auto& features = data_.features.examples[e];
    for (const auto& f : features.node)
      for (size_t y = 0; y < f.table.size(); ++y)
        moments[f.param] += b.node[f.vertex][y] * f.table[y];
    for (const auto& f : features.factor)
      for (size_t y = 0; y < f.table.size(); ++y)
        moments[f.param] += b.factor[f.factor][y] * f.table[y];
  }
  return scalar - moment_penalty(moments);
}

double Learner::dual_objective(const MessageState& state, const Parameters& params) const {
  if (cfg_.p != 2)
    throw std::invalid_argument("dual_objective: defined only for p = 2 (finite q)");
  return evaluate(state, params, assemble_all(params)).dual;
}

Learner::Evaluation Learner::evaluate(const MessageState& state, const Parameters& params,
                                      const std::vector<Potentials>& pots) const {
  const int examples = static_cast<int>(state.examples.size());
  const size_t d = empirical_.size();
  std::vector<double> primal_parts(examples, 0.0);
  std::vector<double> scalar_parts(examples, 0.0);
  std::vector<std::vector<double>> z_raw(examples), z_proj(examples);

  parallel_for(examples, cfg_.threads, [&](int e) {
    BeliefSet beliefs;
    example_beliefs(state.examples[e], pots[e], beliefs);
    primal_parts[e] = example_primal(state.examples[e], pots[e]);

    BeliefSet projected = beliefs;
    double scalar = project_node_beliefs(projected, &state.examples[e]);
    for (int v = 0; v < graph_.vertex_count(); ++v) {
      scalar += cfg_.epsilon * weights_.node[v] * entropy(projected.node[v]);
      const auto& prior = data_.priors[e].node[v];
      for (size_t y = 0; y < prior.size(); ++y) scalar += projected.node[v][y] * prior[y];
    }
    for (int a = 0; a < graph_.factor_count(); ++a)
      scalar += cfg_.epsilon * weights_.factor[a] * entropy(beliefs.factor[a]);
    scalar_parts[e] = scalar;

    z_raw[e].assign(d, 0.0);
    z_proj[e].assign(d, 0.0);
    const auto& features = data_.features.examples[e];
    for (const auto& f : features.node) {
      double raw = 0.0, proj = 0.0;
      for (size_t y = 0; y < f.table.size(); ++y) {
        raw += beliefs.node[f.vertex][y] * f.table[y];
        proj += projected.node[f.vertex][y] * f.table[y];
      }
      z_raw[e][f.param] += raw;
      z_proj[e][f.param] += proj;
    }
    for (const auto& f : features.factor) {
      double m = 0.0;
      for (size_t y = 0; y < f.table.size(); ++y) m += beliefs.factor[f.factor][y] * f.table[y];
      z_raw[e][f.param] += m;
      z_proj[e][f.param] += m;
    }
  });

  Evaluation eval;
  eval.gradient.assign(d, 0.0);
  std::vector<double> moments(d, 0.0);
  double primal = 0.0, scalar = 0.0;
  for (int e = 0; e < examples; ++e) {
    primal += primal_parts[e];
    scalar += scalar_parts[e];
    for (size_t r = 0; r < d; ++r) {
      eval.gradient[r] += z_raw[e][r];
      moments[r] += z_proj[e][r];
    }
  }
  const double C = cfg_.regularization;
  for (size_t r = 0; r < d; ++r) {
    double t = params.theta[r];
    primal -= empirical_[r] * t;
    eval.gradient[r] -= empirical_[r];
    eval.gradient[r] += cfg_.p == 2 ? C * t : (t > 0 ? C : t < 0 ? -C : 0.0);
    eval.grad_norm = std::max(eval.grad_norm, std::abs(eval.gradient[r]));
  }
  eval.primal = primal + regularizer(params);
  eval.dual = cfg_.p == 2 ? scalar - moment_penalty(moments) : kNan;
  return eval;
}

std::vector<double> Learner::theta_gradient(const MessageState& state,
                                            const Parameters& params) const {
  return evaluate(state, params, assemble_all(params)).gradient;
}

LineSearchResult Learner::line_search(const Parameters& params,
                                      const std::vector<double>& gradient,
                                      const MessageState& state,
                                      double objective_before) const {
  double grad_sq = 0.0;
  for (double g : gradient) grad_sq += g * g;
  if (grad_sq == 0.0) return {0.0, params, objective_before, true};

  const int examples = static_cast<int>(state.examples.size());
  std::vector<Potentials> base = assemble_all(params);
  Parameters direction{gradient};
  std::vector<Potentials> dir(examples);
  parallel_for(examples, cfg_.threads, [&](int e) {
    dir[e] = assemble_potentials(graph_, direction, data_.features.examples[e], nullptr);
  });

  // Fold the multipliers into the base tables once; they are fixed here.
  parallel_for(examples, cfg_.threads, [&](int e) {
    const auto& ex = state.examples[e];
    for (int v = 0; v < graph_.vertex_count(); ++v)
      for (int a : graph_.vertex_factors(v)) {
        const auto& lam = ex.lambda[graph_.edge_id(a, graph_.slot_of(a, v))];
        for (size_t y = 0; y < base[e].node[v].size(); ++y) base[e].node[v][y] -= lam[y];
      }
    std::vector<int> lab;
    for (int a = 0; a < graph_.factor_count(); ++a) {
      const auto& members = graph_.factor_vertices(a);
      lab.resize(members.size());
      for (long long flat = 0; flat < graph_.factor_labels(a); ++flat) {
        graph_.factor_label_decode(a, flat, lab);
        for (size_t k = 0; k < members.size(); ++k)
          base[e].factor[a][flat] += ex.lambda[graph_.edge_id(a, static_cast<int>(k))][lab[k]];
      }
    }
  });

  std::vector<double> parts(examples, 0.0);
  auto probe = [&](double eta) {
    parallel_for(examples, cfg_.threads, [&](int e) {
      double total = 0.0;
      std::vector<double> arg;
      for (int v = 0; v < graph_.vertex_count(); ++v) {
        arg.resize(base[e].node[v].size());
        for (size_t y = 0; y < arg.size(); ++y)
          arg[y] = base[e].node[v][y] - eta * dir[e].node[v][y];
        total += scaled_log_sum_exp(arg, cfg_.epsilon * weights_.node[v]);
      }
      for (int a = 0; a < graph_.factor_count(); ++a) {
        arg.resize(base[e].factor[a].size());
        for (size_t y = 0; y < arg.size(); ++y)
          arg[y] = base[e].factor[a][y] - eta * dir[e].factor[a][y];
        total += scaled_log_sum_exp(arg, cfg_.epsilon * weights_.factor[a]);
      }
      parts[e] = total;
    });
    double total = 0.0;
    for (double p : parts) total += p;
    Parameters candidate;
    candidate.theta.resize(params.theta.size());
    for (size_t r = 0; r < params.theta.size(); ++r) {
      candidate.theta[r] = params.theta[r] - eta * gradient[r];
      total -= empirical_[r] * candidate.theta[r];
    }
    return std::make_pair(total + regularizer(candidate), std::move(candidate));
  };

  for (double eta = cfg_.step_init; eta >= cfg_.step_min; eta *= cfg_.step_shrink) {
    auto [value, candidate] = probe(eta);
    if (value <= objective_before - cfg_.armijo * eta * grad_sq)
      return {eta, std::move(candidate), value, false};
  }
  return {0.0, params, objective_before, true};
}

TrainResult Learner::train() const {
  TrainResult result;
  Parameters theta;
  theta.theta.assign(empirical_.size(), 0.0);
  MessageState state = make_state();
  const bool subgradient_mode = cfg_.epsilon == 0.0;
  Parameters best = theta;
  double best_primal = std::numeric_limits<double>::infinity();

  auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  for (int t = 0; t < cfg_.max_outer; ++t) {
    std::vector<Potentials> pots = assemble_all(theta);
    for (int s = 0; s < cfg_.lambda_sweeps; ++s) {
      parallel_for(static_cast<int>(state.examples.size()), cfg_.threads, [&](int e) {
        for (int v = 0; v < graph_.vertex_count(); ++v)
          detail::update_vertex_block(graph_, v, pots[e], weights_, cfg_.epsilon,
                                      state.examples[e].lambda, state.examples[e].mu);
      });
    }
    Evaluation eval = evaluate(state, theta, pots);

    TraceRow row;
    row.iter = t;
    row.dual = eval.dual;
    row.grad_norm = eval.grad_norm;

    if (eval.grad_norm <= cfg_.grad_tolerance) {
      row.primal = eval.primal;
      row.gap = row.primal - row.dual;
      row.seconds = elapsed();
      result.trace.rows.push_back(row);
      result.status = TrainStatus::gradient_reached;
      if (eval.primal < best_primal) {
        best_primal = eval.primal;
        best = theta;
      }
      break;
    }

    if (subgradient_mode) {
      double eta = cfg_.subgradient_step / (1.0 + t);
      for (size_t r = 0; r < theta.theta.size(); ++r) theta.theta[r] -= eta * eval.gradient[r];
      row.eta = eta;
      row.primal = primal_objective(state, theta);
    } else {
      LineSearchResult ls = line_search(theta, eval.gradient, state, eval.primal);
      if (ls.stalled) {
        row.primal = eval.primal;
        row.gap = row.primal - row.dual;
        row.seconds = elapsed();
        result.trace.rows.push_back(row);
        result.status = TrainStatus::stalled;
        if (eval.primal < best_primal) {
          best_primal = eval.primal;
          best = theta;
        }
        break;
      }
      theta = std::move(ls.theta);
      row.eta = ls.eta;
      row.primal = ls.objective;
    }

    row.gap = row.primal - row.dual;
    row.seconds = elapsed();
    result.trace.rows.push_back(row);

    if (row.primal < best_primal) {
      best_primal = row.primal;
      best = theta;
    }
    // The gap certifies optimality only for nonnegative entropy weights;
    // non-convex runs stop on the gradient norm or the budget.
    if (cfg_.p == 2 && convex_ &&
        relative_gap(row.primal, row.dual) <= cfg_.gap_tolerance) {
      result.status = TrainStatus::gap_reached;
      break;
    }
  }

  result.params = subgradient_mode ? std::move(best) : std::move(theta);
  result.iterations = static_cast<int>(result.trace.rows.size());
  if (!result.trace.rows.empty()) {
    const auto& last = result.trace.rows.back();
    result.primal = last.primal;
    result.dual = last.dual;
    result.relative_gap = relative_gap(last.primal, last.dual);
  }
  return result;
}

}  // namespace asp
