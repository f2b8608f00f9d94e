#include "asp/factor_graph.hpp"

#include <stdexcept>
#include <string>

namespace asp {

FactorGraph::FactorGraph(std::vector<int> cardinalities,
                         std::vector<std::vector<int>> factors, int max_arity)
    : cardinality_(std::move(cardinalities)), factors_(std::move(factors)) {
  const int n = vertex_count();
  for (int v = 0; v < n; ++v)
    if (cardinality_[v] < 2)
      throw std::invalid_argument("FactorGraph: cardinality must be >= 2");

  vertex_factors_.resize(n);
  table_size_.resize(factors_.size());
  edge_offset_.resize(factors_.size());
  for (int a = 0; a < factor_count(); ++a) {
    const auto& members = factors_[a];
    if (members.empty() || static_cast<int>(members.size()) > max_arity)
      throw std::invalid_argument("FactorGraph: factor arity out of bounds");
    long long size = 1;
    for (size_t i = 0; i < members.size(); ++i) {
      int v = members[i];
      if (v < 0 || v >= n)
        throw std::invalid_argument("FactorGraph: vertex index out of range");
      for (size_t j = 0; j < i; ++j)
        if (members[j] == v)
          throw std::invalid_argument("FactorGraph: duplicate vertex in factor");
      size *= cardinality_[v];
    }
    table_size_[a] = size;
    edge_offset_[a] = total_edges_;
    total_edges_ += static_cast<int>(members.size());
    for (int v : members) vertex_factors_[v].push_back(a);
  }

  stride_.resize(total_edges_);
  for (int a = 0; a < factor_count(); ++a) {
    long long s = 1;
    const auto& members = factors_[a];
    for (int k = static_cast<int>(members.size()) - 1; k >= 0; --k) {
      stride_[edge_offset_[a] + k] = s;
      s *= cardinality_[members[k]];
    }
  }
}

int FactorGraph::slot_of(int a, int v) const {
  const auto& members = factors_[a];
  for (size_t k = 0; k < members.size(); ++k)
    if (members[k] == v) return static_cast<int>(k);
  throw std::invalid_argument("FactorGraph: vertex not in factor");
}

long long FactorGraph::factor_flat_index(int a, std::span<const int> full_labeling) const {
  long long flat = 0;
  const auto& members = factors_[a];
  for (size_t k = 0; k < members.size(); ++k)
    flat += full_labeling[members[k]] * stride_[edge_offset_[a] + k];
  return flat;
}

void FactorGraph::factor_label_decode(int a, long long flat, std::span<int> out) const {
  const auto& members = factors_[a];
  for (size_t k = 0; k < members.size(); ++k) {
    long long s = stride_[edge_offset_[a] + k];
    out[k] = static_cast<int>((flat / s) % cardinality_[members[k]]);
  }
}

bool FactorGraph::is_acyclic() const {
  // Iterative DFS over the bipartite graph; a visited non-parent neighbor
  // closes a cycle. Vertices are 0..n-1, factors are n..n+m-1.
  const int n = vertex_count();
  const int total = n + factor_count();
  std::vector<signed char> seen(total, 0);
  std::vector<std::pair<int, int>> stack;  // (node, parent)
  for (int root = 0; root < total; ++root) {
    if (seen[root]) continue;
    stack.emplace_back(root, -1);
    seen[root] = 1;
    while (!stack.empty()) {
      auto [node, parent] = stack.back();
      stack.pop_back();
      if (node < n) {
        for (int a : vertex_factors_[node]) {
          int fnode = n + a;
          if (fnode == parent) continue;
          if (seen[fnode]) return false;
          seen[fnode] = 1;
          stack.emplace_back(fnode, node);
        }
      } else {
        for (int v : factors_[node - n]) {
          if (v == parent) continue;
          if (seen[v]) return false;
          seen[v] = 1;
          stack.emplace_back(v, node);
        }
      }
    }
  }
  return true;
}

FactorGraph build_grid(int height, int width, int labels) {
  if (height < 1 || width < 1)
    throw std::invalid_argument("build_grid: dimensions must be positive");
  if (labels < 2) throw std::invalid_argument("build_grid: labels must be >= 2");

  std::vector<int> cards(static_cast<size_t>(height) * width, labels);
  std::vector<std::vector<int>> factors;
  factors.reserve(2LL * height * width - height - width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      int v = r * width + c;
      if (c + 1 < width) factors.push_back({v, v + 1});
      if (r + 1 < height) factors.push_back({v, v + width});
    }
  }
  FactorGraph g(std::move(cards), std::move(factors));
  g.grid_height_ = height;
  g.grid_width_ = width;
  return g;
}

}  // namespace asp
