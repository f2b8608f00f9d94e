#pragma once

#include <span>
#include <vector>

namespace asp {

// Bipartite variable/factor graph. Vertices carry label cardinalities and
// factors are ordered subsets of distinct vertices. Immutable once built,
// so concurrent reads need no synchronization.
//
// Factor label tables are flattened with the first listed vertex most
// significant and the last one varying fastest.
class FactorGraph {
 public:
  FactorGraph(std::vector<int> cardinalities,
              std::vector<std::vector<int>> factors, int max_arity = 2);

  int vertex_count() const { return static_cast<int>(cardinality_.size()); }
  int factor_count() const { return static_cast<int>(factors_.size()); }
  int cardinality(int v) const { return cardinality_[v]; }

  // N(alpha): ordered vertices of a factor.
  const std::vector<int>& factor_vertices(int a) const { return factors_[a]; }
  // N(v): factors containing vertex v, in construction order.
  const std::vector<int>& vertex_factors(int v) const { return vertex_factors_[v]; }
  int degree(int v) const { return static_cast<int>(vertex_factors_[v].size()); }
  int factor_arity(int a) const { return static_cast<int>(factors_[a].size()); }

  // |Y_alpha| = product of member cardinalities.
  long long factor_labels(int a) const { return table_size_[a]; }

  // Dense ids for (factor, slot) edges of the bipartite graph.
  int edge_count() const { return total_edges_; }
  int edge_id(int a, int slot) const { return edge_offset_[a] + slot; }
  int slot_of(int a, int v) const;

  long long factor_stride(int a, int slot) const { return stride_[edge_offset_[a] + slot]; }
  long long factor_flat_index(int a, std::span<const int> full_labeling) const;
  void factor_label_decode(int a, long long flat, std::span<int> out) const;

  // True iff the bipartite graph contains no cycle.
  bool is_acyclic() const;

  // Grid metadata, set by build_grid (0 otherwise).
  int grid_height() const { return grid_height_; }
  int grid_width() const { return grid_width_; }

 private:
  friend FactorGraph build_grid(int height, int width, int labels);

  std::vector<int> cardinality_;
  std::vector<std::vector<int>> factors_;
  std::vector<std::vector<int>> vertex_factors_;
  std::vector<long long> table_size_;  // per factor
  std::vector<int> edge_offset_;       // per factor
  std::vector<long long> stride_;      // per edge
  int total_edges_ = 0;
  int grid_height_ = 0;
  int grid_width_ = 0;
};

// 2D grid with one vertex per pixel (row-major), a pairwise factor per
// 4-neighborhood edge, and a uniform label count. For each vertex in
// row-major order the factor to its right neighbor precedes the one below.
FactorGraph build_grid(int height, int width, int labels);

}  // namespace asp
