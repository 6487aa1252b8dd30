#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddgk/linalg.hpp"

namespace ddgk {

using NodeId = std::int32_t;
using LabelId = std::int32_t;

// Undirected edge in canonical form (u < v).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class LabelKind { node, edge };

// Immutable simple undirected graph with optional categorical labels.
//
// Node ids are dense 0..node_count-1. Edges are stored once, canonicalized
// and sorted; edge_labels (when present) are aligned with edges().
class Graph {
 public:
  Graph() = default;

  // Throws ArgumentError on out-of-range ids, self-loops or duplicate pairs.
  Graph(int node_count, std::span<const std::pair<int, int>> edges);
  Graph(int node_count, std::initializer_list<std::pair<int, int>> edges);

  int node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const NodeId> neighbors(NodeId u) const;
  int degree(NodeId u) const { return static_cast<int>(neighbors(u).size()); }
  bool has_edge(NodeId u, NodeId v) const;
  // Index into edges() for the pair, or nullopt.
  std::optional<std::size_t> edge_index(NodeId u, NodeId v) const;

  bool has_node_labels() const noexcept { return node_label_count_ > 0; }
  bool has_edge_labels() const noexcept { return edge_label_count_ > 0; }
  int node_label_count() const noexcept { return node_label_count_; }
  int edge_label_count() const noexcept { return edge_label_count_; }
  LabelId node_label(NodeId u) const;
  LabelId edge_label(std::size_t edge_idx) const;
  std::span<const LabelId> node_labels() const noexcept { return node_labels_; }
  std::span<const LabelId> edge_labels() const noexcept { return edge_labels_; }

  // Labeled copies. `label_count` is the vocabulary size (ids must be below it).
  Graph with_node_labels(std::vector<LabelId> labels, int label_count) const;
  Graph with_edge_labels(std::vector<LabelId> labels, int label_count) const;
  Graph without_labels() const;

  // Dense 0/1 adjacency, |V| x |V|, zero diagonal.
  Matrix adjacency() const;

  bool is_connected() const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  void build_adjacency();
  void check_node(NodeId u) const;

  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;  // CSR offsets into adj_
  std::vector<NodeId> adj_;           // sorted neighbor lists
  std::vector<LabelId> node_labels_;
  std::vector<LabelId> edge_labels_;
  int node_label_count_ = 0;
  int edge_label_count_ = 0;
};

}  // namespace ddgk
