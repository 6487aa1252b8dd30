#include "ddgk/graph.hpp"

#include <algorithm>
#include <string>

#include "ddgk/error.hpp"

namespace ddgk {

Graph::Graph(int node_count, std::span<const std::pair<int, int>> edges)
    : node_count_(node_count) {
  if (node_count < 0) throw ArgumentError("Graph: negative node count");
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw ArgumentError("Graph: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") references a node outside 0.." +
                          std::to_string(node_count - 1));
    }
    if (a == b) throw ArgumentError("Graph: self-loop on node " + std::to_string(a));
    edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto it = std::adjacent_find(edges_.begin(), edges_.end()); it != edges_.end()) {
    throw ArgumentError("Graph: duplicate edge (" + std::to_string(it->u) + ", " +
                        std::to_string(it->v) + ")");
  }
  build_adjacency();
}

Graph::Graph(int node_count, std::initializer_list<std::pair<int, int>> edges)
    : Graph(node_count, std::span<const std::pair<int, int>>(edges.begin(), edges.size())) {}

void Graph::build_adjacency() {
  std::vector<std::size_t> deg(node_count_, 0);
  for (const Edge& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  offsets_.assign(node_count_ + 1, 0);
  for (int i = 0; i < node_count_; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
  adj_.assign(offsets_.back(), 0);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adj_[fill[e.u]++] = e.v;
    adj_[fill[e.v]++] = e.u;
  }
  for (int i = 0; i < node_count_; ++i) {
    std::sort(adj_.begin() + offsets_[i], adj_.begin() + offsets_[i + 1]);
  }
}

void Graph::check_node(NodeId u) const {
  if (u < 0 || u >= node_count_) {
    throw ArgumentError("node id " + std::to_string(u) + " out of range for graph with " +
                        std::to_string(node_count_) + " nodes");
  }
}

std::span<const NodeId> Graph::neighbors(NodeId u) const {
  check_node(u);
  return std::span<const NodeId>(adj_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto n = neighbors(u);
  return std::binary_search(n.begin(), n.end(), v);
}

std::optional<std::size_t> Graph::edge_index(NodeId u, NodeId v) const {
  check_node(u);
  check_node(v);
  const Edge key{std::min(u, v), std::max(u, v)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

LabelId Graph::node_label(NodeId u) const {
  if (!has_node_labels()) throw ArgumentError("graph has no node labels");
  check_node(u);
  return node_labels_[u];
}

LabelId Graph::edge_label(std::size_t edge_idx) const {
  if (!has_edge_labels()) throw ArgumentError("graph has no edge labels");
  if (edge_idx >= edges_.size()) throw ArgumentError("edge index out of range");
  return edge_labels_[edge_idx];
}

Graph Graph::with_node_labels(std::vector<LabelId> labels, int label_count) const {
  if (labels.size() != static_cast<std::size_t>(node_count_)) {
    throw ArgumentError("node label count " + std::to_string(labels.size()) +
                        " does not match node count " + std::to_string(node_count_));
  }
  if (label_count <= 0) throw ArgumentError("node label vocabulary must be non-empty");
  for (LabelId l : labels) {
    if (l < 0 || l >= label_count) {
      throw ArgumentError("node label " + std::to_string(l) + " outside vocabulary of size " +
                          std::to_string(label_count));
    }
  }
  Graph g = *this;
  g.node_labels_ = std::move(labels);
  g.node_label_count_ = label_count;
  return g;
}

Graph Graph::with_edge_labels(std::vector<LabelId> labels, int label_count) const {
  if (labels.size() != edges_.size()) {
    throw ArgumentError("edge label count " + std::to_string(labels.size()) +
                        " does not match edge count " + std::to_string(edges_.size()));
  }
  if (label_count <= 0) throw ArgumentError("edge label vocabulary must be non-empty");
  for (LabelId l : labels) {
    if (l < 0 || l >= label_count) {
      throw ArgumentError("edge label " + std::to_string(l) + " outside vocabulary of size " +
                          std::to_string(label_count));
    }
  }
  Graph g = *this;
  g.edge_labels_ = std::move(labels);
  g.edge_label_count_ = label_count;
  return g;
}

Graph Graph::without_labels() const {
  Graph g = *this;
  g.node_labels_.clear();
  g.edge_labels_.clear();
  g.node_label_count_ = 0;
  g.edge_label_count_ = 0;
  return g;
}

Matrix Graph::adjacency() const {
  Matrix a = Matrix::Zero(node_count_, node_count_);
  for (const Edge& e : edges_) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

bool Graph::is_connected() const {
  if (node_count_ <= 1) return true;
  std::vector<char> seen(node_count_, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId w : neighbors(u)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited == node_count_;
}

bool operator==(const Graph& a, const Graph& b) {
  return a.node_count_ == b.node_count_ && a.edges_ == b.edges_ &&
         a.node_labels_ == b.node_labels_ && a.edge_labels_ == b.edge_labels_ &&
         a.node_label_count_ == b.node_label_count_ &&
         a.edge_label_count_ == b.edge_label_count_;
}

}  // namespace ddgk
