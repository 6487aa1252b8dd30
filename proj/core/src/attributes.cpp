#include "ddgk/attributes.hpp"

#include "ddgk/error.hpp"

namespace ddgk {

namespace {

void require(const Graph& g, LabelKind kind) {
  if (kind == LabelKind::node && !g.has_node_labels())
    throw ArgumentError("graph has no node labels");
  if (kind == LabelKind::edge && !g.has_edge_labels())
    throw ArgumentError("graph has no edge labels");
}

Vector normalized_or_uniform(Vector counts) {
  const double total = counts.sum();
  if (total <= 0.0) return Vector::Constant(counts.size(), 1.0 / static_cast<double>(counts.size()));
  return counts / total;
}

}  // namespace

Vector node_attr_observed(const Graph& g, NodeId u) {
  require(g, LabelKind::node);
  Vector out = Vector::Zero(g.node_label_count());
  out[g.node_label(u)] = 1.0;
  return out;
}

Vector edge_attr_observed(const Graph& g, NodeId u) {
  require(g, LabelKind::edge);
  Vector counts = Vector::Zero(g.edge_label_count());
  for (NodeId w : g.neighbors(u)) counts[g.edge_label(*g.edge_index(u, w))] += 1.0;
  return normalized_or_uniform(std::move(counts));
}

Vector neighborhood_attr_observed(const Graph& g, NodeId u, LabelKind kind) {
  require(g, kind);
  const auto hood = g.neighbors(u);
  if (kind == LabelKind::node) {
    Vector counts = Vector::Zero(g.node_label_count());
    for (NodeId w : hood) counts[g.node_label(w)] += 1.0;
    return normalized_or_uniform(std::move(counts));
  }
  Vector counts = Vector::Zero(g.edge_label_count());
  std::vector<char> in_hood(g.node_count(), 0);
  for (NodeId w : hood) in_hood[w] = 1;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge edge = g.edges()[e];
    if (in_hood[edge.u] || in_hood[edge.v]) counts[g.edge_label(e)] += 1.0;
  }
  return normalized_or_uniform(std::move(counts));
}

Matrix node_attr_matrix(const Graph& g) {
  require(g, LabelKind::node);
  Matrix m(g.node_count(), g.node_label_count());
  for (NodeId u = 0; u < g.node_count(); ++u) m.row(u) = node_attr_observed(g, u).transpose();
  return m;
}

Matrix edge_attr_matrix(const Graph& g) {
  require(g, LabelKind::edge);
  Matrix m(g.node_count(), g.edge_label_count());
  for (NodeId u = 0; u < g.node_count(); ++u) m.row(u) = edge_attr_observed(g, u).transpose();
  return m;
}

Matrix neighborhood_attr_matrix(const Graph& g, LabelKind kind) {
  require(g, kind);
  Matrix m(g.node_count(), kind == LabelKind::node ? g.node_label_count() : g.edge_label_count());
  for (NodeId u = 0; u < g.node_count(); ++u)
    m.row(u) = neighborhood_attr_observed(g, u, kind).transpose();
  return m;
}

}  // namespace ddgk
