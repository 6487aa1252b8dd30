#pragma once

#include "ddgk/graph.hpp"
#include "ddgk/linalg.hpp"

namespace ddgk {

// Observed label distributions used by the attention regularizers. Every
// returned distribution is non-negative and sums to one; a node with nothing
// to count gets the uniform distribution.

// One-hot on u's node label. Throws ArgumentError for unlabeled graphs.
Vector node_attr_observed(const Graph& g, NodeId u);

// Edge-label frequencies over the edges incident to u.
Vector edge_attr_observed(const Graph& g, NodeId u);

// kind == node: node-label frequencies over N(u).
// kind == edge: edge-label frequencies over edges with an endpoint in N(u).
Vector neighborhood_attr_observed(const Graph& g, NodeId u, LabelKind kind);

// Row-stacked versions (|V| x vocabulary size).
Matrix node_attr_matrix(const Graph& g);
Matrix edge_attr_matrix(const Graph& g);
Matrix neighborhood_attr_matrix(const Graph& g, LabelKind kind);

}  // namespace ddgk
