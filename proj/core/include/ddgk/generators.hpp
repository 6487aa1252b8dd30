#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddgk/dataset.hpp"
#include "ddgk/graph.hpp"

namespace ddgk {

// Two cycles of `ring_size` nodes joined by the bridge (0, ring_size).
Graph make_barbell(int ring_size);

// Barbell with positional node labels 0..2*ring_size-1 and one edge label per
// edge, assigned in canonical (sorted endpoint pair) order.
Graph make_labeled_barbell(int ring_size);

Graph make_ring(int n);
Graph make_star(int leaves);
Graph make_grid(int rows, int cols);
Graph make_complete(int n);

// Zachary's karate club, 34 nodes / 78 edges.
Graph karate_club();

// Random connected graph: a random spanning tree plus each remaining pair
// with probability `extra_edge_prob`.
Graph random_connected_graph(int n, double extra_edge_prob, std::uint64_t seed);

// `mutation_count` independent mutants of `seed_graph`. Each runs `steps`
// iterations: with probability 0.5 delete a uniformly chosen edge, otherwise
// add an unlinked pair drawn with probability proportional to the product of
// the endpoints' degrees in `seed_graph`. Additions on a complete graph fall
// back to deletion and vice versa on an empty one. Node labels carry over;
// edge labels survive only when steps == 0.
std::vector<Graph> mutate_family(const Graph& seed_graph, int steps, int mutation_count,
                                 std::uint64_t rng_seed);

struct FamilySeed {
  std::string name;
  Graph graph;
};

// karate, barbell(5), barbell(10), ring(20), ring(30), grid(6x6).
std::vector<FamilySeed> standard_family_seeds();

// Dataset of families: each seed followed by `mutation_count` mutants
// (mutate_family with rng_seed derived from `rng_seed` and the family index).
// The class of a graph is its family.
GraphDataset mutation_universe(std::span<const FamilySeed> seeds, int steps, int mutation_count,
                               std::uint64_t rng_seed, std::string name = "families");

}  // namespace ddgk
