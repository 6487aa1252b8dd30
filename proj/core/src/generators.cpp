#include "ddgk/generators.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

#include "ddgk/error.hpp"
#include "ddgk/rng.hpp"

namespace ddgk {

Graph make_barbell(int ring_size) {
  if (ring_size < 3) throw ArgumentError("make_barbell: ring_size must be >= 3");
  std::vector<std::pair<int, int>> edges;
  for (int ring = 0; ring < 2; ++ring) {
    const int base = ring * ring_size;
    for (int i = 0; i < ring_size; ++i) edges.emplace_back(base + i, base + (i + 1) % ring_size);
  }
  edges.emplace_back(0, ring_size);
  return Graph(2 * ring_size, edges);
}

Graph make_labeled_barbell(int ring_size) {
  Graph g = make_barbell(ring_size);
  std::vector<LabelId> node_labels(g.node_count());
  std::iota(node_labels.begin(), node_labels.end(), 0);
  std::vector<LabelId> edge_labels(g.edge_count());
  std::iota(edge_labels.begin(), edge_labels.end(), 0);
  return g.with_node_labels(std::move(node_labels), g.node_count())
      .with_edge_labels(std::move(edge_labels), static_cast<int>(g.edge_count()));
}

Graph make_ring(int n) {
  if (n < 3) throw ArgumentError("make_ring: n must be >= 3");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, edges);
}

Graph make_star(int leaves) {
  if (leaves < 1) throw ArgumentError("make_star: need at least one leaf");
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return Graph(leaves + 1, edges);
}

Graph make_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw ArgumentError("make_grid: dimensions must be positive");
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(v, v + 1);
      if (r + 1 < rows) edges.emplace_back(v, v + cols);
    }
  }
  return Graph(rows * cols, edges);
}

Graph make_complete(int n) {
  if (n < 1) throw ArgumentError("make_complete: n must be positive");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, edges);
}

Graph karate_club() {
  static constexpr std::array<std::pair<int, int>, 78> kEdges{{
      {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
      {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
      {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
      {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
      {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
      {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
      {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
      {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
      {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
      {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33},
  }};
  return Graph(34, std::span<const std::pair<int, int>>(kEdges));
}

Graph random_connected_graph(int n, double extra_edge_prob, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("random_connected_graph: n must be positive");
  Rng rng(seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) {
    int a = order[i], b = order[rng.below(i)];
    edges.emplace(std::min(a, b), std::max(a, b));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!edges.contains({i, j}) && rng.bernoulli(extra_edge_prob)) edges.emplace(i, j);
  std::vector<std::pair<int, int>> list(edges.begin(), edges.end());
  return Graph(n, list);
}

namespace {

Graph mutate_once(const Graph& seed, const std::vector<double>& seed_degree, int steps, Rng& rng) {
  const int n = seed.node_count();
  const std::size_t max_edges = static_cast<std::size_t>(n) * (n - 1) / 2;
  std::set<std::pair<int, int>> edges;
  for (const Edge& e : seed.edges()) edges.emplace(e.u, e.v);

  std::vector<std::pair<int, int>> candidates;
  std::vector<double> cumulative;
  for (int step = 0; step < steps; ++step) {
    bool add = !rng.bernoulli(0.5);
    if (add && edges.size() == max_edges) add = false;
    if (!add && edges.empty()) add = true;
    if (add && edges.size() == max_edges) continue;  // n < 2: nothing possible

    if (!add) {
      auto it = edges.begin();
      std::advance(it, static_cast<long>(rng.below(edges.size())));
      edges.erase(it);
      continue;
    }
    candidates.clear();
    cumulative.clear();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (edges.contains({i, j})) continue;
        candidates.emplace_back(i, j);
        total += seed_degree[i] * seed_degree[j];
        cumulative.push_back(total);
      }
    }
    std::size_t pick;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      pick = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) -
                                      cumulative.begin());
      pick = std::min(pick, candidates.size() - 1);
    } else {
      pick = rng.below(candidates.size());  // every unlinked pair has a degree-0 endpoint
    }
    edges.insert(candidates[pick]);
  }
  std::vector<std::pair<int, int>> list(edges.begin(), edges.end());
  Graph out(n, list);
  if (seed.has_node_labels()) {
    out = out.with_node_labels({seed.node_labels().begin(), seed.node_labels().end()},
                               seed.node_label_count());
  }
  return out;
}

}  // namespace

std::vector<Graph> mutate_family(const Graph& seed_graph, int steps, int mutation_count,
                                 std::uint64_t rng_seed) {
  if (steps < 0) throw ArgumentError("mutate_family: steps must be >= 0");
  if (mutation_count < 0) throw ArgumentError("mutate_family: mutation_count must be >= 0");
  std::vector<double> degree(seed_graph.node_count());
  for (int v = 0; v < seed_graph.node_count(); ++v) degree[v] = seed_graph.degree(v);
  std::vector<Graph> out;
  out.reserve(mutation_count);
  for (int m = 0; m < mutation_count; ++m) {
    Rng rng(derive_seed(rng_seed, static_cast<std::uint64_t>(m)));
    if (steps == 0) {
      out.push_back(seed_graph);
    } else {
      out.push_back(mutate_once(seed_graph, degree, steps, rng));
    }
  }
  return out;
}

std::vector<FamilySeed> standard_family_seeds() {
  return {{"karate", karate_club()},  {"barbell5", make_barbell(5)}, {"barbell10", make_barbell(10)},
          {"ring20", make_ring(20)},   {"ring30", make_ring(30)},      {"grid6x6", make_grid(6, 6)}};
}

GraphDataset mutation_universe(std::span<const FamilySeed> seeds, int steps, int mutation_count,
                               std::uint64_t rng_seed, std::string name) {
  if (seeds.empty()) throw ArgumentError("mutation_universe: no seed graphs");
  GraphDataset ds;
  ds.name = std::move(name);
  for (std::size_t f = 0; f < seeds.size(); ++f) {
    ds.class_names.push_back(seeds[f].name);
    ds.graphs.push_back(seeds[f].graph.without_labels());
    ds.graph_classes.push_back(static_cast<int>(f));
    for (Graph& g : mutate_family(seeds[f].graph.without_labels(), steps, mutation_count,
                                  derive_seed(rng_seed, f))) {
      ds.graphs.push_back(std::move(g));
      ds.graph_classes.push_back(static_cast<int>(f));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace ddgk

