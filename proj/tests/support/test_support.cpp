#include "test_support.hpp"

#include "ddgk/generators.hpp"

namespace ddgk::testing {

GraphDataset toy_dataset(int per_class, std::uint64_t seed) {
  GraphDataset ds;
  ds.name = "toy";
  ds.class_names = {"ring", "tree"};
  for (int i = 0; i < per_class; ++i) {
    ds.graphs.push_back(make_ring(5 + i));
    ds.graph_classes.push_back(0);
  }
  for (int i = 0; i < per_class; ++i) {
    ds.graphs.push_back(random_connected_graph(6 + i, 0.0, derive_seed(seed, i)));
    ds.graph_classes.push_back(1);
  }
  return ds;
}

}  // namespace ddgk::testing
