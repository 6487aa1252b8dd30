#pragma once

#include <vector>

#include "ddgk/linalg.hpp"

namespace ddgk {

// Leaves are clusters 0..n-1; merge k creates cluster n+k.
struct Merge {
  int a = 0;  // the member cluster holding the smaller leaf index
  int b = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  int leaves = 0;
  std::vector<Merge> merges;  // leaves-1 entries, heights nondecreasing

  // Flat clustering after undoing the top k-1 merges. Cluster ids are dense
  // and ordered by each cluster's smallest leaf.
  std::vector<int> cut(int k) const;
};

// Average-linkage agglomerative clustering. Among equally close pairs the one
// whose smallest leaves are lexicographically smallest merges first. Throws
// DimensionError for a non-square input and ArgumentError for an asymmetric
// one, a nonzero diagonal or non-finite entries.
Dendrogram hier_cluster(const Matrix& distances);

}  // namespace ddgk
