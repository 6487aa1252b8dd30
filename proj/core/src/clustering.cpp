#include "ddgk/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ddgk/error.hpp"

namespace ddgk {

namespace {

void check_distances(const Matrix& d) {
  if (d.rows() != d.cols())
    throw DimensionError("distance matrix must be square, got " + std::to_string(d.rows()) + "x" +
                         std::to_string(d.cols()));
  if (!d.allFinite()) throw ArgumentError("distance matrix has non-finite entries");
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (std::abs(d(i, i)) > 1e-9 * scale)
      throw ArgumentError("distance matrix diagonal entry " + std::to_string(i) + " is nonzero");
    for (Eigen::Index j = i + 1; j < d.cols(); ++j)
      if (std::abs(d(i, j) - d(j, i)) > 1e-9 * scale)
        throw ArgumentError("distance matrix is not symmetric at (" + std::to_string(i) + ", " +
                            std::to_string(j) + ")");
  }
}

}  // namespace

Dendrogram hier_cluster(const Matrix& distances) {
  check_distances(distances);
  const int n = static_cast<int>(distances.rows());
  Dendrogram dg;
  dg.leaves = n;
  if (n < 2) return dg;

  // Active clusters by slot; slot i initially holds leaf i.
  Matrix d = distances;
  std::vector<int> id(static_cast<std::size_t>(n));
  std::vector<int> min_leaf(static_cast<std::size_t>(n));
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<bool> alive(static_cast<std::size_t>(n), true);
  std::iota(id.begin(), id.end(), 0);
  std::iota(min_leaf.begin(), min_leaf.end(), 0);

  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!alive[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!alive[static_cast<std::size_t>(j)]) continue;
        const double v = d(i, j);
        if (bi < 0) {
          best = v;
          bi = i;
          bj = j;
          continue;
        }
        const double tol = 1e-12 * std::max(1.0, std::abs(best));
        bool take = v < best - tol;
        if (!take && std::abs(v - best) <= tol) {
          auto key = [&](int x, int y) {
            const int lx = min_leaf[static_cast<std::size_t>(x)];
            const int ly = min_leaf[static_cast<std::size_t>(y)];
            return std::pair(std::min(lx, ly), std::max(lx, ly));
          };
          take = key(i, j) < key(bi, bj);
        }
        if (take) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    const auto ui = static_cast<std::size_t>(bi);
    const auto uj = static_cast<std::size_t>(bj);
    Merge m;
    m.a = min_leaf[ui] < min_leaf[uj] ? id[ui] : id[uj];
    m.b = min_leaf[ui] < min_leaf[uj] ? id[uj] : id[ui];
    m.height = best;
    m.size = size[ui] + size[uj];
    // Heights of average linkage never decrease; clamp rounding noise.
    if (!dg.merges.empty()) m.height = std::max(m.height, dg.merges.back().height);
    dg.merges.push_back(m);

    for (int k = 0; k < n; ++k) {
      if (!alive[static_cast<std::size_t>(k)] || k == bi || k == bj) continue;
      const double v = (size[ui] * d(bi, k) + size[uj] * d(bj, k)) / (size[ui] + size[uj]);
      d(bi, k) = v;
      d(k, bi) = v;
    }
    alive[uj] = false;
    size[ui] += size[uj];
    min_leaf[ui] = std::min(min_leaf[ui], min_leaf[uj]);
    id[ui] = n + step;
  }
  return dg;
}

std::vector<int> Dendrogram::cut(int k) const {
  if (k < 1 || k > leaves)
    throw ArgumentError("cannot cut " + std::to_string(leaves) + " leaves into " +
                        std::to_string(k) + " clusters");
  // Union-find over the first leaves-k merges.
  const int total = leaves + static_cast<int>(merges.size());
  std::vector<int> parent(static_cast<std::size_t>(total));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };
  for (int s = 0; s < leaves - k; ++s) {
    const Merge& m = merges[static_cast<std::size_t>(s)];
    parent[static_cast<std::size_t>(find(m.a))] = leaves + s;
    parent[static_cast<std::size_t>(find(m.b))] = leaves + s;
  }
  std::vector<int> out(static_cast<std::size_t>(leaves), -1);
  std::vector<int> label(static_cast<std::size_t>(total), -1);
  int next = 0;
  for (int leaf = 0; leaf < leaves; ++leaf) {
    const int root = find(leaf);
    if (label[static_cast<std::size_t>(root)] < 0) label[static_cast<std::size_t>(root)] = next++;
    out[static_cast<std::size_t>(leaf)] = label[static_cast<std::size_t>(root)];
  }
  return out;
}

}  // namespace ddgk
