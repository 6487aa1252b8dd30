#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddgk/graph.hpp"

namespace ddgk {

// Ordered, duplicate-free list of label names; a label id is an index.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  LabelVocabulary(LabelKind kind, std::vector<std::string> names);

  LabelKind kind() const noexcept { return kind_; }
  int size() const noexcept { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(LabelId id) const;
  // -1 when absent.
  LabelId find(const std::string& name) const;

  friend bool operator==(const LabelVocabulary&, const LabelVocabulary&) = default;

 private:
  LabelKind kind_ = LabelKind::node;
  std::vector<std::string> names_;
};

struct GraphDataset {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<int> graph_classes;        // dense 0..class_count-1
  std::vector<std::string> class_names;  // original class tokens, indexed by class id
  std::optional<LabelVocabulary> node_vocab;
  std::optional<LabelVocabulary> edge_vocab;
  // Ingestion diagnostics.
  std::size_t dropped_self_loops = 0;
  // Edge lines folded onto an already-seen pair (mirrored orientations included).
  std::size_t merged_duplicate_edges = 0;

  std::size_t size() const noexcept { return graphs.size(); }
  int class_count() const noexcept { return static_cast<int>(class_names.size()); }
  // Stable identifier "<name>/<index>" used for seeding and file names.
  std::string graph_id(std::size_t index) const;
  // Throws FormatError when the invariants do not hold.
  void validate() const;
};

struct DatasetSummary {
  std::size_t graphs = 0;
  int classes = 0;
  int node_labels = 0;
  int edge_labels = 0;
  double mean_nodes = 0.0;
  double mean_edges = 0.0;
  double majority_rate = 0.0;
};

DatasetSummary summarize(const GraphDataset& ds);

// Reads the TU benchmark text layout: <DS>_A.txt, <DS>_graph_indicator.txt,
// <DS>_graph_labels.txt and optional <DS>_node_labels.txt / <DS>_edge_labels.txt.
// Edges are symmetrized, self-loops dropped, label tokens remapped to dense ids.
GraphDataset load_tu_dataset(const std::filesystem::path& directory);

// Writes `ds` in the TU layout under `directory` using `ds.name` as prefix.
// Edges are written in both orientations.
void save_tu_dataset(const GraphDataset& ds, const std::filesystem::path& directory);

// Native JSON: a single graph object
//   {"nodes": n, "edges": [[i,j],...], "node_labels": [...], "edge_labels": [[i,j,l],...]}
// or a dataset object {"name": s, "graphs": [...], "classes": [...]}.
Graph graph_from_json_text(const std::string& text);
std::string graph_to_json_text(const Graph& g);
GraphDataset load_json_dataset(const std::filesystem::path& file);
void save_json_dataset(const GraphDataset& ds, const std::filesystem::path& file);

enum class DatasetFormat { tu, json };
GraphDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

}  // namespace ddgk
