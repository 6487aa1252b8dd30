#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddgk/attention.hpp"
#include "ddgk/config.hpp"
#include "ddgk/dataset.hpp"
#include "ddgk/encoder.hpp"
#include "ddgk/graph.hpp"
#include "ddgk/linalg.hpp"

namespace ddgk {

// A graph together with the id used for seeding, checkpoint names and output rows.
struct NamedGraph {
  std::string id;
  const Graph* graph = nullptr;
};

// Views of every graph in `ds`, identified by ds.graph_id(i). The dataset
// must outlive the result.
std::vector<NamedGraph> named_graphs(const GraphDataset& ds);

struct CellError {
  std::size_t target = 0;
  std::size_t source = 0;
  std::string message;
};

// Psi for every target: values(j, i) = D(T_j || S_i).
struct DivergenceTable {
  std::vector<std::string> source_ids;
  std::vector<std::string> target_ids;
  Matrix values;              // M x N; NaN where a cell failed
  Vector self_losses;         // D'(S_i || S_i) on the bare encoder
  Vector attention_self;      // D(S_i || S_i) through a trained attention pair; NaN if not scored
  std::vector<CellError> errors;

  std::size_t source_count() const noexcept { return source_ids.size(); }
  std::size_t target_count() const noexcept { return target_ids.size(); }
  bool complete() const noexcept { return errors.empty(); }
};

// D'(T || S): negative log-likelihood of the target's edges (both
// orientations) under the augmented encoder.
double raw_divergence(const AugmentedEncoder& ae, const Graph& target);
// D = raw - self_loss. Negative values are kept.
double normalized_divergence(double raw, double self_loss);
double symmetric_divergence(double d_ts, double d_st);
// Scores a source against itself without attention: exactly zero.
double self_divergence(const SourceEncoder& enc, const Graph& g);

// Squared Euclidean distance between two embeddings.
double kernel_value(std::span<const double> a, std::span<const double> b);
// Pairwise kernel_value over the rows of psi.
Matrix distance_matrix(const Matrix& psi);

// D_sym = D + D^T for a table whose sources and targets are the same graphs
// in the same order. Throws ArgumentError otherwise.
DivergenceTable symmetrize(const DivergenceTable& table);

// Deterministic per-graph and per-pair seeds derived from the config seed.
std::uint64_t source_seed(std::uint64_t seed, std::string_view source_id);
std::uint64_t pair_seed(std::uint64_t seed, std::string_view target_id,
                        std::string_view source_id);

struct EmbedOptions {
  int workers = 0;  // 0 = hardware concurrency
  // Encoders are stored under <dir>/encoders and scored cells under
  // <dir>/cells; valid entries are reused unless `force` is set.
  std::optional<std::filesystem::path> checkpoint_dir;
  bool force = false;
};

struct EmbedStats {
  double encode_seconds = 0.0;
  double score_seconds = 0.0;
  std::size_t encoders_trained = 0;
  std::size_t encoders_loaded = 0;
  std::size_t cells_scored = 0;
  std::size_t cells_loaded = 0;
  std::size_t cells_retried = 0;
  std::size_t cells_failed = 0;
};

// Trains one encoder per source, then an attention pair for every
// (target, source) cell. A cell whose id pair matches (target == source) is
// scored through the bare encoder (exactly 0) and its attention-path score is
// kept in attention_self. A failing cell is retried once with a fresh seed and
// then recorded in `errors`; other cells still complete.
DivergenceTable embed_all(std::span<const NamedGraph> sources, std::span<const NamedGraph> targets,
                          const TrainConfig& cfg, const EmbedOptions& opts = {},
                          EmbedStats* stats = nullptr);

// Trains (or loads from `checkpoint_dir`) the encoder for one source.
SourceEncoder obtain_encoder(const NamedGraph& source, const TrainConfig& cfg,
                             const std::optional<std::filesystem::path>& checkpoint_dir,
                             bool force, bool* loaded = nullptr);

// Content fingerprint of a graph (structure and labels).
std::uint64_t graph_fingerprint(const Graph& g);

// Embedding CSV:
//   # config_hash=<hex>,seed=<n>
//   graph_id,<source id>,...
//   <target id>,<value>,...        (values as %.17g, "nan" for failed cells)
std::string embedding_csv(const DivergenceTable& table, const TrainConfig& cfg);
struct EmbeddingFile {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> source_ids;
  std::vector<std::string> target_ids;
  Matrix values;
};
// Throws FormatError on malformed input.
EmbeddingFile parse_embedding_csv(const std::string& text);

// Square matrix CSV with ids in the header row and first column.
std::string matrix_csv(const Matrix& m, std::span<const std::string> ids);

}  // namespace ddgk
