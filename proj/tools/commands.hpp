#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddgk/config.hpp"
#include "ddgk/dataset.hpp"

namespace ddgk::cli {

// Settings shared by every subcommand; each command reads what it needs.
struct RunConfig {
  std::filesystem::path dataset;
  std::string format = "auto";  // auto | tu | json
  std::filesystem::path out;
  int workers = 0;
  bool force = false;
  TrainConfig train;

  // embed
  std::string sources = "all";
  bool symmetric = false;

  // classify / cluster
  std::filesystem::path embeddings;
  int folds = 10;
  std::optional<std::uint64_t> fold_seed;
  int clusters = 0;

  // attention
  int source_index = 0;
  int target_index = 0;

  // generate
  std::string kind = "barbell";
  int size = 5;
  int steps = 50;
  int count = 4;
  bool labeled = false;

  // sample-study
  std::vector<double> fractions = {0.05, 0.1, 0.2, 0.5, 1.0};
  std::uint64_t sample_seed = 1;
};

int cmd_stats(const RunConfig& rc);
int cmd_generate(const RunConfig& rc);
int cmd_encode(const RunConfig& rc);
int cmd_embed(const RunConfig& rc);
int cmd_classify(const RunConfig& rc);
int cmd_cluster(const RunConfig& rc);
int cmd_attention(const RunConfig& rc);
int cmd_sample_study(const RunConfig& rc);

// Source selection spec: "all", "sample:<fraction>:<seed>" or "count:<k>:<seed>".
// Returns sorted indices into a dataset of `n` graphs.
std::vector<std::size_t> parse_sources(const std::string& spec, std::size_t n);

GraphDataset load_dataset_arg(const RunConfig& rc);

}  // namespace ddgk::cli
