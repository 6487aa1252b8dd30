#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ddgk/error.hpp"

namespace {

void add_train_flags(CLI::App* cmd, ddgk::cli::RunConfig& rc) {
  auto& t = rc.train;
  cmd->add_option("--seed", t.rng_seed, "Base random seed")->capture_default_str();
  cmd->add_option("--embed-dim", t.embed_dim, "Node embedding size d")->capture_default_str();
  cmd->add_option("--encoder-layers", t.encoder_layers, "Hidden relu layers l")
      ->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--encoding-epochs", t.encoding_epochs, "Encoder epochs")->capture_default_str();
  cmd->add_option("--scoring-epochs", t.scoring_epochs, "Attention epochs")->capture_default_str();
  cmd->add_option("--node-reg", t.node_reg_coef, "Node attribute loss coefficient")
      ->capture_default_str();
  cmd->add_option("--edge-reg", t.edge_reg_coef, "Edge attribute loss coefficient")
      ->capture_default_str();
}

void add_dataset_flags(CLI::App* cmd, ddgk::cli::RunConfig& rc, bool required) {
  auto* opt = cmd->add_option("--dataset", rc.dataset, "TU directory or JSON dataset file");
  if (required) opt->required();
  cmd->add_option("--format", rc.format, "Dataset format")
      ->check(CLI::IsMember({"auto", "tu", "json"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ddgk::cli;
  RunConfig rc;
  CLI::App app{"Graph embeddings from pairwise divergences between graph encoders"};
  app.require_subcommand(1);
  std::function<int(const RunConfig&)> action;

  auto* stats = app.add_subcommand("stats", "Summarize a dataset");
  add_dataset_flags(stats, rc, true);
  stats->add_option("--out", rc.out, "Also write stats.json here");
  stats->callback([&] { action = cmd_stats; });

  auto* gen = app.add_subcommand("generate", "Write a synthetic graph or family universe as JSON");
  gen->add_option("--kind", rc.kind, "barbell|ring|star|grid|complete|karate|random|families")
      ->capture_default_str();
  gen->add_option("--size", rc.size, "Size parameter of the generator")->capture_default_str();
  gen->add_flag("--labeled", rc.labeled, "Label nodes and edges (barbell)");
  gen->add_option("--steps", rc.steps, "Mutation steps (families)")->capture_default_str();
  gen->add_option("--count", rc.count, "Mutants per family (families)")->capture_default_str();
  gen->add_option("--seed", rc.train.rng_seed, "Random seed")->capture_default_str();
  gen->add_option("--out", rc.out, "Output JSON file")->required();
  gen->callback([&] { action = cmd_generate; });

  auto* enc = app.add_subcommand("encode", "Train one encoder per graph");
  add_dataset_flags(enc, rc, true);
  add_train_flags(enc, rc);
  enc->add_option("--out", rc.out, "Output directory")->required();
  enc->add_option("--workers", rc.workers, "Worker threads (0 = all cores)");
  enc->add_flag("--force", rc.force, "Retrain even when checkpoints exist");
  enc->callback([&] { action = cmd_encode; });

  auto* emb = app.add_subcommand("embed", "Compute the divergence embedding of every graph");
  add_dataset_flags(emb, rc, true);
  add_train_flags(emb, rc);
  emb->add_option("--out", rc.out, "Output directory")->required();
  emb->add_option("--workers", rc.workers, "Worker threads (0 = all cores)");
  emb->add_option("--sources", rc.sources, "all | sample:<fraction>:<seed> | count:<k>:<seed>")
      ->capture_default_str();
  emb->add_flag("--symmetric", rc.symmetric, "Use D(T||S) + D(S||T) (needs --sources all)");
  emb->add_flag("--force", rc.force, "Ignore checkpoints");
  emb->callback([&] { action = cmd_embed; });

  auto* cls = app.add_subcommand("classify", "Cross-validated classification of embeddings");
  cls->add_option("--embeddings", rc.embeddings, "embeddings.csv from embed")->required();
  add_dataset_flags(cls, rc, true);
  cls->add_option("--out", rc.out, "Output directory")->required();
  cls->add_option("--folds", rc.folds, "Number of folds")->capture_default_str();
  cls->add_option("--fold-seed", rc.fold_seed, "Fold seed (default: embedding seed)");
  cls->add_option("--workers", rc.workers, "Worker threads");
  cls->callback([&] { action = cmd_classify; });

  auto* clu = app.add_subcommand("cluster", "Average-linkage clustering of embeddings");
  clu->add_option("--embeddings", rc.embeddings, "embeddings.csv from embed")->required();
  add_dataset_flags(clu, rc, false);
  clu->add_option("--clusters", rc.clusters, "Number of clusters (default: class count)");
  clu->add_option("--out", rc.out, "Output directory")->required();
  clu->callback([&] { action = cmd_cluster; });

  auto* att = app.add_subcommand("attention", "Train one attention pair and dump its matrix");
  add_dataset_flags(att, rc, true);
  add_train_flags(att, rc);
  att->add_option("--source", rc.source_index, "Source graph index")->capture_default_str();
  att->add_option("--target", rc.target_index, "Target graph index")->capture_default_str();
  att->add_option("--out", rc.out, "Output directory")->required();
  att->callback([&] { action = cmd_attention; });

  auto* smp = app.add_subcommand("sample-study", "Accuracy as a function of the source fraction");
  add_dataset_flags(smp, rc, true);
  add_train_flags(smp, rc);
  smp->add_option("--fractions", rc.fractions, "Source fractions in (0, 1]")
      ->delimiter(',')
      ->capture_default_str();
  smp->add_option("--sample-seed", rc.sample_seed, "Source sampling seed")->capture_default_str();
  smp->add_option("--folds", rc.folds, "Number of folds")->capture_default_str();
  smp->add_option("--fold-seed", rc.fold_seed, "Fold seed (default: --seed)");
  smp->add_option("--out", rc.out, "Output directory")->required();
  smp->add_option("--workers", rc.workers, "Worker threads (0 = all cores)");
  smp->add_flag("--force", rc.force, "Ignore checkpoints");
  smp->callback([&] { action = cmd_sample_study; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action(rc);
  } catch (const ddgk::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ddgk::IngestionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ddgk::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ddgk::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
}
