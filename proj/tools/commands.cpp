#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "ddgk/attention.hpp"
#include "ddgk/clustering.hpp"
#include "ddgk/divergence.hpp"
#include "ddgk/encoder.hpp"
#include "ddgk/error.hpp"
#include "ddgk/eval.hpp"
#include "ddgk/fileio.hpp"
#include "ddgk/generators.hpp"
#include "ddgk/parallel.hpp"
#include "json.hpp"

namespace ddgk::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string g17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string provenance_line(const std::string& config_hash, std::uint64_t seed) {
  return "# config_hash=" + config_hash + ",seed=" + std::to_string(seed) + "\n";
}

// Creates the output directory and probes that it is writable.
void prepare_out_dir(const fs::path& dir) {
  if (dir.empty()) throw ArgumentError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw ArgumentError("cannot create output directory " + dir.string());
  try {
    write_file_atomic(dir / ".write-probe", "");
    fs::remove(dir / ".write-probe", ec);
  } catch (const Error&) {
    throw ArgumentError("output directory " + dir.string() + " is not writable");
  }
}

ojson base_summary(const std::string& command, const TrainConfig& cfg) {
  ojson j;
  j["command"] = command;
  j["config_hash"] = hash_hex(cfg.hash());
  j["seed"] = cfg.rng_seed;
  j["config"] = ojson::parse(cfg.to_json());
  return j;
}

void write_json(const fs::path& path, const ojson& j) { write_file_atomic(path, j.dump(2) + "\n"); }

double majority_rate(std::span<const int> classes) {
  if (classes.empty()) return 0.0;
  std::map<int, int> counts;
  for (int c : classes) ++counts[c];
  int best = 0;
  for (const auto& [c, n] : counts) best = std::max(best, n);
  return static_cast<double>(best) / static_cast<double>(classes.size());
}

ojson cv_json(const CvResult& r) {
  return {{"mean", r.mean},
          {"std", r.std},
          {"knn_mean", r.knn_mean},
          {"knn_std", r.knn_std},
          {"evaluated_folds", r.evaluated_folds()}};
}

// Maps embedding rows to the dataset's classes by graph id.
std::vector<int> classes_for(const EmbeddingFile& ef, const GraphDataset& ds) {
  std::map<std::string, int> by_id;
  for (std::size_t i = 0; i < ds.size(); ++i) by_id[ds.graph_id(i)] = ds.graph_classes[i];
  std::vector<int> out;
  for (const auto& id : ef.target_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw ArgumentError("embedding row '" + id + "' does not name a graph of dataset '" +
                          ds.name + "'");
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

GraphDataset load_dataset_arg(const RunConfig& rc) {
  if (rc.dataset.empty()) throw ArgumentError("--dataset is required");
  std::error_code ec;
  if (!fs::exists(rc.dataset, ec))
    throw IngestionError("dataset path " + rc.dataset.string() + " does not exist");
  DatasetFormat fmt;
  if (rc.format == "tu") {
    fmt = DatasetFormat::tu;
  } else if (rc.format == "json") {
    fmt = DatasetFormat::json;
  } else {
    fmt = fs::is_directory(rc.dataset) ? DatasetFormat::tu : DatasetFormat::json;
  }
  return load_dataset(rc.dataset, fmt);
}

std::vector<std::size_t> parse_sources(const std::string& spec, std::size_t n) {
  if (spec == "all") {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  const auto parts = split(spec, ':');
  if (parts.size() == 3 && (parts[0] == "sample" || parts[0] == "count")) {
    try {
      const std::uint64_t seed = std::stoull(parts[2]);
      std::size_t count = 0;
      if (parts[0] == "sample") {
        count = sample_count(n, std::stod(parts[1]));
      } else {
        const long long k = std::stoll(parts[1]);
        if (k < 1 || static_cast<std::size_t>(k) > n)
          throw ArgumentError("count:" + parts[1] + " must be between 1 and " + std::to_string(n));
        count = static_cast<std::size_t>(k);
      }
      return sample_indices(n, count, seed);
    } catch (const std::logic_error&) {
      // Falls through to the usage error below.
    }
  }
  throw ArgumentError("bad --sources '" + spec +
                      "': expected all, sample:<fraction>:<seed> or count:<k>:<seed>");
}

int cmd_stats(const RunConfig& rc) {
  const GraphDataset ds = load_dataset_arg(rc);
  const DatasetSummary s = summarize(ds);
  ojson j;
  j["name"] = ds.name;
  j["graphs"] = s.graphs;
  j["classes"] = s.classes;
  j["node_labels"] = s.node_labels;
  j["edge_labels"] = s.edge_labels;
  j["mean_nodes"] = s.mean_nodes;
  j["mean_edges"] = s.mean_edges;
  j["majority_rate"] = s.majority_rate;
  j["dropped_self_loops"] = ds.dropped_self_loops;
  j["merged_duplicate_edges"] = ds.merged_duplicate_edges;
  if (!rc.out.empty()) {
    prepare_out_dir(rc.out);
    write_json(rc.out / "stats.json", j);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_generate(const RunConfig& rc) {
  if (rc.out.empty()) throw ArgumentError("--out is required");
  GraphDataset ds;
  ds.name = rc.kind;
  ds.class_names = {"0"};
  auto single = [&](Graph g) {
    ds.graphs.push_back(std::move(g));
    ds.graph_classes.push_back(0);
  };
  if (rc.kind == "barbell") {
    single(rc.labeled ? make_labeled_barbell(rc.size) : make_barbell(rc.size));
  } else if (rc.kind == "ring") {
    single(make_ring(rc.size));
  } else if (rc.kind == "star") {
    single(make_star(rc.size));
  } else if (rc.kind == "grid") {
    single(make_grid(rc.size, rc.size));
  } else if (rc.kind == "complete") {
    single(make_complete(rc.size));
  } else if (rc.kind == "karate") {
    single(karate_club());
  } else if (rc.kind == "random") {
    single(random_connected_graph(rc.size, 0.1, rc.train.rng_seed));
  } else if (rc.kind == "families") {
    const auto seeds = standard_family_seeds();
    ds = mutation_universe(seeds, rc.steps, rc.count, rc.train.rng_seed);
  } else {
    throw ArgumentError("unknown --kind '" + rc.kind + "'");
  }
  if (ds.graphs.front().has_node_labels())
    ds.node_vocab = LabelVocabulary(LabelKind::node, [&] {
      std::vector<std::string> names;
      for (int i = 0; i < ds.graphs.front().node_label_count(); ++i) names.push_back(std::to_string(i));
      return names;
    }());
  if (ds.graphs.front().has_edge_labels())
    ds.edge_vocab = LabelVocabulary(LabelKind::edge, [&] {
      std::vector<std::string> names;
      for (int i = 0; i < ds.graphs.front().edge_label_count(); ++i) names.push_back(std::to_string(i));
      return names;
    }());
  if (rc.out.has_parent_path()) fs::create_directories(rc.out.parent_path());
  save_json_dataset(ds, rc.out);
  std::cout << "wrote " << ds.size() << " graph(s) to " << rc.out.string() << "\n";
  return 0;
}

int cmd_encode(const RunConfig& rc) {
  rc.train.validate();
  const GraphDataset ds = load_dataset_arg(rc);
  prepare_out_dir(rc.out);
  const auto graphs = named_graphs(ds);
  const fs::path ckpt = rc.out / "checkpoints";
  fs::create_directories(ckpt / "encoders");
  std::vector<double> self(graphs.size());
  std::vector<char> loaded(graphs.size());
  parallel_for(graphs.size(), rc.workers, [&](std::size_t i) {
    bool was_loaded = false;
    const SourceEncoder enc = obtain_encoder(graphs[i], rc.train, ckpt, rc.force, &was_loaded);
    self[i] = positive_log_loss(enc, *graphs[i].graph);
    loaded[i] = was_loaded;
  });
  std::string csv = provenance_line(hash_hex(rc.train.encoder_hash()), rc.train.rng_seed);
  csv += "graph_id,self_loss\n";
  for (std::size_t i = 0; i < graphs.size(); ++i) csv += graphs[i].id + "," + g17(self[i]) + "\n";
  write_file_atomic(rc.out / "encoders.csv", csv);
  const auto n_loaded = static_cast<std::size_t>(std::count(loaded.begin(), loaded.end(), 1));
  ojson j = base_summary("encode", rc.train);
  j["dataset"] = ds.name;
  j["encoders"] = graphs.size();
  j["trained"] = graphs.size() - n_loaded;
  j["loaded"] = n_loaded;
  write_json(rc.out / "encode_summary.json", j);
  std::cout << "encoders: " << graphs.size() - n_loaded << " trained, " << n_loaded
            << " reused\n";
  return 0;
}

int cmd_embed(const RunConfig& rc) {
  rc.train.validate();
  const GraphDataset ds = load_dataset_arg(rc);
  prepare_out_dir(rc.out);
  const auto all = named_graphs(ds);
  const auto src_idx = parse_sources(rc.sources, all.size());
  if (rc.symmetric && src_idx.size() != all.size())
    throw ArgumentError("--symmetric needs --sources all");
  std::vector<NamedGraph> sources;
  for (std::size_t i : src_idx) sources.push_back(all[i]);

  EmbedOptions opts;
  opts.workers = rc.workers;
  opts.checkpoint_dir = rc.out / "checkpoints";
  opts.force = rc.force;
  EmbedStats stats;
  DivergenceTable table = embed_all(sources, all, rc.train, opts, &stats);
  if (rc.symmetric) table = symmetrize(table);

  write_file_atomic(rc.out / "embeddings.csv", embedding_csv(table, rc.train));
  if (table.complete()) {
    const std::string dist = provenance_line(hash_hex(rc.train.hash()), rc.train.rng_seed) +
                             matrix_csv(distance_matrix(table.values), table.target_ids);
    write_file_atomic(rc.out / "distances.csv", dist);
  }

  ojson j = base_summary("embed", rc.train);
  j["dataset"] = ds.name;
  j["sources_spec"] = rc.sources;
  j["symmetric"] = rc.symmetric;
  j["targets"] = table.target_count();
  j["sources"] = table.source_count();
  j["timing_seconds"] = {{"encode", stats.encode_seconds}, {"score", stats.score_seconds}};
  j["encoders"] = {{"trained", stats.encoders_trained}, {"reused", stats.encoders_loaded}};
  j["cells"] = {{"scored", stats.cells_scored},
                {"reused", stats.cells_loaded},
                {"retried", stats.cells_retried},
                {"failed", stats.cells_failed}};
  ojson self = ojson::object();
  for (std::size_t i = 0; i < table.source_count(); ++i)
    self[table.source_ids[i]] = table.self_losses[static_cast<Eigen::Index>(i)];
  j["self_losses"] = self;
  ojson errors = ojson::array();
  for (const auto& e : table.errors)
    errors.push_back({{"target", table.target_ids[e.target]},
                      {"source", table.source_ids[e.source]},
                      {"message", e.message}});
  j["errors"] = errors;
  write_json(rc.out / "embed_summary.json", j);

  std::cout << "embedded " << table.target_count() << " graphs against " << table.source_count()
            << " sources (" << stats.cells_scored << " cells scored, " << stats.cells_loaded
            << " reused)\n";
  if (!table.complete()) {
    std::cerr << "error: " << table.errors.size() << " cell(s) failed; first: "
              << table.errors.front().message << "\n";
    return 1;
  }
  return 0;
}

int cmd_classify(const RunConfig& rc) {
  if (rc.embeddings.empty()) throw ArgumentError("--embeddings is required");
  const EmbeddingFile ef = parse_embedding_csv(read_text_file(rc.embeddings));
  const GraphDataset ds = load_dataset_arg(rc);
  prepare_out_dir(rc.out);
  const auto classes = classes_for(ef, ds);
  const std::uint64_t fold_seed = rc.fold_seed.value_or(ef.seed);
  const FoldPlan plan = FoldPlan::make(classes, rc.folds, true, fold_seed);
  const CvResult r = classify_cv(ef.values, classes, plan, {}, rc.workers);

  std::string csv = provenance_line(ef.config_hash, ef.seed);
  csv += "fold,train,test,skipped,linear_accuracy,knn_accuracy\n";
  for (const auto& f : r.folds)
    csv += std::to_string(f.fold) + "," + std::to_string(f.train_size) + "," +
           std::to_string(f.test_size) + "," + (f.skipped ? "1" : "0") + "," +
           g17(f.linear_accuracy) + "," + g17(f.knn_accuracy) + "\n";
  write_file_atomic(rc.out / "classify_folds.csv", csv);

  ojson j;
  j["command"] = "classify";
  j["config_hash"] = ef.config_hash;
  j["seed"] = ef.seed;
  j["fold_seed"] = fold_seed;
  j["folds"] = rc.folds;
  j["dataset"] = ds.name;
  j["majority_rate"] = majority_rate(classes);
  j["result"] = cv_json(r);
  ojson skipped = ojson::array();
  for (const auto& f : r.folds)
    if (f.skipped) skipped.push_back({{"fold", f.fold}, {"reason", f.note}});
  j["skipped_folds"] = skipped;
  write_json(rc.out / "classify_summary.json", j);
  std::cout << "accuracy " << r.mean << " +- " << r.std << " (knn " << r.knn_mean << " +- "
            << r.knn_std << ")\n";
  return 0;
}

int cmd_cluster(const RunConfig& rc) {
  if (rc.embeddings.empty()) throw ArgumentError("--embeddings is required");
  const EmbeddingFile ef = parse_embedding_csv(read_text_file(rc.embeddings));
  if (!ef.values.allFinite()) throw ArgumentError("embeddings contain failed (nan) cells");
  std::optional<GraphDataset> ds;
  if (!rc.dataset.empty()) ds = load_dataset_arg(rc);
  prepare_out_dir(rc.out);
  int k = rc.clusters;
  if (k <= 0 && ds) k = ds->class_count();
  if (k <= 0) throw ArgumentError("--clusters is required without --dataset");

  const Matrix dist = distance_matrix(ef.values);
  const Dendrogram dg = hier_cluster(dist);
  const auto assign = dg.cut(k);

  write_file_atomic(rc.out / "distances.csv",
                    provenance_line(ef.config_hash, ef.seed) + matrix_csv(dist, ef.target_ids));
  ojson dj;
  dj["config_hash"] = ef.config_hash;
  dj["seed"] = ef.seed;
  dj["leaves"] = ef.target_ids;
  ojson merges = ojson::array();
  for (const auto& m : dg.merges)
    merges.push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"size", m.size}});
  dj["merges"] = merges;
  write_json(rc.out / "dendrogram.json", dj);

  std::string csv = provenance_line(ef.config_hash, ef.seed);
  csv += ds ? "graph_id,cluster,family\n" : "graph_id,cluster\n";
  std::vector<int> families;
  if (ds) families = classes_for(ef, *ds);
  for (std::size_t i = 0; i < assign.size(); ++i) {
    csv += ef.target_ids[i] + "," + std::to_string(assign[i]);
    if (ds) csv += "," + ds->class_names[static_cast<std::size_t>(families[i])];
    csv += "\n";
  }
  write_file_atomic(rc.out / "clusters.csv", csv);

  ojson j;
  j["command"] = "cluster";
  j["config_hash"] = ef.config_hash;
  j["seed"] = ef.seed;
  j["clusters"] = k;
  j["linkage"] = "average";
  if (ds) j["purity"] = purity(assign, families);
  write_json(rc.out / "cluster_summary.json", j);
  std::cout << "clustered " << assign.size() << " graphs into " << k << " clusters";
  if (ds) std::cout << ", purity " << purity(assign, families);
  std::cout << "\n";
  return 0;
}

int cmd_attention(const RunConfig& rc) {
  rc.train.validate();
  const GraphDataset ds = load_dataset_arg(rc);
  prepare_out_dir(rc.out);
  const auto all = named_graphs(ds);
  auto pick = [&](int idx, const char* what) -> const NamedGraph& {
    if (idx < 0 || static_cast<std::size_t>(idx) >= all.size())
      throw ArgumentError(std::string("--") + what + " index " + std::to_string(idx) +
                          " outside dataset of " + std::to_string(all.size()));
    return all[static_cast<std::size_t>(idx)];
  };
  const NamedGraph& src = pick(rc.source_index, "source");
  const NamedGraph& tgt = pick(rc.target_index, "target");

  auto enc = std::make_shared<const SourceEncoder>(
      obtain_encoder(src, rc.train, std::nullopt, true));
  TrainConfig pc = rc.train;
  pc.rng_seed = pair_seed(rc.train.rng_seed, tgt.id, src.id);
  AttentionTrace trace;
  const AugmentedEncoder ae = train_attention(enc, *src.graph, *tgt.graph, pc, tgt.id, &trace);

  const Matrix attn = attention_matrix(ae.attention).transpose();  // source x target
  const std::string prov = provenance_line(hash_hex(rc.train.hash()), rc.train.rng_seed);
  std::string csv = prov + "source_node";
  for (Eigen::Index c = 0; c < attn.cols(); ++c) csv += ",t" + std::to_string(c);
  csv += "\n";
  for (Eigen::Index r = 0; r < attn.rows(); ++r) {
    csv += "s" + std::to_string(r);
    for (Eigen::Index c = 0; c < attn.cols(); ++c) csv += "," + g17(attn(r, c));
    csv += "\n";
  }
  write_file_atomic(rc.out / "attention.csv", csv);

  const auto align = argmax_alignment(ae.attention);
  std::string acsv = prov + "target_node,source_node,weight\n";
  int identity = 0;
  for (std::size_t u = 0; u < align.size(); ++u) {
    acsv += std::to_string(u) + "," + std::to_string(align[u]) + "," +
            g17(attn(align[u], static_cast<Eigen::Index>(u))) + "\n";
    identity += align[u] == static_cast<NodeId>(u);
  }
  write_file_atomic(rc.out / "alignment.csv", acsv);

  const double self = positive_log_loss(*enc, *src.graph);
  const double raw = raw_divergence(ae, *tgt.graph);
  const AttentionLoss& last = trace.loss.back();
  ojson j = base_summary("attention", rc.train);
  j["source"] = src.id;
  j["target"] = tgt.id;
  j["pair_seed"] = pc.rng_seed;
  j["self_loss"] = self;
  j["raw_divergence"] = raw;
  j["divergence"] = normalized_divergence(raw, self);
  j["identity_matches"] = identity;
  j["final_loss"] = {{"structural", last.structural}, {"forward_node", last.forward_node},
                     {"reverse_node", last.reverse_node}, {"forward_edge", last.forward_edge},
                     {"reverse_edge", last.reverse_edge}, {"total", last.total}};
  write_json(rc.out / "attention_summary.json", j);
  std::cout << "divergence " << normalized_divergence(raw, self) << ", argmax identity on "
            << identity << "/" << align.size() << " target nodes\n";
  return 0;
}

int cmd_sample_study(const RunConfig& rc) {
  rc.train.validate();
  const GraphDataset ds = load_dataset_arg(rc);
  prepare_out_dir(rc.out);
  const auto all = named_graphs(ds);
  SamplingStudyOptions opts;
  opts.sample_seed = rc.sample_seed;
  opts.fold_count = rc.folds;
  opts.fold_seed = rc.fold_seed.value_or(rc.train.rng_seed);
  opts.embed.workers = rc.workers;
  opts.embed.checkpoint_dir = rc.out / "checkpoints";
  opts.embed.force = rc.force;
  const auto points = sampling_study(all, ds.graph_classes, rc.fractions, rc.train, opts);

  std::string csv = provenance_line(hash_hex(rc.train.hash()), rc.train.rng_seed);
  csv += "fraction,sources,mean,std,knn_mean,knn_std\n";
  ojson arr = ojson::array();
  for (const auto& p : points) {
    csv += g17(p.fraction) + "," + std::to_string(p.sources) + "," + g17(p.result.mean) + "," +
           g17(p.result.std) + "," + g17(p.result.knn_mean) + "," + g17(p.result.knn_std) + "\n";
    ojson pj = cv_json(p.result);
    pj["fraction"] = p.fraction;
    pj["sources"] = p.sources;
    arr.push_back(pj);
  }
  write_file_atomic(rc.out / "sampling.csv", csv);
  ojson j = base_summary("sample-study", rc.train);
  j["dataset"] = ds.name;
  j["sample_seed"] = rc.sample_seed;
  j["fold_seed"] = opts.fold_seed;
  j["points"] = arr;
  write_json(rc.out / "sampling_summary.json", j);
  for (const auto& p : points)
    std::cout << "fraction " << p.fraction << " (" << p.sources << " sources): " << p.result.mean
              << " +- " << p.result.std << "\n";
  return 0;
}

}  // namespace ddgk::cli
