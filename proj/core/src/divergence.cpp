#include "ddgk/divergence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>

#include "ddgk/dataset.hpp"
#include "ddgk/error.hpp"
#include "ddgk/fileio.hpp"
#include "ddgk/parallel.hpp"
#include "ddgk/rng.hpp"
#include "json.hpp"

namespace ddgk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string file_stem_for(std::string_view id) {
  return sanitize_file_stem(id) + "-" + hash_hex(fnv1a(id)).substr(8);
}

std::string format_g17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct CellRecord {
  double value = kNaN;
  double attention_self = kNaN;
};

fs::path cell_path(const fs::path& dir, const std::string& target, const std::string& source) {
  return dir / "cells" / (file_stem_for(target) + "__" + file_stem_for(source) + ".json");
}

std::string cell_key(const TrainConfig& cfg, const NamedGraph& t, const NamedGraph& s) {
  std::uint64_t h = cfg.hash();
  h = derive_seed(h, graph_fingerprint(*t.graph));
  h = derive_seed(h, graph_fingerprint(*s.graph));
  return hash_hex(h);
}

std::optional<CellRecord> load_cell(const fs::path& path, const std::string& key,
                                    const NamedGraph& t, const NamedGraph& s) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  try {
    const json j = json::parse(read_text_file(path));
    if (j.at("key").get<std::string>() != key || j.at("target").get<std::string>() != t.id ||
        j.at("source").get<std::string>() != s.id)
      return std::nullopt;
    CellRecord r;
    r.value = parse_hex_double(j.at("value").get<std::string>());
    if (j.contains("attention_self"))
      r.attention_self = parse_hex_double(j.at("attention_self").get<std::string>());
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void save_cell(const fs::path& path, const std::string& key, const NamedGraph& t,
               const NamedGraph& s, const CellRecord& r) {
  json j = {{"key", key},
            {"target", t.id},
            {"source", s.id},
            {"value", hex_double(r.value)}};
  if (!std::isnan(r.attention_self)) j["attention_self"] = hex_double(r.attention_self);
  write_file_atomic(path, j.dump());
}

double score_pair(const std::shared_ptr<const SourceEncoder>& enc, const NamedGraph& s,
                  const NamedGraph& t, const TrainConfig& cfg, std::uint64_t seed,
                  double self_loss) {
  TrainConfig pc = cfg;
  pc.rng_seed = seed;
  const AugmentedEncoder ae = train_attention(enc, *s.graph, *t.graph, pc, t.id);
  return normalized_divergence(raw_divergence(ae, *t.graph), self_loss);
}

void check_named(std::span<const NamedGraph> set, const char* what) {
  if (set.empty()) throw ArgumentError(std::string("embed_all: no ") + what);
  std::vector<std::string_view> ids;
  for (const auto& g : set) {
    if (!g.graph) throw ArgumentError(std::string("embed_all: null graph among ") + what);
    ids.push_back(g.id);
  }
  std::sort(ids.begin(), ids.end());
  if (auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end())
    throw ArgumentError(std::string("embed_all: duplicate id '") + std::string(*dup) + "' among " +
                        what);
}

}  // namespace

std::vector<NamedGraph> named_graphs(const GraphDataset& ds) {
  std::vector<NamedGraph> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out.push_back({ds.graph_id(i), &ds.graphs[i]});
  return out;
}

double raw_divergence(const AugmentedEncoder& ae, const Graph& target) {
  if (ae.attention.target_nodes() != target.node_count())
    throw DimensionError("raw_divergence: attention built for " +
                         std::to_string(ae.attention.target_nodes()) + " target nodes, graph has " +
                         std::to_string(target.node_count()));
  return positive_log_loss(ae.target_logits(), target);
}

double normalized_divergence(double raw, double self_loss) { return raw - self_loss; }

double symmetric_divergence(double d_ts, double d_st) { return d_ts + d_st; }

double self_divergence(const SourceEncoder& enc, const Graph& g) {
  const double self = positive_log_loss(enc, g);
  return normalized_divergence(self, self);
}

double kernel_value(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("kernel_value: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Matrix distance_matrix(const Matrix& psi) {
  const Eigen::Index n = psi.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (psi.row(i) - psi.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

DivergenceTable symmetrize(const DivergenceTable& table) {
  if (table.source_ids != table.target_ids)
    throw ArgumentError("symmetric divergences need identical source and target lists");
  DivergenceTable out = table;
  out.values = table.values + table.values.transpose();
  return out;
}

std::uint64_t source_seed(std::uint64_t seed, std::string_view source_id) {
  return derive_seed(seed, fnv1a(source_id));
}

std::uint64_t pair_seed(std::uint64_t seed, std::string_view target_id,
                        std::string_view source_id) {
  return derive_seed(derive_seed(seed, fnv1a(target_id)), fnv1a(source_id));
}

std::uint64_t graph_fingerprint(const Graph& g) { return fnv1a(graph_to_json_text(g)); }

SourceEncoder obtain_encoder(const NamedGraph& source, const TrainConfig& cfg,
                             const std::optional<fs::path>& checkpoint_dir, bool force,
                             bool* loaded) {
  if (loaded) *loaded = false;
  const std::string key =
      hash_hex(derive_seed(cfg.encoder_hash(), graph_fingerprint(*source.graph)));
  fs::path path;
  if (checkpoint_dir) {
    path = *checkpoint_dir / "encoders" / (file_stem_for(source.id) + ".json");
    std::error_code ec;
    if (!force && fs::exists(path, ec)) {
      try {
        Checkpoint c = load_checkpoint(path);
        auto it = c.meta.find("key");
        if (it != c.meta.end() && it->second == key) {
          SourceEncoder enc = SourceEncoder::from_checkpoint(c);
          if (enc.trained() && enc.graph_id() == source.id &&
              enc.node_count() == source.graph->node_count()) {
            if (loaded) *loaded = true;
            return enc;
          }
        }
      } catch (const Error&) {
        // Corrupt or stale entries are retrained below.
      }
    }
  }
  TrainConfig ec = cfg;
  ec.rng_seed = source_seed(cfg.rng_seed, source.id);
  SourceEncoder enc = [&] {
    try {
      return train_encoder(*source.graph, ec, source.id);
    } catch (const TrainingFault&) {
      ec.rng_seed = derive_seed(ec.rng_seed, 1);
      return train_encoder(*source.graph, ec, source.id);
    }
  }();
  if (checkpoint_dir) {
    Checkpoint c = enc.to_checkpoint();
    c.meta["key"] = key;
    save_checkpoint(c, path);
  }
  return enc;
}

DivergenceTable embed_all(std::span<const NamedGraph> sources, std::span<const NamedGraph> targets,
                          const TrainConfig& cfg, const EmbedOptions& opts, EmbedStats* stats) {
  cfg.validate();
  check_named(sources, "sources");
  check_named(targets, "targets");
  if (opts.checkpoint_dir) {
    fs::create_directories(*opts.checkpoint_dir / "encoders");
    fs::create_directories(*opts.checkpoint_dir / "cells");
  }
  const std::size_t n = sources.size();
  const std::size_t m = targets.size();
  EmbedStats st;

  DivergenceTable table;
  for (const auto& s : sources) table.source_ids.push_back(s.id);
  for (const auto& t : targets) table.target_ids.push_back(t.id);
  table.values = Matrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), kNaN);
  table.self_losses = Vector::Constant(static_cast<Eigen::Index>(n), kNaN);
  table.attention_self = Vector::Constant(static_cast<Eigen::Index>(n), kNaN);

  std::mutex mu;

  // Stage 1: source encoders.
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::shared_ptr<const SourceEncoder>> encoders(n);
  std::vector<std::string> encoder_errors(n);
  parallel_for(n, opts.workers, [&](std::size_t i) {
    try {
      bool loaded = false;
      auto enc = std::make_shared<const SourceEncoder>(
          obtain_encoder(sources[i], cfg, opts.checkpoint_dir, opts.force, &loaded));
      table.self_losses[static_cast<Eigen::Index>(i)] = positive_log_loss(*enc, *sources[i].graph);
      encoders[i] = std::move(enc);
      std::lock_guard lock(mu);
      (loaded ? st.encoders_loaded : st.encoders_trained)++;
    } catch (const Error& e) {
      encoder_errors[i] = std::string("source encoder: ") + e.what();
    }
  });
  st.encode_seconds = seconds_since(t0);

  // Stage 2: attention pairs, row-major over (target, source).
  t0 = std::chrono::steady_clock::now();
  std::vector<std::string> cell_errors(m * n);
  parallel_for(m * n, opts.workers, [&](std::size_t k) {
    const std::size_t j = k / n;
    const std::size_t i = k % n;
    const NamedGraph& t = targets[j];
    const NamedGraph& s = sources[i];
    if (!encoders[i]) {
      cell_errors[k] = encoder_errors[i];
      return;
    }
    const std::string key = cell_key(cfg, t, s);
    const bool is_self = t.id == s.id;
    std::optional<CellRecord> rec;
    if (opts.checkpoint_dir && !opts.force)
      rec = load_cell(cell_path(*opts.checkpoint_dir, t.id, s.id), key, t, s);
    bool retried = false;
    if (rec) {
      std::lock_guard lock(mu);
      ++st.cells_loaded;
    } else {
      const double self_loss = table.self_losses[static_cast<Eigen::Index>(i)];
      const std::uint64_t seed = pair_seed(cfg.rng_seed, t.id, s.id);
      double d = kNaN;
      try {
        d = score_pair(encoders[i], s, t, cfg, seed, self_loss);
      } catch (const Error&) {
        retried = true;
        try {
          d = score_pair(encoders[i], s, t, cfg, derive_seed(seed, 1), self_loss);
        } catch (const Error& e) {
          cell_errors[k] = e.what();
        }
      }
      if (!cell_errors[k].empty()) {
        std::lock_guard lock(mu);
        ++st.cells_retried;
        return;
      }
      rec = CellRecord{};
      if (is_self) {
        rec->value = self_divergence(*encoders[i], *s.graph);
        rec->attention_self = d;
      } else {
        rec->value = d;
      }
      if (opts.checkpoint_dir) save_cell(cell_path(*opts.checkpoint_dir, t.id, s.id), key, t, s, *rec);
      std::lock_guard lock(mu);
      ++st.cells_scored;
      if (retried) ++st.cells_retried;
    }
    table.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rec->value;
    if (is_self) {
      std::lock_guard lock(mu);
      table.attention_self[static_cast<Eigen::Index>(i)] = rec->attention_self;
    }
  });
  st.score_seconds = seconds_since(t0);

  for (std::size_t k = 0; k < m * n; ++k)
    if (!cell_errors[k].empty()) table.errors.push_back({k / n, k % n, cell_errors[k]});
  st.cells_failed = table.errors.size();
  if (stats) *stats = st;
  return table;
}

std::string embedding_csv(const DivergenceTable& table, const TrainConfig& cfg) {
  std::ostringstream os;
  os << "# config_hash=" << hash_hex(cfg.hash()) << ",seed=" << cfg.rng_seed << "\n";
  os << "graph_id";
  for (const auto& s : table.source_ids) os << ',' << s;
  os << '\n';
  for (std::size_t j = 0; j < table.target_ids.size(); ++j) {
    os << table.target_ids[j];
    for (Eigen::Index i = 0; i < table.values.cols(); ++i)
      os << ',' << format_g17(table.values(static_cast<Eigen::Index>(j), i));
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

EmbeddingFile parse_embedding_csv(const std::string& text) {
  EmbeddingFile f;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      for (const auto& field : split_commas(line.substr(1))) {
        auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        std::string k = field.substr(0, eq);
        k.erase(0, k.find_first_not_of(' '));
        const std::string v = field.substr(eq + 1);
        if (k == "config_hash") f.config_hash = v;
        if (k == "seed") {
          char* end = nullptr;
          f.seed = std::strtoull(v.c_str(), &end, 10);
          if (v.empty() || *end != '\0')
            throw FormatError("embedding csv line " + std::to_string(line_no) + ": bad seed '" +
                              v + "'");
        }
      }
      continue;
    }
    auto cells = split_commas(line);
    if (!have_header) {
      if (cells.empty() || cells[0] != "graph_id")
        throw FormatError("embedding csv line " + std::to_string(line_no) +
                          ": expected header starting with graph_id");
      f.source_ids.assign(cells.begin() + 1, cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() != f.source_ids.size() + 1)
      throw FormatError("embedding csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(f.source_ids.size() + 1) + " fields, found " +
                        std::to_string(cells.size()));
    f.target_ids.push_back(cells[0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c] == "nan") {
        row.push_back(kNaN);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0')
        throw FormatError("embedding csv line " + std::to_string(line_no) + ": bad number '" +
                          cells[c] + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw FormatError("embedding csv: missing header");
  if (f.config_hash.empty()) throw FormatError("embedding csv: missing config_hash line");
  f.values = Matrix(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(f.source_ids.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      f.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return f;
}

std::string matrix_csv(const Matrix& m, std::span<const std::string> ids) {
  if (static_cast<std::size_t>(m.rows()) != ids.size() ||
      static_cast<std::size_t>(m.cols()) != ids.size())
    throw DimensionError("matrix_csv: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " but " + std::to_string(ids.size()) +
                         " ids were given");
  std::ostringstream os;
  os << "graph_id";
  for (const auto& id : ids) os << ',' << id;
  os << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ',' << format_g17(m(r, c));
    os << '\n';
  }
  return os.str();
}

}  // namespace ddgk
