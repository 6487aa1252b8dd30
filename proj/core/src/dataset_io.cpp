#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ddgk/dataset.hpp"
#include "ddgk/error.hpp"
#include "ddgk/fileio.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ddgk {

LabelVocabulary::LabelVocabulary(LabelKind kind, std::vector<std::string> names)
    : kind_(kind), names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw ArgumentError("duplicate label name '" + n + "'");
  }
}

const std::string& LabelVocabulary::name(LabelId id) const {
  if (id < 0 || id >= size()) throw ArgumentError("label id out of vocabulary range");
  return names_[id];
}

LabelId LabelVocabulary::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<LabelId>(it - names_.begin());
}

std::string GraphDataset::graph_id(std::size_t index) const {
  return (name.empty() ? std::string("g") : name) + "/" + std::to_string(index);
}

void GraphDataset::validate() const {
  if (graphs.size() != graph_classes.size()) {
    throw FormatError("dataset has " + std::to_string(graphs.size()) + " graphs but " +
                      std::to_string(graph_classes.size()) + " class labels");
  }
  for (int c : graph_classes) {
    if (c < 0 || c >= class_count()) throw FormatError("class id outside 0..class_count-1");
  }
  for (const Graph& g : graphs) {
    if (node_vocab && g.has_node_labels() && g.node_label_count() != node_vocab->size())
      throw FormatError("graph node label vocabulary disagrees with dataset vocabulary");
    if (edge_vocab && g.has_edge_labels() && g.edge_label_count() != edge_vocab->size())
      throw FormatError("graph edge label vocabulary disagrees with dataset vocabulary");
  }
}

DatasetSummary summarize(const GraphDataset& ds) {
  DatasetSummary s;
  s.graphs = ds.size();
  s.classes = ds.class_count();
  s.node_labels = ds.node_vocab ? ds.node_vocab->size() : 0;
  s.edge_labels = ds.edge_vocab ? ds.edge_vocab->size() : 0;
  if (ds.graphs.empty()) return s;
  double nodes = 0, edges = 0;
  for (const Graph& g : ds.graphs) {
    nodes += g.node_count();
    edges += static_cast<double>(g.edge_count());
  }
  s.mean_nodes = nodes / static_cast<double>(ds.size());
  s.mean_edges = edges / static_cast<double>(ds.size());
  std::vector<std::size_t> counts(std::max(1, ds.class_count()), 0);
  for (int c : ds.graph_classes) ++counts[c];
  s.majority_rate = static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
                    static_cast<double>(ds.size());
  return s;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Non-empty lines of a file with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("missing or unreadable file: " + path.string());
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto t = trim(line);
    if (!t.empty()) out.emplace_back(no, std::move(t));
  }
  return out;
}

long parse_long(const std::string& tok, const fs::path& file, std::size_t line) {
  long v = 0;
  auto t = trim(tok);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw FormatError(file.filename().string() + ":" + std::to_string(line) +
                      ": expected integer, got '" + t + "'");
  }
  return v;
}

// Sorts tokens numerically when they all parse as numbers, else lexicographically.
std::vector<std::string> ordered_tokens(const std::set<std::string>& tokens) {
  std::vector<std::string> out(tokens.begin(), tokens.end());
  bool numeric = std::all_of(out.begin(), out.end(), [](const std::string& t) {
    char* end = nullptr;
    std::strtod(t.c_str(), &end);
    return end != t.c_str() && *end == '\0';
  });
  if (numeric) {
    std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
      return std::strtod(a.c_str(), nullptr) < std::strtod(b.c_str(), nullptr);
    });
  }
  return out;
}

fs::path find_prefix_file(const fs::path& dir, std::string& prefix) {
  if (!fs::is_directory(dir)) throw IngestionError("dataset directory not found: " + dir.string());
  std::vector<fs::path> hits;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto name = e.path().filename().string();
    if (name.size() > 6 && name.ends_with("_A.txt")) hits.push_back(e.path());
  }
  if (hits.empty()) throw IngestionError("no <DS>_A.txt file in " + dir.string());
  if (hits.size() > 1) throw IngestionError("multiple <DS>_A.txt files in " + dir.string());
  auto name = hits.front().filename().string();
  prefix = name.substr(0, name.size() - 6);
  return hits.front();
}

}  // namespace

GraphDataset load_tu_dataset(const fs::path& directory) {
  std::string ds_name;
  const fs::path a_file = find_prefix_file(directory, ds_name);
  auto file = [&](const std::string& suffix) { return directory / (ds_name + "_" + suffix); };

  const auto indicator_lines = read_lines(file("graph_indicator.txt"));
  const auto class_lines = read_lines(file("graph_labels.txt"));
  const auto edge_lines = read_lines(a_file);

  // Global node k (1-based) -> (graph index, local id).
  const std::size_t total_nodes = indicator_lines.size();
  std::vector<std::size_t> node_graph(total_nodes);
  std::vector<int> node_local(total_nodes);
  std::vector<int> graph_sizes;
  for (std::size_t k = 0; k < total_nodes; ++k) {
    long gid = parse_long(indicator_lines[k].second, file("graph_indicator.txt"),
                          indicator_lines[k].first);
    if (gid < 1) {
      throw FormatError(file("graph_indicator.txt").filename().string() + ":" +
                        std::to_string(indicator_lines[k].first) + ": graph ids are 1-based");
    }
    auto g = static_cast<std::size_t>(gid - 1);
    if (g >= graph_sizes.size()) graph_sizes.resize(g + 1, 0);
    node_graph[k] = g;
    node_local[k] = graph_sizes[g]++;
  }
  const std::size_t graph_count = graph_sizes.size();
  if (class_lines.size() != graph_count) {
    throw FormatError(file("graph_labels.txt").filename().string() + ": expected " +
                      std::to_string(graph_count) + " class labels, found " +
                      std::to_string(class_lines.size()));
  }

  std::vector<std::string> edge_label_tokens;
  const bool has_edge_labels = fs::exists(file("edge_labels.txt"));
  if (has_edge_labels) {
    auto lines = read_lines(file("edge_labels.txt"));
    if (lines.size() != edge_lines.size()) {
      throw FormatError(file("edge_labels.txt").filename().string() + ": expected " +
                        std::to_string(edge_lines.size()) + " lines, found " +
                        std::to_string(lines.size()));
    }
    for (auto& [no, t] : lines) edge_label_tokens.push_back(trim(t.substr(0, t.find(','))));
  }
  std::vector<std::string> node_label_tokens;
  const bool has_node_labels = fs::exists(file("node_labels.txt"));
  if (has_node_labels) {
    auto lines = read_lines(file("node_labels.txt"));
    if (lines.size() != total_nodes) {
      throw FormatError(file("node_labels.txt").filename().string() + ": expected " +
                        std::to_string(total_nodes) + " lines, found " +
                        std::to_string(lines.size()));
    }
    for (auto& [no, t] : lines) node_label_tokens.push_back(trim(t.substr(0, t.find(','))));
  }

  GraphDataset ds;
  ds.name = ds_name;

  // Per graph: canonical edge -> first-seen label token index.
  std::vector<std::map<std::pair<int, int>, std::size_t>> graph_edges(graph_count);
  for (std::size_t i = 0; i < edge_lines.size(); ++i) {
    const auto& [no, text] = edge_lines[i];
    auto comma = text.find(',');
    if (comma == std::string::npos) {
      throw FormatError(a_file.filename().string() + ":" + std::to_string(no) +
                        ": expected 'i, j'");
    }
    long a = parse_long(text.substr(0, comma), a_file, no);
    long b = parse_long(text.substr(comma + 1), a_file, no);
    if (a < 1 || b < 1 || static_cast<std::size_t>(a) > total_nodes ||
        static_cast<std::size_t>(b) > total_nodes) {
      throw FormatError(a_file.filename().string() + ":" + std::to_string(no) +
                        ": node id outside 1.." + std::to_string(total_nodes));
    }
    auto ga = node_graph[a - 1], gb = node_graph[b - 1];
    if (ga != gb) {
      throw FormatError(a_file.filename().string() + ":" + std::to_string(no) + ": edge (" +
                        std::to_string(a) + ", " + std::to_string(b) +
                        ") crosses graphs " + std::to_string(ga + 1) + " and " +
                        std::to_string(gb + 1));
    }
    int u = node_local[a - 1], v = node_local[b - 1];
    if (u == v) {
      ++ds.dropped_self_loops;
      continue;
    }
    auto key = std::make_pair(std::min(u, v), std::max(u, v));
    if (!graph_edges[ga].emplace(key, i).second) ++ds.merged_duplicate_edges;
  }

  std::optional<std::vector<std::string>> node_names, edge_names;
  std::map<std::string, LabelId> node_index, edge_index;
  if (has_node_labels) {
    node_names = ordered_tokens({node_label_tokens.begin(), node_label_tokens.end()});
    for (std::size_t i = 0; i < node_names->size(); ++i) node_index[(*node_names)[i]] = i;
    ds.node_vocab = LabelVocabulary(LabelKind::node, *node_names);
  }
  if (has_edge_labels) {
    edge_names = ordered_tokens({edge_label_tokens.begin(), edge_label_tokens.end()});
    for (std::size_t i = 0; i < edge_names->size(); ++i) edge_index[(*edge_names)[i]] = i;
    ds.edge_vocab = LabelVocabulary(LabelKind::edge, *edge_names);
  }

  std::vector<std::vector<LabelId>> node_labels(graph_count);
  if (has_node_labels) {
    for (std::size_t g = 0; g < graph_count; ++g) node_labels[g].resize(graph_sizes[g]);
    for (std::size_t k = 0; k < total_nodes; ++k)
      node_labels[node_graph[k]][node_local[k]] = node_index.at(node_label_tokens[k]);
  }

  ds.graphs.reserve(graph_count);
  for (std::size_t g = 0; g < graph_count; ++g) {
    std::vector<std::pair<int, int>> edges;
    std::vector<LabelId> elabels;
    edges.reserve(graph_edges[g].size());
    for (const auto& [key, line] : graph_edges[g]) {  // map order == canonical sorted order
      edges.push_back(key);
      if (has_edge_labels) elabels.push_back(edge_index.at(edge_label_tokens[line]));
    }
    Graph graph(graph_sizes[g], edges);
    if (has_node_labels) graph = graph.with_node_labels(std::move(node_labels[g]), ds.node_vocab->size());
    if (has_edge_labels) graph = graph.with_edge_labels(std::move(elabels), ds.edge_vocab->size());
    ds.graphs.push_back(std::move(graph));
  }

  std::set<std::string> class_tokens;
  for (auto& [no, t] : class_lines) class_tokens.insert(t);
  ds.class_names = ordered_tokens(class_tokens);
  std::map<std::string, int> class_index;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) class_index[ds.class_names[i]] = i;
  for (auto& [no, t] : class_lines) ds.graph_classes.push_back(class_index.at(t));

  ds.validate();
  return ds;
}

void save_tu_dataset(const GraphDataset& ds, const fs::path& directory) {
  ds.validate();
  fs::create_directories(directory);
  const std::string prefix = ds.name.empty() ? "DS" : ds.name;
  std::ostringstream a, ind, cls, nl, el;
  const bool node_labels = ds.node_vocab.has_value() || (ds.size() > 0 && ds.graphs[0].has_node_labels());
  const bool edge_labels = ds.edge_vocab.has_value() || (ds.size() > 0 && ds.graphs[0].has_edge_labels());
  // Without a vocabulary the label ids themselves are written as tokens.
  const auto token = [](const std::optional<LabelVocabulary>& vocab, LabelId id) {
    return vocab ? vocab->name(id) : std::to_string(id);
  };
  std::size_t base = 1;
  for (std::size_t gi = 0; gi < ds.size(); ++gi) {
    const Graph& g = ds.graphs[gi];
    for (int u = 0; u < g.node_count(); ++u) {
      ind << gi + 1 << '\n';
      if (node_labels) nl << token(ds.node_vocab, g.node_label(u)) << '\n';
    }
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const Edge edge = g.edges()[e];
      a << base + edge.u << ", " << base + edge.v << '\n';
      a << base + edge.v << ", " << base + edge.u << '\n';
      if (edge_labels) {
        const std::string n = token(ds.edge_vocab, g.edge_label(e));
        el << n << '\n' << n << '\n';
      }
    }
    base += g.node_count();
    cls << ds.class_names.at(ds.graph_classes[gi]) << '\n';
  }
  write_file_atomic(directory / (prefix + "_A.txt"), a.str());
  write_file_atomic(directory / (prefix + "_graph_indicator.txt"), ind.str());
  write_file_atomic(directory / (prefix + "_graph_labels.txt"), cls.str());
  if (node_labels) write_file_atomic(directory / (prefix + "_node_labels.txt"), nl.str());
  if (edge_labels) write_file_atomic(directory / (prefix + "_edge_labels.txt"), el.str());
}

namespace {

json graph_to_json(const Graph& g) {
  json j;
  j["nodes"] = g.node_count();
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
  j["edges"] = std::move(edges);
  if (g.has_node_labels()) {
    j["node_labels"] = std::vector<LabelId>(g.node_labels().begin(), g.node_labels().end());
    j["node_label_count"] = g.node_label_count();
  }
  if (g.has_edge_labels()) {
    json el = json::array();
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      el.push_back({g.edges()[e].u, g.edges()[e].v, g.edge_label(e)});
    j["edge_labels"] = std::move(el);
    j["edge_label_count"] = g.edge_label_count();
  }
  return j;
}

Graph graph_from_json(const json& j, int node_vocab = 0, int edge_vocab = 0) {
  try {
    const int n = j.at("nodes").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    Graph g(n, edges);
    if (j.contains("node_labels")) {
      auto labels = j["node_labels"].get<std::vector<LabelId>>();
      int count = j.value("node_label_count", node_vocab);
      if (count == 0 && !labels.empty()) count = *std::max_element(labels.begin(), labels.end()) + 1;
      g = g.with_node_labels(std::move(labels), std::max(count, 1));
    }
    if (j.contains("edge_labels")) {
      std::vector<LabelId> labels(g.edge_count(), -1);
      int max_label = -1;
      for (const auto& t : j["edge_labels"]) {
        auto idx = g.edge_index(t.at(0).get<int>(), t.at(1).get<int>());
        if (!idx) throw FormatError("edge label for a pair that is not an edge");
        labels[*idx] = t.at(2).get<LabelId>();
        max_label = std::max(max_label, labels[*idx]);
      }
      if (std::find(labels.begin(), labels.end(), -1) != labels.end())
        throw FormatError("edge_labels must cover every edge");
      int count = j.value("edge_label_count", edge_vocab);
      if (count == 0) count = max_label + 1;
      g = g.with_edge_labels(std::move(labels), std::max(count, 1));
    }
    return g;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed graph JSON: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid graph JSON: ") + e.what());
  }
}

}  // namespace

Graph graph_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  return graph_from_json(j);
}

std::string graph_to_json_text(const Graph& g) { return graph_to_json(g).dump() + "\n"; }

GraphDataset load_json_dataset(const fs::path& file) {
  const std::string text = read_text_file(file);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": invalid JSON: " + e.what());
  }
  GraphDataset ds;
  ds.name = file.stem().string();
  try {
    if (j.contains("nodes")) {  // single graph
      ds.graphs.push_back(graph_from_json(j));
      ds.graph_classes.push_back(0);
      ds.class_names = {"0"};
    } else {
      ds.name = j.value("name", ds.name);
      int node_vocab = 0, edge_vocab = 0;
      if (j.contains("node_label_names")) {
        ds.node_vocab = LabelVocabulary(LabelKind::node, j["node_label_names"].get<std::vector<std::string>>());
        node_vocab = ds.node_vocab->size();
      }
      if (j.contains("edge_label_names")) {
        ds.edge_vocab = LabelVocabulary(LabelKind::edge, j["edge_label_names"].get<std::vector<std::string>>());
        edge_vocab = ds.edge_vocab->size();
      }
      for (const auto& g : j.at("graphs")) ds.graphs.push_back(graph_from_json(g, node_vocab, edge_vocab));
      if (j.contains("classes")) {
        ds.graph_classes = j["classes"].get<std::vector<int>>();
      } else {
        ds.graph_classes.assign(ds.graphs.size(), 0);
      }
      int max_class = ds.graph_classes.empty()
                          ? 0
                          : *std::max_element(ds.graph_classes.begin(), ds.graph_classes.end());
      if (j.contains("class_names")) {
        ds.class_names = j["class_names"].get<std::vector<std::string>>();
      } else {
        for (int c = 0; c <= max_class; ++c) ds.class_names.push_back(std::to_string(c));
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  // Unify per-graph label vocabularies when the file did not name them.
  auto unify = [&](LabelKind kind) {
    int count = 0;
    for (const Graph& g : ds.graphs)
      count = std::max(count, kind == LabelKind::node ? g.node_label_count() : g.edge_label_count());
    if (count == 0) return;
    std::vector<std::string> names;
    for (int i = 0; i < count; ++i) names.push_back(std::to_string(i));
    for (Graph& g : ds.graphs) {
      if (kind == LabelKind::node && g.has_node_labels()) {
        g = g.with_node_labels({g.node_labels().begin(), g.node_labels().end()}, count);
      } else if (kind == LabelKind::edge && g.has_edge_labels()) {
        g = g.with_edge_labels({g.edge_labels().begin(), g.edge_labels().end()}, count);
      }
    }
    (kind == LabelKind::node ? ds.node_vocab : ds.edge_vocab) = LabelVocabulary(kind, names);
  };
  if (!ds.node_vocab) unify(LabelKind::node);
  if (!ds.edge_vocab) unify(LabelKind::edge);
  ds.validate();
  return ds;
}

void save_json_dataset(const GraphDataset& ds, const fs::path& file) {
  json j;
  j["name"] = ds.name;
  json graphs = json::array();
  for (const Graph& g : ds.graphs) graphs.push_back(graph_to_json(g));
  j["graphs"] = std::move(graphs);
  j["classes"] = ds.graph_classes;
  j["class_names"] = ds.class_names;
  if (ds.node_vocab) j["node_label_names"] = ds.node_vocab->names();
  if (ds.edge_vocab) j["edge_label_names"] = ds.edge_vocab->names();
  write_file_atomic(file, j.dump(1) + "\n");
}

GraphDataset load_dataset(const fs::path& path, DatasetFormat format) {
  if (!fs::exists(path)) throw IngestionError("dataset path not found: " + path.string());
  return format == DatasetFormat::tu ? load_tu_dataset(path) : load_json_dataset(path);
}

}  // namespace ddgk
