#include "ddgk/checkpoint.hpp"

#include <cstdio>

#include <json.hpp>

#include "ddgk/error.hpp"
#include "ddgk/fileio.hpp"
#include "ddgk/rng.hpp"

using json = nlohmann::json;

namespace ddgk {

const Matrix& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw CheckpointError("checkpoint has no tensor named '" + name + "'");
}

namespace {

std::string checksum_of(const json& meta, const json& shapes, const json& values) {
  std::uint64_t h = fnv1a(meta.dump());
  h = fnv1a(shapes.dump(), h);
  h = fnv1a(values.dump(), h);
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json meta = json::object();
  for (const auto& [k, v] : ckpt.meta) meta[k] = v;
  json shapes = json::array();
  json values = json::array();
  for (const auto& t : ckpt.tensors) {
    shapes.push_back({t.name, t.value.rows(), t.value.cols()});
    json row = json::array();
    for (Eigen::Index i = 0; i < t.value.size(); ++i) row.push_back(hex_double(t.value.data()[i]));
    values.push_back(std::move(row));
  }
  json j;
  j["version"] = Checkpoint::kVersion;
  j["checksum"] = checksum_of(meta, shapes, values);
  j["meta"] = std::move(meta);
  j["shapes"] = std::move(shapes);
  j["values"] = std::move(values);
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != Checkpoint::kVersion)
      throw CheckpointError("unsupported checkpoint version " + j["version"].dump());
    const json& meta = j.at("meta");
    const json& shapes = j.at("shapes");
    const json& values = j.at("values");
    if (checksum_of(meta, shapes, values) != j.at("checksum").get<std::string>())
      throw CheckpointError("checkpoint checksum mismatch");
    if (shapes.size() != values.size()) throw CheckpointError("shapes/values length mismatch");
    Checkpoint ckpt;
    for (auto it = meta.begin(); it != meta.end(); ++it) ckpt.meta[it.key()] = it.value().get<std::string>();
    for (std::size_t t = 0; t < shapes.size(); ++t) {
      const auto name = shapes[t].at(0).get<std::string>();
      const auto rows = shapes[t].at(1).get<Eigen::Index>();
      const auto cols = shapes[t].at(2).get<Eigen::Index>();
      if (rows < 0 || cols < 0 || values[t].size() != static_cast<std::size_t>(rows * cols))
        throw CheckpointError("tensor '" + name + "' has inconsistent shape");
      Matrix m(rows, cols);
      for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = parse_hex_double(values[t][static_cast<std::size_t>(i)].get<std::string>());
      ckpt.tensors.push_back({name, std::move(m)});
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const FormatError& e) {
    throw CheckpointError(std::string("malformed checkpoint value: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_json(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IngestionError& e) {
    throw CheckpointError(e.what());
  }
  return checkpoint_from_json(text);
}

}  // namespace ddgk
