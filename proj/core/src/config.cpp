#include "ddgk/config.hpp"

#include <cstdio>

#include <json.hpp>

#include "ddgk/error.hpp"
#include "ddgk/fileio.hpp"
#include "ddgk/rng.hpp"

using json = nlohmann::json;

namespace ddgk {

void TrainConfig::validate() const {
  if (embed_dim <= 0) throw ArgumentError("embed_dim must be positive");
  if (encoder_layers <= 0) throw ArgumentError("encoder_layers must be positive");
  if (attention_layers != 1)
    throw ArgumentError("attention_layers: only linear attention (1) is supported");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
  if (encoding_epochs < 0) throw ArgumentError("encoding_epochs must be >= 0");
  if (scoring_epochs < 0) throw ArgumentError("scoring_epochs must be >= 0");
  if (!(node_reg_coef >= 0.0)) throw ArgumentError("node_reg_coef must be >= 0");
  if (!(edge_reg_coef >= 0.0)) throw ArgumentError("edge_reg_coef must be >= 0");
}

std::string TrainConfig::to_json() const {
  json j;
  j["embed_dim"] = embed_dim;
  j["encoder_layers"] = encoder_layers;
  j["attention_layers"] = attention_layers;
  j["learning_rate"] = hex_double(learning_rate);
  j["encoding_epochs"] = encoding_epochs;
  j["scoring_epochs"] = scoring_epochs;
  j["node_reg_coef"] = hex_double(node_reg_coef);
  j["edge_reg_coef"] = hex_double(edge_reg_coef);
  j["rng_seed"] = rng_seed;
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    TrainConfig c;
    c.embed_dim = j.at("embed_dim").get<int>();
    c.encoder_layers = j.at("encoder_layers").get<int>();
    c.attention_layers = j.at("attention_layers").get<int>();
    c.learning_rate = parse_hex_double(j.at("learning_rate").get<std::string>());
    c.encoding_epochs = j.at("encoding_epochs").get<int>();
    c.scoring_epochs = j.at("scoring_epochs").get<int>();
    c.node_reg_coef = parse_hex_double(j.at("node_reg_coef").get<std::string>());
    c.edge_reg_coef = parse_hex_double(j.at("edge_reg_coef").get<std::string>());
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad TrainConfig JSON: ") + e.what());
  }
}

std::uint64_t TrainConfig::hash() const { return fnv1a(to_json()); }

std::uint64_t TrainConfig::encoder_hash() const {
  json j;
  j["embed_dim"] = embed_dim;
  j["encoder_layers"] = encoder_layers;
  j["learning_rate"] = hex_double(learning_rate);
  j["encoding_epochs"] = encoding_epochs;
  j["rng_seed"] = rng_seed;
  return fnv1a(j.dump());
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ddgk
