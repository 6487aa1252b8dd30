#pragma once

#include <cstdint>
#include <string>

namespace ddgk {

// Hyper-parameters shared by encoder and attention training.
struct TrainConfig {
  int embed_dim = 8;          // d
  int encoder_layers = 2;     // l hidden relu layers of width d
  int attention_layers = 1;   // m; only linear attention (m == 1) is implemented
  double learning_rate = 1e-2;
  int encoding_epochs = 300;  // tau
  int scoring_epochs = 300;   // rho
  double node_reg_coef = 1.0;
  double edge_reg_coef = 1.0;
  std::uint64_t rng_seed = 1;

  // Throws ArgumentError when a field is out of range.
  void validate() const;

  // Canonical JSON text (sorted keys), the basis of the hashes below.
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);

  // Hash over every field; keys scored cells.
  std::uint64_t hash() const;
  // Hash over the fields that influence source encoders only.
  std::uint64_t encoder_hash() const;
};

std::string hash_hex(std::uint64_t h);

}  // namespace ddgk
