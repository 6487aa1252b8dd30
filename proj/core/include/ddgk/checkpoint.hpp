#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ddgk/linalg.hpp"

namespace ddgk {

struct NamedTensor {
  std::string name;
  Matrix value;
};

// Versioned JSON parameter snapshot:
//   {"version": 1, "meta": {...}, "shapes": [[name, rows, cols], ...],
//    "values": [["<hex float>", ...], ...], "checksum": "<fnv1a hex>"}
// Values use C99 hexadecimal floats so the round trip is bit-exact.
struct Checkpoint {
  static constexpr int kVersion = 1;

  std::map<std::string, std::string> meta;
  std::vector<NamedTensor> tensors;

  const Matrix& tensor(const std::string& name) const;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
// Throws CheckpointError on version mismatch, malformed layout or checksum failure.
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ddgk
