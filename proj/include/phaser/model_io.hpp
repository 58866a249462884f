#pragma once

#include <string>
#include <vector>

#include "phaser/common.hpp"

namespace phaser {

// PHSW flat tensor container: magic "PHSW", u16 version, u32 tensor count,
// then per tensor u32 name length + name bytes, u8 rank, u32 dims, float32
// payload. Little-endian throughout.
struct NamedTensorF {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

void write_phsw(const std::vector<NamedTensorF>& tensors, const std::string& path);
std::vector<NamedTensorF> read_phsw(const std::string& path);

}  // namespace phaser
