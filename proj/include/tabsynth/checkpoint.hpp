#pragma once

// Binary checkpoint, all integers and floats little-endian:
//
//   "TBDD" | u16 version
//   schedule:  u32 T | f64 offset | f64 max_beta
//   denoiser:  u32 input_dim | u32 num_layers | u32 layer_width | u32 num_classes
//              | u32 embed_dim | f64 dropout
//   training:  f64 lr | u32 batch_size | u32 iterations | f64 sample_proportion | u64 seed
//   tensors:   u32 count, then per tensor u32 rows | u32 cols | rows*cols f32 (row-major)
//   schema:    u8 task | u32 ncols, per column str name | u8 kind
//              | u32 ncat, per feature str name | u32 K | K x str
//              | str target | u32 nlabels | nlabels x str
//   quantiles: u32 count, per transform u32 n | n x f64 landmarks
//   u64 train_rows | u32 nclasses | nclasses x u64 train class counts
//
// str = u32 byte length followed by UTF-8 bytes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "tabsynth/engine.hpp"

namespace tabsynth {

inline constexpr std::uint16_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& checkpoint);
// Throws DataError on a bad magic, version mismatch or truncated data.
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tabsynth
