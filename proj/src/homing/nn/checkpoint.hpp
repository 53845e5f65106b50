// Binary policy/value checkpoint. Layout (little-endian):
//
//   char[8]  magic "HMGCKPT1"
//   u32      format version (1)
//   u32      network count (2: policy, value)
//   per network:
//     u32 x5   obs_dim, h1, h2, h3, out_dim
//     f64[obs] input scale, f64[obs] input offset
//     u64      parameter count, f64[count] parameters (flat layout of RecurrentNet)
//   u64 + bytes  RNG state (std::mt19937_64 textual state)
//   f64      clip epsilon at save time
//   u64      completed training batches
//   u64 + bytes  free-form metadata (JSON text)
//
// Doubles are stored as raw IEEE-754 bits, so a save/load round trip is exact.
#pragma once

#include "homing/common/random.hpp"
#include "homing/nn/network.hpp"

#include <cstdint>
#include <string>

namespace homing::nn {

struct Checkpoint {
  RecurrentNet policy{policy_shape()};
  RecurrentNet value{value_shape()};
  std::string rng_state;
  double clip_eps = 0.2;
  std::uint64_t batches_done = 0;
  std::string metadata;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws kIo when the file is missing and kConfig when it is malformed.
Checkpoint load_checkpoint(const std::string& path);

std::string rng_to_string(const Rng& rng);
Rng rng_from_string(const std::string& state);

}  // namespace homing::nn
