#pragma once
// Checkpoint format: magic "FSDT", version u32, entry count u32, then per
// entry: name length u16 + UTF-8 name, rank u8, dims (u32 each), raw
// little-endian 32-bit floats. Round trips are bit-exact.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fsdt/nn/param_set.hpp"
#include "fsdt/nn/tensor.hpp"

namespace fsdt::nn {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using NamedTensorRefs =
    std::vector<std::pair<std::string, const Tensor<float>*>>;
using NamedTensors = std::vector<std::pair<std::string, Tensor<float>>>;

std::vector<std::uint8_t> serialize_checkpoint(const NamedTensorRefs& entries);
NamedTensors parse_checkpoint(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> save_checkpoint(const ParamSet<float>& ps);
// Builds a fresh set (zeroed gradients and optimizer state).
ParamSet<float> load_checkpoint(const std::vector<std::uint8_t>& bytes);
// Loads values into an existing set; every checkpoint entry whose name starts
// with `prefix` is matched (prefix stripped) against the set by name+shape.
void load_values_into(ParamSet<float>& ps,
                      const std::vector<std::uint8_t>& bytes,
                      const std::string& prefix = "");

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

}  // namespace fsdt::nn
