#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "soco/numerics/mlp.hpp"
#include "soco/numerics/tensor.hpp"

namespace soco::cli {

inline constexpr char kCheckpointMagic[8] = {'S', 'O', 'C', 'O', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  numerics::Tensor tensor;
};

// Named float64 tensors plus a JSON trailer ({config, step, solo_hash, ...}).
//
// File layout, little-endian:
//   magic "SOCOCKPT" | u32 version | u32 tensor count
//   directory: per tensor u32 name length, name bytes, u32 rank,
//              rank x u64 dims, u64 absolute byte offset of its data
//   data: each tensor's values as f64, in directory order, contiguous
//   u64 trailer length | trailer JSON (UTF-8)
struct Checkpoint {
  std::vector<NamedTensor> tensors;
  nlohmann::json trailer = nlohmann::json::object();

  bool contains(const std::string& name) const;
  // FormatError if absent.
  const numerics::Tensor& get(const std::string& name) const;
  void add(std::string name, numerics::Tensor tensor);

  // Stores W1..b3 under "<prefix>.l{0,1,2}.{weight,bias}".
  void add_net(const std::string& prefix, const numerics::Mlp& net);
  // Overwrites `net` parameters; shapes must match exactly.
  void load_net(const std::string& prefix, numerics::Mlp& net) const;
  // Rebuilds a network from the stored shapes alone.
  numerics::Mlp read_net(const std::string& prefix, numerics::OutputHead head) const;
};

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt);
// FormatError on any structural problem (bad magic, truncation, trailing
// bytes, overlapping data); nothing is returned in that case.
Checkpoint decode_checkpoint(std::span<const unsigned char> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace soco::cli
