#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "soco/envs/spread.hpp"
#include "soco/numerics/mlp.hpp"

namespace soco::demos {

inline constexpr char kDemoMagic[8] = {'S', 'O', 'C', 'O', 'D', 'E', 'M', 'O'};
inline constexpr std::uint32_t kDemoFormatVersion = 1;

// Solo (observation, action) pairs. Stored as 32-bit floats, matching the
// on-disk format.
struct DemoDataset {
  std::size_t obs_width = 0;
  std::size_t act_width = 0;
  std::vector<float> observations;  // [size, obs_width]
  std::vector<float> actions;       // [size, act_width]
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return obs_width ? observations.size() / obs_width : 0; }
  // Row counts agree, values finite, actions inside [-1, 1].
  void validate() const;
};

// Header: magic "SOCODEMO", u32 version, u64 M, u32 obs_width, u32 act_width
// (little-endian); then M*obs_width f32 observations, M*act_width f32
// actions, then u64 byte length + UTF-8 JSON metadata.
std::vector<unsigned char> encode_demos(const DemoDataset& data);
DemoDataset decode_demos(std::span<const unsigned char> bytes);
void save_demos(const std::filesystem::path& path, const DemoDataset& data);
DemoDataset load_demos(const std::filesystem::path& path);

struct DemoStats {
  std::size_t count = 0;
  std::optional<std::vector<double>> action_mean;
  std::optional<std::vector<double>> action_std;  // population std
  std::optional<double> mean_episode_return;       // from metadata, if recorded
};

DemoStats demo_stats(const DemoDataset& data);

struct CollectionReport {
  DemoDataset dataset;
  double mean_episode_return = 0.0;
  std::size_t complete_episodes = 0;
};

// Rolls out the deterministic expert (an actor network over solo
// observations) on `env` and records `count` (o, a) pairs. Returns of
// complete episodes are averaged into the report and the metadata.
CollectionReport collect_demos(const numerics::Mlp& expert, envs::SpreadWorld& env,
                               std::size_t count, std::uint64_t seed);

}  // namespace soco::demos
