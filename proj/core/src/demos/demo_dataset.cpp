#include "soco/demos/demo_dataset.hpp"

#include <cmath>
#include <cstring>

#include "soco/error.hpp"
#include "soco/io.hpp"
#include "soco/numerics/hash.hpp"

namespace soco::demos {

void DemoDataset::validate() const {
  if (obs_width == 0 || act_width == 0) throw FormatError("demo dataset: zero width");
  if (observations.size() % obs_width != 0 || actions.size() % act_width != 0 ||
      observations.size() / obs_width != actions.size() / act_width) {
    throw FormatError("demo dataset: observation and action row counts differ");
  }
  for (float v : observations) {
    if (!std::isfinite(v)) throw NonFiniteError("demo dataset: non-finite observation");
  }
  for (float v : actions) {
    if (!std::isfinite(v) || v < -1.0f || v > 1.0f) {
      throw FormatError("demo dataset: action outside [-1, 1]");
    }
  }
}

std::vector<unsigned char> encode_demos(const DemoDataset& data) {
  data.validate();
  io::ByteWriter w;
  w.text(std::string_view(kDemoMagic, sizeof(kDemoMagic)));
  w.uint<std::uint32_t>(kDemoFormatVersion);
  w.uint<std::uint64_t>(data.size());
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(data.obs_width));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(data.act_width));
  for (float v : data.observations) w.f32(v);
  for (float v : data.actions) w.f32(v);
  const std::string meta = data.metadata.dump();
  w.uint<std::uint64_t>(meta.size());
  w.text(meta);
  return w.buffer();
}

DemoDataset decode_demos(std::span<const unsigned char> bytes) {
  io::ByteReader r(bytes);
  if (r.text(sizeof(kDemoMagic)) != std::string_view(kDemoMagic, sizeof(kDemoMagic))) {
    throw FormatError("demo file: bad magic");
  }
  const auto version = r.uint<std::uint32_t>();
  if (version != kDemoFormatVersion) {
    throw FormatError("demo file: unsupported version " + std::to_string(version));
  }
  const auto count = r.uint<std::uint64_t>();
  DemoDataset data;
  data.obs_width = r.uint<std::uint32_t>();
  data.act_width = r.uint<std::uint32_t>();
  if (data.obs_width == 0 || data.act_width == 0) throw FormatError("demo file: zero width");
  const std::uint64_t floats = count * (data.obs_width + data.act_width);
  if (floats * 4 > r.remaining()) throw FormatError("demo file: truncated payload");
  data.observations.resize(count * data.obs_width);
  data.actions.resize(count * data.act_width);
  for (float& v : data.observations) v = r.f32();
  for (float& v : data.actions) v = r.f32();
  const auto meta_len = r.uint<std::uint64_t>();
  if (meta_len > r.remaining()) throw FormatError("demo file: truncated metadata");
  try {
    data.metadata = nlohmann::json::parse(r.text(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("demo file: metadata: ") + e.what());
  }
  if (r.remaining() != 0) throw FormatError("demo file: trailing bytes");
  data.validate();
  return data;
}

void save_demos(const std::filesystem::path& path, const DemoDataset& data) {
  io::write_file_atomic(path, encode_demos(data));
}

DemoDataset load_demos(const std::filesystem::path& path) {
  return decode_demos(io::read_file(path));
}

DemoStats demo_stats(const DemoDataset& data) {
  DemoStats stats;
  stats.count = data.size();
  if (data.metadata.contains("mean_episode_return") &&
      data.metadata["mean_episode_return"].is_number()) {
    stats.mean_episode_return = data.metadata["mean_episode_return"].get<double>();
  }
  if (stats.count == 0) return stats;
  const std::size_t w = data.act_width;
  std::vector<double> mean(w, 0.0), var(w, 0.0);
  for (std::size_t i = 0; i < stats.count; ++i) {
    for (std::size_t d = 0; d < w; ++d) mean[d] += data.actions[i * w + d];
  }
  for (double& m : mean) m /= static_cast<double>(stats.count);
  for (std::size_t i = 0; i < stats.count; ++i) {
    for (std::size_t d = 0; d < w; ++d) {
      const double diff = data.actions[i * w + d] - mean[d];
      var[d] += diff * diff;
    }
  }
  std::vector<double> std_dev(w);
  for (std::size_t d = 0; d < w; ++d) {
    std_dev[d] = std::sqrt(var[d] / static_cast<double>(stats.count));
  }
  stats.action_mean = std::move(mean);
  stats.action_std = std::move(std_dev);
  return stats;
}

CollectionReport collect_demos(const numerics::Mlp& expert, envs::SpreadWorld& env,
                               std::size_t count, std::uint64_t seed) {
  if (expert.input_width() != env.obs_width() ||
      expert.output_width() != envs::SpreadWorld::act_width() || env.n_agents() != 1) {
    throw ShapeError("collect_demos: expert/env observation-width mismatch");
  }
  CollectionReport report;
  DemoDataset& data = report.dataset;
  data.obs_width = env.obs_width();
  data.act_width = envs::SpreadWorld::act_width();
  data.observations.reserve(count * data.obs_width);
  data.actions.reserve(count * data.act_width);

  double return_sum = 0.0;
  std::uint64_t episode = 0;
  std::vector<double> obs;
  double episode_return = 0.0;
  bool in_episode = false;
  for (std::size_t i = 0; i < count; ++i) {
    if (!in_episode) {
      obs = env.reset(derive_seed(seed, episode++));
      episode_return = 0.0;
      in_episode = true;
    }
    const numerics::Tensor action =
        expert.forward(numerics::Tensor({1, obs.size()}, obs));
    for (double v : obs) data.observations.push_back(static_cast<float>(v));
    for (double v : action.data()) data.actions.push_back(static_cast<float>(v));
    const auto outcome = env.step(action.data());
    episode_return += outcome.reward.total;
    obs = outcome.joint_obs;
    if (outcome.done) {
      return_sum += episode_return;
      ++report.complete_episodes;
      in_episode = false;
    }
  }
  report.mean_episode_return =
      report.complete_episodes ? return_sum / static_cast<double>(report.complete_episodes) : 0.0;
  data.metadata = {
      {"env", "solo_nav"},
      {"expert_hash", numerics::param_hash(expert.params())},
      {"seed", seed},
      {"count", count},
      {"complete_episodes", report.complete_episodes},
      {"mean_episode_return", report.mean_episode_return},
  };
  return report;
}

}  // namespace soco::demos
