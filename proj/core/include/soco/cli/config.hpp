#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "soco/decomp/layout.hpp"
#include "soco/demos/behavior_cloning.hpp"
#include "soco/fusion/fused_policy.hpp"
#include "soco/marl/trainer.hpp"

namespace soco::cli {

struct RunPaths {
  std::string expert = "runs/expert.ckpt";
  std::string demos = "runs/demos.bin";
  std::string solo = "runs/solo.ckpt";
  std::string checkpoint = "runs/marl.ckpt";
  std::string metrics_dir = "runs/metrics";
};

// Everything a pipeline stage needs. JSON layout (all sections optional,
// unknown keys rejected):
//   { "stage": str, "env": {"id": "spread"|"solo_nav", "n_agents": int},
//     "trainer": {...TrainerConfig fields...},
//     "fusion": {"enabled": bool, "L": num, "gating": str, "clip": str,
//                "gumbel_temperature": num},
//     "layout": {...ObservationLayout...},
//     "bc": {"steps", "batch_size", "learning_rate"},
//     "demos": {"count": int, "expert_eval_episodes": int},
//     "paths": {"expert", "demos", "solo", "checkpoint", "metrics_dir"},
//     "seeds": [int, ...] }
struct RunConfig {
  std::string stage;
  std::string env_id = "spread";
  std::size_t n_agents = 3;
  marl::TrainerConfig trainer;
  bool soco = false;
  fusion::FusionConfig fusion;
  std::optional<decomp::ObservationLayout> layout;
  demos::BcConfig bc;
  std::size_t demo_count = 100'000;
  std::size_t expert_eval_episodes = 40;
  RunPaths paths;
  std::vector<std::uint64_t> seeds = {0};

  // Agent count after applying the env id (solo_nav is always one agent).
  std::size_t agents() const { return env_id == "solo_nav" ? 1 : n_agents; }
  void validate() const;
  // MarlSetup for one seed; the solo policy is attached by the caller.
  marl::MarlSetup marl_setup(std::uint64_t seed) const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
// MissingArtifactError if absent, ConfigError if malformed or invalid.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace soco::cli
