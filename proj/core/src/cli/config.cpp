#include "soco/cli/config.hpp"

#include <fstream>
#include <set>

#include "soco/error.hpp"
#include "soco/io.hpp"

namespace soco::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_trainer(const json& j, marl::TrainerConfig& t) {
  reject_unknown(j,
                 {"gamma", "batch_size", "hidden", "explore_noise", "policy_noise", "noise_clip",
                  "policy_delay", "tau", "actor_lr", "critic_lr", "n_step", "bootstrap_time_limit", "buffer_size",
                  "warmup_steps", "total_steps", "updates_per_step", "eval_interval",
                  "eval_episodes", "eval_seed"},
                 "trainer");
  read(j, "gamma", t.gamma);
  read(j, "batch_size", t.batch_size);
  read(j, "hidden", t.hidden);
  read(j, "explore_noise", t.explore_noise);
  read(j, "policy_noise", t.policy_noise);
  read(j, "noise_clip", t.noise_clip);
  read(j, "policy_delay", t.policy_delay);
  read(j, "tau", t.tau);
  read(j, "actor_lr", t.actor_lr);
  read(j, "critic_lr", t.critic_lr);
  read(j, "n_step", t.n_step);
  read(j, "bootstrap_time_limit", t.bootstrap_time_limit);
  read(j, "buffer_size", t.buffer_size);
  read(j, "warmup_steps", t.warmup_steps);
  read(j, "total_steps", t.total_steps);
  read(j, "updates_per_step", t.updates_per_step);
  read(j, "eval_interval", t.eval_interval);
  read(j, "eval_episodes", t.eval_episodes);
  read(j, "eval_seed", t.eval_seed);
}

json trainer_json(const marl::TrainerConfig& t) {
  return {{"gamma", t.gamma},
          {"batch_size", t.batch_size},
          {"hidden", t.hidden},
          {"explore_noise", t.explore_noise},
          {"policy_noise", t.policy_noise},
          {"noise_clip", t.noise_clip},
          {"policy_delay", t.policy_delay},
          {"tau", t.tau},
          {"actor_lr", t.actor_lr},
          {"critic_lr", t.critic_lr},
          {"n_step", t.n_step},
          {"bootstrap_time_limit", t.bootstrap_time_limit},
          {"buffer_size", t.buffer_size},
          {"warmup_steps", t.warmup_steps},
          {"total_steps", t.total_steps},
          {"updates_per_step", t.updates_per_step},
          {"eval_interval", t.eval_interval},
          {"eval_episodes", t.eval_episodes},
          {"eval_seed", t.eval_seed}};
}

}  // namespace

void RunConfig::validate() const {
  if (env_id != "spread" && env_id != "solo_nav") {
    throw ConfigError("env.id must be 'spread' or 'solo_nav', got '" + env_id + "'");
  }
  if (agents() == 0) throw ConfigError("env.n_agents must be positive");
  trainer.validate();
  if (!(fusion.strength >= 0.0)) throw ConfigError("fusion.L must be >= 0");
  if (!(fusion.gumbel_temperature > 0.0)) {
    throw ConfigError("fusion.gumbel_temperature must be positive");
  }
  if (bc.batch_size == 0) throw ConfigError("bc.batch_size must be positive");
  if (!(bc.learning_rate > 0.0)) throw ConfigError("bc.learning_rate must be positive");
  if (expert_eval_episodes == 0) throw ConfigError("demos.expert_eval_episodes must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (layout) {
    layout->validate();
    const envs::SpreadWorld probe(agents());
    if (layout->observation_width() != probe.obs_width()) {
      throw ConfigError("layout width does not match the environment observation width");
    }
  }
}

marl::MarlSetup RunConfig::marl_setup(std::uint64_t seed) const {
  marl::MarlSetup setup;
  setup.n_agents = agents();
  setup.kind = soco ? marl::PolicyKind::kSoco : marl::PolicyKind::kVanilla;
  setup.fusion = fusion;
  setup.fusion.hidden = trainer.hidden;
  setup.layout = layout;
  setup.trainer = trainer;
  setup.trainer.seed = seed;
  return setup;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    reject_unknown(j, {"stage", "env", "trainer", "fusion", "layout", "bc", "demos", "paths", "seeds"},
                   "config");
    read(j, "stage", c.stage);
    if (j.contains("env")) {
      const auto& e = j["env"];
      reject_unknown(e, {"id", "n_agents"}, "env");
      read(e, "id", c.env_id);
      read(e, "n_agents", c.n_agents);
    }
    if (j.contains("trainer")) read_trainer(j["trainer"], c.trainer);
    if (j.contains("fusion")) {
      const auto& f = j["fusion"];
      reject_unknown(f, {"enabled", "L", "gating", "clip", "gumbel_temperature"}, "fusion");
      read(f, "enabled", c.soco);
      read(f, "L", c.fusion.strength);
      if (f.contains("gating")) c.fusion.gating = fusion::parse_gating_mode(f["gating"].get<std::string>());
      if (f.contains("clip")) c.fusion.clip = fusion::parse_clip_mode(f["clip"].get<std::string>());
      read(f, "gumbel_temperature", c.fusion.gumbel_temperature);
    }
    if (j.contains("layout") && !j["layout"].is_null()) c.layout = decomp::layout_from_json(j["layout"]);
    if (j.contains("bc")) {
      const auto& b = j["bc"];
      reject_unknown(b, {"steps", "batch_size", "learning_rate"}, "bc");
      read(b, "steps", c.bc.steps);
      read(b, "batch_size", c.bc.batch_size);
      read(b, "learning_rate", c.bc.learning_rate);
    }
    if (j.contains("demos")) {
      const auto& d = j["demos"];
      reject_unknown(d, {"count", "expert_eval_episodes"}, "demos");
      read(d, "count", c.demo_count);
      read(d, "expert_eval_episodes", c.expert_eval_episodes);
    }
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      reject_unknown(p, {"expert", "demos", "solo", "checkpoint", "metrics_dir"}, "paths");
      read(p, "expert", c.paths.expert);
      read(p, "demos", c.paths.demos);
      read(p, "solo", c.paths.solo);
      read(p, "checkpoint", c.paths.checkpoint);
      read(p, "metrics_dir", c.paths.metrics_dir);
    }
    read(j, "seeds", c.seeds);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {
      {"stage", c.stage},
      {"env", {{"id", c.env_id}, {"n_agents", c.n_agents}}},
      {"trainer", trainer_json(c.trainer)},
      {"fusion",
       {{"enabled", c.soco},
        {"L", c.fusion.strength},
        {"gating", fusion::to_string(c.fusion.gating)},
        {"clip", fusion::to_string(c.fusion.clip)},
        {"gumbel_temperature", c.fusion.gumbel_temperature}}},
      {"bc",
       {{"steps", c.bc.steps}, {"batch_size", c.bc.batch_size}, {"learning_rate", c.bc.learning_rate}}},
      {"demos", {{"count", c.demo_count}, {"expert_eval_episodes", c.expert_eval_episodes}}},
      {"paths",
       {{"expert", c.paths.expert},
        {"demos", c.paths.demos},
        {"solo", c.paths.solo},
        {"checkpoint", c.paths.checkpoint},
        {"metrics_dir", c.paths.metrics_dir}}},
      {"seeds", c.seeds},
  };
  if (c.layout) j["layout"] = decomp::layout_to_json(*c.layout);
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace soco::cli
