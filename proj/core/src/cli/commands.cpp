#include "soco/cli/commands.hpp"

#include <algorithm>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "soco/cli/checkpoint.hpp"
#include "soco/cli/config.hpp"
#include "soco/cli/metrics.hpp"
#include "soco/demos/behavior_cloning.hpp"
#include "soco/demos/demo_dataset.hpp"
#include "soco/error.hpp"
#include "soco/marl/evaluate.hpp"
#include "soco/numerics/hash.hpp"

namespace soco::cli {
namespace {

using nlohmann::json;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> steps;
  std::string out;
  std::string input;
  std::string metrics_dir;
  std::optional<std::size_t> count;
  std::optional<std::size_t> episodes;
  bool soco = false;
  std::optional<double> strength;
  std::string gating;
  std::string clip;
};

RunConfig resolve_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.seeds = {*o.seed};
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.steps) c.trainer.total_steps = *o.steps;
  if (!o.metrics_dir.empty()) c.paths.metrics_dir = o.metrics_dir;
  if (o.count) c.demo_count = *o.count;
  if (o.episodes) c.trainer.eval_episodes = *o.episodes;
  if (o.soco) c.soco = true;
  if (o.strength) c.fusion.strength = *o.strength;
  if (!o.gating.empty()) c.fusion.gating = fusion::parse_gating_mode(o.gating);
  if (!o.clip.empty()) c.fusion.clip = fusion::parse_clip_mode(o.clip);
  c.validate();
  return c;
}

// "runs/marl.ckpt" -> "runs/marl.seed3.ckpt" when several seeds share a path.
std::filesystem::path per_seed(const std::filesystem::path& p, std::uint64_t seed, bool multi) {
  if (!multi) return p;
  auto out = p;
  out.replace_filename(p.stem().string() + ".seed" + std::to_string(seed) + p.extension().string());
  return out;
}

std::filesystem::path metrics_path(const RunConfig& c, const std::string& stem, std::uint64_t seed) {
  return std::filesystem::path(c.paths.metrics_dir) / (stem + "_seed" + std::to_string(seed) + ".csv");
}

json eval_json(const marl::EvalResult& r) {
  return {{"mean_return", r.mean_return},
          {"std_return", r.std_return},
          {"mean_edit_norm", r.mean_edit_norm},
          {"gating_entropy", r.gating_entropy},
          {"episodes", r.episode_returns.size()}};
}

std::shared_ptr<demos::SoloPolicy> solo_from_checkpoint(const Checkpoint& ckpt) {
  auto solo = std::make_shared<demos::SoloPolicy>(ckpt.read_net("solo", numerics::OutputHead::kTanh));
  solo->freeze();
  const std::string stored = ckpt.trailer.value("solo_hash", std::string{});
  if (stored != solo->hash()) {
    throw HashMismatchError("solo parameters hash to " + solo->hash() + " but the trailer records '" +
                            stored + "'");
  }
  return solo;
}

void add_learner(Checkpoint& ckpt, marl::LearnerState& learner) {
  for (std::size_t i = 0; i < learner.actors.size(); ++i) {
    const std::string agent = "agent" + std::to_string(i);
    for (const auto& n : learner.actors[i]->nets()) ckpt.add_net(agent + "." + n.name, *n.net);
    for (const auto& n : learner.target_actors[i]->nets()) {
      ckpt.add_net("target." + agent + "." + n.name, *n.net);
    }
  }
  ckpt.add_net("critic.q1", learner.critics.q1);
  ckpt.add_net("critic.q2", learner.critics.q2);
  ckpt.add_net("critic.target1", learner.critics.target1);
  ckpt.add_net("critic.target2", learner.critics.target2);
}

// Rebuilds online actors from a train-solo or train-marl checkpoint.
struct LoadedPolicy {
  std::vector<std::unique_ptr<marl::Actor>> actors;
  std::size_t n_agents = 1;
  RunConfig config;
};

LoadedPolicy policy_from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.trailer.contains("config") || !ckpt.trailer.contains("kind")) {
    throw FormatError("checkpoint trailer lacks config or kind");
  }
  LoadedPolicy out;
  out.config = config_from_json(ckpt.trailer["config"]);
  const auto kind = ckpt.trailer["kind"].get<std::string>();
  if (kind == "solo") {
    out.actors.push_back(std::make_unique<marl::MlpActor>(solo_from_checkpoint(ckpt)->net()));
    return out;
  }
  if (kind != "marl" && kind != "expert") throw FormatError("unknown checkpoint kind '" + kind + "'");
  auto setup = out.config.marl_setup(out.config.seeds.front());
  if (setup.kind == marl::PolicyKind::kSoco) setup.solo = solo_from_checkpoint(ckpt);
  Rng rng(0);
  auto learner = marl::make_learner(setup, rng);
  for (std::size_t i = 0; i < learner.actors.size(); ++i) {
    for (const auto& n : learner.actors[i]->nets()) {
      ckpt.load_net("agent" + std::to_string(i) + "." + n.name, *n.net);
    }
  }
  out.actors = std::move(learner.actors);
  out.n_agents = setup.n_agents;
  return out;
}

std::vector<const marl::Actor*> views(const std::vector<std::unique_ptr<marl::Actor>>& actors) {
  std::vector<const marl::Actor*> v;
  for (const auto& a : actors) v.push_back(a.get());
  return v;
}

// --- stages ---------------------------------------------------------------

json train_solo(const Options& o) {
  RunConfig c = resolve_config(o);
  c.env_id = "solo_nav";
  c.soco = false;
  const bool multi = c.seeds.size() > 1;
  json runs = json::array();
  for (const auto seed : c.seeds) {
    auto setup = c.marl_setup(seed);
    MetricsWriter metrics(metrics_path(c, "solo", seed));
    auto result = marl::train_marl(setup, [&](const marl::MetricsRow& row) { metrics.write(row); });
    metrics.finish();

    RunConfig snapshot = c;
    snapshot.seeds = {seed};
    Checkpoint ckpt;
    add_learner(ckpt, result.learner);
    ckpt.trailer = {{"kind", "expert"},
                    {"config", config_to_json(snapshot)},
                    {"step", c.trainer.total_steps},
                    {"solo_hash", ""},
                    {"final_return", result.history.back().mean_return}};
    const auto path = per_seed(o.out.empty() ? c.paths.expert : o.out, seed, multi);
    save_checkpoint(path, ckpt);
    runs.push_back({{"seed", seed},
                    {"checkpoint", path.string()},
                    {"final_return", result.history.back().mean_return}});
  }
  return {{"stage", "train-solo"}, {"runs", runs}};
}

json collect_demos_stage(const Options& o) {
  const RunConfig c = resolve_config(o);
  const auto ckpt = load_checkpoint(o.input.empty() ? c.paths.expert : o.input);
  const auto expert = ckpt.read_net("agent0.actor", numerics::OutputHead::kTanh);
  auto env = envs::make_solo_nav();
  const auto report = demos::collect_demos(expert, env, c.demo_count, c.seeds.front());
  const auto path = o.out.empty() ? c.paths.demos : o.out;
  demos::save_demos(path, report.dataset);

  const marl::MlpActor actor(expert);
  const auto eval = marl::evaluate({&actor}, 1, envs::SpreadParams{}, c.expert_eval_episodes,
                                   c.trainer.eval_seed);
  return {{"stage", "collect-demos"},
          {"demos", path},
          {"count", report.dataset.size()},
          {"complete_episodes", report.complete_episodes},
          {"mean_episode_return", report.mean_episode_return},
          {"expert_eval", eval_json(eval)}};
}

json train_bc_stage(const Options& o) {
  const RunConfig c = resolve_config(o);
  const auto data = demos::load_demos(o.input.empty() ? c.paths.demos : o.input);
  const auto seed = c.seeds.front();
  Rng init(derive_seed(seed, 4));
  demos::SoloPolicy solo(data.obs_width, data.act_width, c.trainer.hidden, init);
  const auto report = demos::train_bc(solo, data, c.bc, seed);
  solo.freeze();

  Checkpoint ckpt;
  ckpt.add_net("solo", solo.net());
  RunConfig snapshot = c;
  snapshot.env_id = "solo_nav";
  snapshot.seeds = {seed};
  ckpt.trailer = {{"kind", "solo"},
                  {"config", config_to_json(snapshot)},
                  {"step", c.bc.steps},
                  {"solo_hash", solo.hash()},
                  {"bc", {{"initial_loss", report.initial_loss}, {"final_loss", report.final_loss}}}};
  const auto path = o.out.empty() ? c.paths.solo : o.out;
  save_checkpoint(path, ckpt);

  const marl::MlpActor actor(solo.net());
  const auto eval = marl::evaluate({&actor}, 1, envs::SpreadParams{}, c.expert_eval_episodes,
                                   c.trainer.eval_seed);
  return {{"stage", "train-bc"},
          {"solo", path},
          {"solo_hash", solo.hash()},
          {"initial_loss", report.initial_loss},
          {"final_loss", report.final_loss},
          {"clone_eval", eval_json(eval)}};
}

json train_marl_stage(const Options& o) {
  const RunConfig c = resolve_config(o);
  std::shared_ptr<demos::SoloPolicy> solo;
  if (c.soco) solo = solo_from_checkpoint(load_checkpoint(o.input.empty() ? c.paths.solo : o.input));

  const bool multi = c.seeds.size() > 1;
  json runs = json::array();
  std::vector<std::vector<marl::MetricsRow>> histories;
  for (const auto seed : c.seeds) {
    auto setup = c.marl_setup(seed);
    setup.solo = solo;
    MetricsWriter metrics(metrics_path(c, "marl", seed));
    auto result = marl::train_marl(setup, [&](const marl::MetricsRow& row) { metrics.write(row); });
    metrics.finish();
    if (solo && result.solo_hash_after != result.solo_hash_before) {
      throw HashMismatchError("solo policy changed during cooperative training");
    }

    RunConfig snapshot = c;
    snapshot.seeds = {seed};
    Checkpoint ckpt;
    add_learner(ckpt, result.learner);
    if (solo) ckpt.add_net("solo", solo->net());
    ckpt.trailer = {{"kind", "marl"},
                    {"config", config_to_json(snapshot)},
                    {"step", c.trainer.total_steps},
                    {"solo_hash", solo ? solo->hash() : std::string{}},
                    {"final_return", result.history.back().mean_return}};
    const auto path = per_seed(o.out.empty() ? c.paths.checkpoint : o.out, seed, multi);
    save_checkpoint(path, ckpt);
    runs.push_back({{"seed", seed},
                    {"checkpoint", path.string()},
                    {"final_return", result.history.back().mean_return}});
    histories.push_back(std::move(result.history));
  }
  if (multi) {
    write_aggregate(std::filesystem::path(c.paths.metrics_dir) / "marl_aggregate.csv",
                    aggregate_runs(histories));
  }
  return {{"stage", "train-marl"}, {"runs", runs}};
}

json eval_stage(const Options& o) {
  if (o.input.empty()) throw ConfigError("eval requires --checkpoint");
  const auto ckpt = load_checkpoint(o.input);
  const auto policy = policy_from_checkpoint(ckpt);
  const std::size_t episodes = o.episodes.value_or(policy.config.trainer.eval_episodes);
  const std::uint64_t seed = o.seed.value_or(policy.config.trainer.eval_seed);
  if (episodes == 0) throw ConfigError("--episodes must be positive");
  const auto eval = marl::evaluate(views(policy.actors), policy.n_agents, envs::SpreadParams{},
                                   episodes, seed);
  json j = eval_json(eval);
  j["stage"] = "eval";
  j["checkpoint"] = o.input;
  return j;
}

json demo_stats_stage(const Options& o) {
  std::string path = o.input;
  if (path.empty()) path = resolve_config(o).paths.demos;
  const auto stats = demos::demo_stats(demos::load_demos(path));
  json j = {{"stage", "demo-stats"}, {"demos", path}, {"count", stats.count}};
  j["action_mean"] = stats.action_mean ? json(*stats.action_mean) : json(nullptr);
  j["action_std"] = stats.action_std ? json(*stats.action_std) : json(nullptr);
  j["mean_episode_return"] = stats.mean_episode_return ? json(*stats.mean_episode_return) : json(nullptr);
  return j;
}

int fail(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}, {"exit", code}}.dump() << '\n';
  return code;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"soco: solo-to-collaborative multi-agent training pipeline", "soco"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--seed", o.seed, "Single seed (overrides the config seed list)");
  };
  auto* train_solo_cmd = app.add_subcommand("train-solo", "TD3 expert on SoloNav");
  common(train_solo_cmd);
  train_solo_cmd->add_option("--seeds", o.seeds, "Comma-separated seed list")->delimiter(',');
  train_solo_cmd->add_option("--steps", o.steps, "Training steps after warm-up");
  train_solo_cmd->add_option("--out", o.out, "Expert checkpoint path");
  train_solo_cmd->add_option("--metrics-dir", o.metrics_dir, "Metrics directory");

  auto* collect_cmd = app.add_subcommand("collect-demos", "Roll out the expert into a demo file");
  common(collect_cmd);
  collect_cmd->add_option("--expert", o.input, "Expert checkpoint path");
  collect_cmd->add_option("--count", o.count, "Number of (o, a) pairs");
  collect_cmd->add_option("--out", o.out, "Demo file path");

  auto* bc_cmd = app.add_subcommand("train-bc", "Behavior-clone the solo policy and freeze it");
  common(bc_cmd);
  bc_cmd->add_option("--demos", o.input, "Demo file path");
  bc_cmd->add_option("--out", o.out, "Solo checkpoint path");

  auto* marl_cmd = app.add_subcommand("train-marl", "MATD3, vanilla or with SoCo fusion");
  common(marl_cmd);
  marl_cmd->add_option("--seeds", o.seeds, "Comma-separated seed list")->delimiter(',');
  marl_cmd->add_option("--steps", o.steps, "Training steps after warm-up");
  marl_cmd->add_flag("--soco", o.soco, "Use fused SoCo policies");
  marl_cmd->add_option("--L", o.strength, "Action editor strength");
  marl_cmd->add_option("--gating", o.gating, "learned | rg | erg | fg");
  marl_cmd->add_option("--clip", o.clip, "tanh | norm | hard");
  marl_cmd->add_option("--solo", o.input, "Frozen solo checkpoint path");
  marl_cmd->add_option("--out", o.out, "Checkpoint path");
  marl_cmd->add_option("--metrics-dir", o.metrics_dir, "Metrics directory");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", o.input, "Checkpoint path")->required();
  eval_cmd->add_option("--episodes", o.episodes, "Evaluation episodes");
  eval_cmd->add_option("--seed", o.seed, "Evaluation seed");

  auto* stats_cmd = app.add_subcommand("demo-stats", "Summarize a demo file");
  stats_cmd->add_option("--config", o.config, "JSON run configuration");
  stats_cmd->add_option("--demos", o.input, "Demo file path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, kExitConfig, "config", e.what());
  }

  try {
    json result;
    if (*train_solo_cmd) result = train_solo(o);
    else if (*collect_cmd) result = collect_demos_stage(o);
    else if (*bc_cmd) result = train_bc_stage(o);
    else if (*marl_cmd) result = train_marl_stage(o);
    else if (*eval_cmd) result = eval_stage(o);
    else if (*stats_cmd) result = demo_stats_stage(o);
    out << result.dump() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    return fail(err, kExitConfig, e.kind(), e.what());
  } catch (const MissingArtifactError& e) {
    return fail(err, kExitMissingArtifact, e.kind(), e.what());
  } catch (const Error& e) {
    return fail(err, kExitRuntime, e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(err, kExitRuntime, "runtime", e.what());
  }
}

int run_command(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace soco::cli
