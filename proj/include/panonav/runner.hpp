#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "panonav/controller.hpp"
#include "panonav/decision.hpp"
#include "panonav/error.hpp"
#include "panonav/llm_client.hpp"
#include "panonav/memory.hpp"
#include "panonav/metrics.hpp"
#include "panonav/perception.hpp"
#include "panonav/priors.hpp"
#include "panonav/remote_backend.hpp"
#include "panonav/rng.hpp"
#include "panonav/trajectory.hpp"
#include "panonav/world.hpp"
#include "panonav/world_gen.hpp"

namespace panonav {

struct EpisodeConfig {
  std::string world_file;  // when empty the generator below is used
  uint64_t gen_seed = 0;
  GeneratorParams gen;
  std::string target;  // empty: use the world's own target category
  std::string backend = "heuristic";  // oracle | heuristic | remote
  bool memory_enabled = true;
  int queue_capacity = 5;
  int views = 6;
  int leg_length = 5;
  int max_steps = 500;
  double success_threshold_m = 1.0;
  double escape_radius_m = 3.0;
  uint64_t seed = 0;
  bool randomize_start = true;
  double max_range_m = 5.0;
  int scaffold_rows = 6;
  int scaffold_cols = 6;
  int richness_cap = 8;
  PriorWeights weights;
  std::string priors_file;
  std::string prompt_mode = "decoupled";  // decoupled | one_step
  std::string llm_mode = "live";          // live | replay
  std::string transcript_in;
  std::string transcript_out;
  std::string prompt_dir;
};

inline void validate_config(const EpisodeConfig& cfg) {
  require(cfg.views == 3 || cfg.views == 6, Errc::invalid_input, "views must be 3 or 6");
  require(cfg.max_steps >= 1, Errc::invalid_input, "max_steps must be at least 1");
  require(cfg.queue_capacity >= 1, Errc::invalid_input, "queue capacity must be at least 1");
  require(cfg.leg_length >= 1, Errc::invalid_input, "leg length must be at least 1");
  require(cfg.success_threshold_m > 0, Errc::invalid_input, "success threshold must be positive");
  require(cfg.escape_radius_m >= 0, Errc::invalid_input, "escape radius must be nonnegative");
  require(cfg.max_range_m > 0, Errc::invalid_input, "visibility range must be positive");
  require(cfg.scaffold_rows >= 1 && cfg.scaffold_cols >= 1, Errc::invalid_input,
          "scaffold dimensions must be positive");
  require(cfg.richness_cap >= 1, Errc::invalid_input, "richness cap must be positive");
  require(cfg.backend == "oracle" || cfg.backend == "heuristic" || cfg.backend == "remote",
          Errc::invalid_input, "backend must be oracle, heuristic, or remote");
  require(cfg.prompt_mode == "decoupled" || cfg.prompt_mode == "one_step", Errc::invalid_input,
          "prompt mode must be decoupled or one_step");
  require(cfg.llm_mode == "live" || cfg.llm_mode == "replay", Errc::invalid_input,
          "llm mode must be live or replay");
  for (double w : {cfg.weights.like, cfg.weights.prior, cfg.weights.rich, cfg.weights.memory})
    require(w >= 0.0 && std::isfinite(w), Errc::invalid_input,
            "scoring weights must be finite and nonnegative");
}

inline nlohmann::ordered_json config_to_json(const EpisodeConfig& c) {
  nlohmann::ordered_json j;
  j["world_file"] = c.world_file;
  j["gen_seed"] = c.gen_seed;
  j["gen"] = {{"width", c.gen.width},
              {"height", c.gen.height},
              {"rooms", c.gen.rooms},
              {"cell_size", c.gen.cell_size},
              {"target", c.gen.target},
              {"deceptive", c.gen.deceptive},
              {"door_width", c.gen.door_width},
              {"min_room_span", c.gen.min_room_span}};
  j["target"] = c.target;
  j["backend"] = c.backend;
  j["memory"] = c.memory_enabled;
  j["queue_capacity"] = c.queue_capacity;
  j["views"] = c.views;
  j["leg_length"] = c.leg_length;
  j["max_steps"] = c.max_steps;
  j["success_threshold_m"] = c.success_threshold_m;
  j["escape_radius_m"] = c.escape_radius_m;
  j["seed"] = c.seed;
  j["randomize_start"] = c.randomize_start;
  j["max_range_m"] = c.max_range_m;
  j["scaffold_rows"] = c.scaffold_rows;
  j["scaffold_cols"] = c.scaffold_cols;
  j["richness_cap"] = c.richness_cap;
  j["weights"] = {{"like", c.weights.like},
                  {"prior", c.weights.prior},
                  {"rich", c.weights.rich},
                  {"memory", c.weights.memory}};
  j["priors_file"] = c.priors_file;
  j["prompt_mode"] = c.prompt_mode;
  j["llm_mode"] = c.llm_mode;
  j["transcript_in"] = c.transcript_in;
  j["transcript_out"] = c.transcript_out;
  j["prompt_dir"] = c.prompt_dir;
  return j;
}

inline EpisodeConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "world_file", "gen_seed", "gen", "target", "backend", "memory", "queue_capacity",
      "views", "leg_length", "max_steps", "success_threshold_m", "escape_radius_m", "seed",
      "randomize_start", "max_range_m", "scaffold_rows", "scaffold_cols", "richness_cap",
      "weights", "priors_file", "prompt_mode", "llm_mode", "transcript_in", "transcript_out",
      "prompt_dir"};
  require(j.is_object(), Errc::invalid_input, "config must be an object");
  for (const auto& [key, _] : j.items())
    require(std::find(known.begin(), known.end(), key) != known.end(), Errc::invalid_input,
            "unknown config key: " + key);
  EpisodeConfig c;
  try {
    c.world_file = j.value("world_file", c.world_file);
    c.gen_seed = j.value("gen_seed", c.gen_seed);
    if (j.contains("gen")) {
      const auto& g = j["gen"];
      c.gen.width = g.value("width", c.gen.width);
      c.gen.height = g.value("height", c.gen.height);
      c.gen.rooms = g.value("rooms", c.gen.rooms);
      c.gen.cell_size = g.value("cell_size", c.gen.cell_size);
      c.gen.target = g.value("target", c.gen.target);
      c.gen.deceptive = g.value("deceptive", c.gen.deceptive);
      c.gen.door_width = g.value("door_width", c.gen.door_width);
      c.gen.min_room_span = g.value("min_room_span", c.gen.min_room_span);
    }
    c.target = j.value("target", c.target);
    c.backend = j.value("backend", c.backend);
    c.memory_enabled = j.value("memory", c.memory_enabled);
    c.queue_capacity = j.value("queue_capacity", c.queue_capacity);
    c.views = j.value("views", c.views);
    c.leg_length = j.value("leg_length", c.leg_length);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.success_threshold_m = j.value("success_threshold_m", c.success_threshold_m);
    c.escape_radius_m = j.value("escape_radius_m", c.escape_radius_m);
    c.seed = j.value("seed", c.seed);
    c.randomize_start = j.value("randomize_start", c.randomize_start);
    c.max_range_m = j.value("max_range_m", c.max_range_m);
    c.scaffold_rows = j.value("scaffold_rows", c.scaffold_rows);
    c.scaffold_cols = j.value("scaffold_cols", c.scaffold_cols);
    c.richness_cap = j.value("richness_cap", c.richness_cap);
    if (j.contains("weights")) {
      const auto& w = j["weights"];
      c.weights.like = w.value("like", c.weights.like);
      c.weights.prior = w.value("prior", c.weights.prior);
      c.weights.rich = w.value("rich", c.weights.rich);
      c.weights.memory = w.value("memory", c.weights.memory);
    }
    c.priors_file = j.value("priors_file", c.priors_file);
    c.prompt_mode = j.value("prompt_mode", c.prompt_mode);
    c.llm_mode = j.value("llm_mode", c.llm_mode);
    c.transcript_in = j.value("transcript_in", c.transcript_in);
    c.transcript_out = j.value("transcript_out", c.transcript_out);
    c.prompt_dir = j.value("prompt_dir", c.prompt_dir);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_input, std::string("malformed config: ") + e.what());
  }
  validate_config(c);
  return c;
}

struct EpisodeOutput {
  EpisodeResult result;
  TrajectoryLog log;
};

// Start pose used for this run: the world's start cell and room, reshuffled
// within the start room by the episode seed so repeated experiments differ.
inline Pose episode_start(const GridWorld& world, const EpisodeConfig& cfg,
                          const std::string& target) {
  Pose pose = world.start();
  if (!cfg.randomize_start) return pose;
  Rng rng = Rng(cfg.seed).fork(0xa11ce);
  int room_id = world.room_id_at(pose.cell);
  require(room_id >= 0, Errc::contract, "world start outside any room");
  auto field = world.distance_field(world.category_cells(target));
  std::vector<Cell> candidates;
  for (Cell c : world.room(room_id).cells)
    if (field[c.y * world.width() + c.x] > 0) candidates.push_back(c);
  require(!candidates.empty(), Errc::invalid_input,
          "no start cell in the start room has a path to the target");
  pose.cell = candidates[rng.below(candidates.size())];
  pose.heading = 30 * rng.range(0, 11);
  pose.pitch = 0;
  return pose;
}

// One episode of the waypoint loop: look around, parse, summarize, decide
// with the memory gate, push the summary, walk the leg. The queue snapshot
// in the log is what the decider saw, taken before the push.
inline EpisodeOutput run_episode_core(const EpisodeConfig& cfg, const GridWorld& world,
                                      ParserBackend& parser, Policy& policy,
                                      const std::string& target, Pose start_pose) {
  validate_config(cfg);
  world.validate_pose(start_pose);
  auto ell = world.distance_to_nearest(start_pose.cell, target);
  require(ell.has_value(), Errc::unreachable, "target unreachable from start: invalid episode");
  require(*ell > 0.0, Errc::invalid_input, "episode starts on the target");

  ControllerConfig ctrl;
  ctrl.leg_length = cfg.leg_length;
  ctrl.success_threshold_m = cfg.success_threshold_m;
  ctrl.sight_range_m = cfg.max_range_m;
  ctrl.target_category = target;
  PanoramaOptions pano{cfg.max_range_m};

  TrajectoryLog log;
  log.config = config_to_json(cfg);
  log.world_hash = to_hex(world.content_hash());
  log.start = start_pose;

  MemoryQueue queue(static_cast<size_t>(cfg.queue_capacity));
  Pose pose = start_pose;
  int steps_total = 0;
  double rho = 0.0;
  bool stop_issued = false;

  for (int t = 1; steps_total < cfg.max_steps; ++t) {
    policy.set_pose(pose);
    auto views = capture_panorama(world, pose, pano);
    if (cfg.views == 3) mask_to_limited(views);
    std::vector<LocalDescription> lds;
    for (const auto& view : views) {
      ScaffoldGrid m = scaffold(view, cfg.max_range_m, cfg.scaffold_rows, cfg.scaffold_cols);
      lds.push_back(parser.parse_local(view, m, target));
    }
    GlobalSummary gs = parser.summarize(lds, t);

    LoggedWaypoint wp;
    wp.index = t;
    wp.pose = pose;
    for (const auto& ld : lds) wp.sectors.push_back(SectorDigest::from(ld));
    wp.summary = SummaryDigest::from(gs);
    for (const auto& entry : queue.snapshot())
      wp.queue_before.push_back(SummaryDigest::from(entry));

    DecisionResult decision = decide(policy, lds, gs, queue, cfg.memory_enabled);
    queue.push(gs);

    int budget = cfg.max_steps - steps_total;
    LegResult leg = execute_leg(world, pose, decision, budget, ctrl);

    wp.decision = decision;
    wp.budget_left = budget;
    for (const auto& s : leg.steps) {
      ++steps_total;
      wp.steps.push_back({steps_total, s.action, s.pose_after, s.outcome});
    }
    wp.terminated = leg.terminated;
    log.waypoints.push_back(std::move(wp));

    rho += leg.path_length_m(world.cell_size());
    pose = leg.end_pose;
    if (leg.terminated == LegTermination::StoppedAtTarget) {
      stop_issued = true;
      break;
    }
  }

  auto final_dts = world.distance_to_nearest(pose.cell, target);
  require(final_dts.has_value(), Errc::contract, "agent left the start component");
  auto start_final = world.shortest_path_length(start_pose.cell, pose.cell);
  require(start_final.has_value(), Errc::contract, "agent left the start component");

  EpisodeResult r;
  r.ell_m = *ell;
  r.rho_m = rho;
  r.final_dts_m = *final_dts;
  r.start_final_m = *start_final;
  r.steps = steps_total;
  r.s = (stop_issued && *final_dts <= cfg.success_threshold_m) ? 1 : 0;
  r.escaped = *start_final > cfg.escape_radius_m;

  log.result = {{"s", r.s},
                {"rho", r.rho_m},
                {"ell", r.ell_m},
                {"final_dts", r.final_dts_m},
                {"start_final", r.start_final_m},
                {"escaped", r.escaped},
                {"steps", r.steps},
                {"stop_issued", stop_issued}};
  return {r, std::move(log)};
}

inline EpisodeOutput run_remote_episode(const EpisodeConfig& cfg, const GridWorld& world,
                                        const std::string& target, Pose start_pose,
                                        LlmClient& client, const PriorTable& priors) {
  PromptLibrary lib = PromptLibrary::builtin();
  if (!cfg.prompt_dir.empty()) lib.load_dir(cfg.prompt_dir);
  PromptMode mode =
      cfg.prompt_mode == "one_step" ? PromptMode::one_step : PromptMode::decoupled;
  RemotePolicy policy(&client, target, mode, lib, priors, cfg.weights);
  if (mode == PromptMode::decoupled) {
    RemoteParser parser(&client, lib, priors, cfg.richness_cap);
    return run_episode_core(cfg, world, parser, policy, target, start_pose);
  }
  MechanicalParser parser(cfg.richness_cap);
  return run_episode_core(cfg, world, parser, policy, target, start_pose);
}

// Backend wiring against an already constructed world.
inline EpisodeOutput run_on_world(const EpisodeConfig& cfg, const GridWorld& world,
                                  const PriorTable& priors) {
  validate_config(cfg);
  std::string target = cfg.target.empty() ? world.target_category() : cfg.target;
  require(!world.category_cells(target).empty(), Errc::invalid_input,
          "world contains no instance of target: " + target);
  Pose start = episode_start(world, cfg, target);

  if (cfg.backend == "oracle") {
    OracleParser parser(priors, cfg.richness_cap);
    OraclePolicy policy(world, target);
    return run_episode_core(cfg, world, parser, policy, target, start);
  }
  if (cfg.backend == "heuristic") {
    OracleParser parser(priors, cfg.richness_cap);
    HeuristicPolicy policy(target, priors, cfg.weights);
    return run_episode_core(cfg, world, parser, policy, target, start);
  }

  LlmClient::Options opts = LlmClient::options_from_env(
      cfg.llm_mode == "replay" ? LlmClient::Mode::replay : LlmClient::Mode::live);
  LlmClient client(opts);
  Transcript replay_source;
  Transcript recording;
  if (cfg.llm_mode == "replay") {
    require(!cfg.transcript_in.empty(), Errc::invalid_input,
            "replay mode needs transcript_in");
    replay_source = Transcript::load(cfg.transcript_in);
    client.replay_from(&replay_source);
  } else if (!cfg.transcript_out.empty()) {
    client.record_to(&recording);
  }
  EpisodeOutput out = run_remote_episode(cfg, world, target, start, client, priors);
  if (cfg.llm_mode != "replay" && !cfg.transcript_out.empty())
    recording.save(cfg.transcript_out);
  return out;
}

inline PriorTable priors_from_config(const EpisodeConfig& cfg) {
  return cfg.priors_file.empty() ? PriorTable::builtin() : PriorTable::load_csv(cfg.priors_file);
}

inline GridWorld world_from_config(const EpisodeConfig& cfg, const PriorTable& priors) {
  if (!cfg.world_file.empty()) return GridWorld::load(cfg.world_file);
  return generate_world(cfg.gen_seed, cfg.gen, priors);
}

inline EpisodeOutput run_episode(const EpisodeConfig& cfg) {
  validate_config(cfg);
  PriorTable priors = priors_from_config(cfg);
  GridWorld world = world_from_config(cfg, priors);
  return run_on_world(cfg, world, priors);
}

// Re-executes the logged decisions through the controller and recomputes
// every metric from scratch; any divergence from the recorded poses is a
// corrupt or mismatched log.
inline EpisodeResult replay_episode(const GridWorld& world, const TrajectoryLog& log) {
  require(log.world_hash == to_hex(world.content_hash()), Errc::invalid_input,
          "trajectory log does not belong to this world");
  EpisodeConfig cfg = config_from_json(log.config);
  std::string target = cfg.target.empty() ? world.target_category() : cfg.target;
  ControllerConfig ctrl;
  ctrl.leg_length = cfg.leg_length;
  ctrl.success_threshold_m = cfg.success_threshold_m;
  ctrl.sight_range_m = cfg.max_range_m;
  ctrl.target_category = target;

  Pose pose = log.start;
  double rho = 0.0;
  int steps = 0;
  bool stop_issued = false;
  for (const auto& wp : log.waypoints) {
    require(wp.pose == pose, Errc::invalid_input, "replay mismatch: waypoint pose diverged");
    LegResult leg = execute_leg(world, pose, wp.decision, wp.budget_left, ctrl);
    require(leg.steps.size() == wp.steps.size(), Errc::invalid_input,
            "replay mismatch: step count diverged");
    for (size_t i = 0; i < leg.steps.size(); ++i) {
      const auto& a = leg.steps[i];
      const auto& b = wp.steps[i];
      require(a.action == b.action && a.pose_after == b.pose_after &&
                  a.outcome.moved == b.outcome.moved && a.outcome.blocked == b.outcome.blocked &&
                  a.outcome.stopped == b.outcome.stopped,
              Errc::invalid_input, "replay mismatch: step diverged");
    }
    require(leg.terminated == wp.terminated, Errc::invalid_input,
            "replay mismatch: leg termination diverged");
    pose = leg.end_pose;
    rho += leg.path_length_m(world.cell_size());
    steps += static_cast<int>(leg.steps.size());
    stop_issued = stop_issued || leg.terminated == LegTermination::StoppedAtTarget;
  }

  auto ell = world.distance_to_nearest(log.start.cell, target);
  require(ell.has_value() && *ell > 0.0, Errc::invalid_input, "invalid episode in log");
  auto final_dts = world.distance_to_nearest(pose.cell, target);
  auto start_final = world.shortest_path_length(log.start.cell, pose.cell);
  require(final_dts.has_value() && start_final.has_value(), Errc::invalid_input,
          "replayed endpoint disconnected from start");

  EpisodeResult r;
  r.ell_m = *ell;
  r.rho_m = rho;
  r.final_dts_m = *final_dts;
  r.start_final_m = *start_final;
  r.steps = steps;
  r.s = (stop_issued && *final_dts <= cfg.success_threshold_m) ? 1 : 0;
  r.escaped = *start_final > cfg.escape_radius_m;
  return r;
}

struct WorldSpec {
  uint64_t seed = 0;
  GeneratorParams params;
};

struct SuiteCondition {
  std::string name;
  std::function<void(EpisodeConfig&)> tweak;
};

struct SuiteSpec {
  EpisodeConfig base;
  std::vector<WorldSpec> worlds;
  std::vector<uint64_t> episode_seeds;
  std::vector<SuiteCondition> conditions;
};

struct EpisodeCell {
  std::string condition;
  uint64_t world_seed = 0;
  uint64_t episode_seed = 0;
  EpisodeResult result;
};

struct ConditionReport {
  std::string name;
  MetricsReport report;
  std::vector<EpisodeResult> results;
};

struct BenchmarkOutput {
  std::vector<ConditionReport> conditions;
  std::vector<EpisodeCell> cells;
  int invalid = 0;
  std::vector<std::string> errors;
};

inline BenchmarkOutput run_benchmark(const SuiteSpec& spec) {
  size_t cell_count = spec.worlds.size() * spec.episode_seeds.size() * spec.conditions.size();
  require(cell_count >= 1, Errc::invalid_input, "benchmark suite has no cells");
  PriorTable priors = priors_from_config(spec.base);

  std::vector<GridWorld> worlds;
  worlds.reserve(spec.worlds.size());
  for (const auto& w : spec.worlds) worlds.push_back(generate_world(w.seed, w.params, priors));

  BenchmarkOutput out;
  for (const auto& cond : spec.conditions) {
    ConditionReport report;
    report.name = cond.name;
    for (size_t wi = 0; wi < worlds.size(); ++wi) {
      for (uint64_t seed : spec.episode_seeds) {
        EpisodeConfig cfg = spec.base;
        cfg.world_file.clear();
        cfg.gen_seed = spec.worlds[wi].seed;
        cfg.gen = spec.worlds[wi].params;
        cfg.target.clear();
        cfg.seed = seed;
        cond.tweak(cfg);
        try {
          EpisodeOutput ep = run_on_world(cfg, worlds[wi], priors);
          report.results.push_back(ep.result);
          out.cells.push_back({cond.name, spec.worlds[wi].seed, seed, ep.result});
        } catch (const Error& e) {
          if (e.code() != Errc::invalid_input && e.code() != Errc::unreachable) throw;
          ++out.invalid;
          out.errors.push_back(cond.name + "/world" + std::to_string(spec.worlds[wi].seed) +
                               "/seed" + std::to_string(seed) + ": " + e.what());
        }
      }
    }
    require(!report.results.empty(), Errc::invalid_input,
            "no valid episodes in condition " + cond.name);
    report.report = aggregate(report.results);
    out.conditions.push_back(std::move(report));
  }
  return out;
}

// Five deceptive floor plans, ten start shuffles each, memory on versus off.
inline SuiteSpec deadlock_suite() {
  SuiteSpec spec;
  spec.base.backend = "heuristic";
  spec.base.views = 6;
  spec.base.max_steps = 800;
  spec.base.queue_capacity = 8;
  spec.base.weights.rich = 0.6;
  spec.base.escape_radius_m = 4.5;
  static const char* targets[5] = {"sofa", "bed", "fridge", "toilet", "desk"};
  static const uint64_t seeds[5] = {101, 102, 103, 104, 105};
  for (int i = 0; i < 5; ++i) {
    WorldSpec w;
    w.seed = seeds[i];
    w.params.deceptive = true;
    w.params.target = targets[i];
    w.params.width = 39;
    w.params.height = 15;
    w.params.rooms = 4;
    w.params.min_room_span = 6;
    spec.worlds.push_back(w);
  }
  for (uint64_t s = 1; s <= 10; ++s) spec.episode_seeds.push_back(s);
  spec.conditions.push_back({"memory", [](EpisodeConfig& c) { c.memory_enabled = true; }});
  spec.conditions.push_back({"no_memory", [](EpisodeConfig& c) { c.memory_enabled = false; }});
  return spec;
}

// Ten ordinary floor plans, five start shuffles each, full panorama versus
// the three forward sectors.
inline SuiteSpec ablation_views_suite() {
  SuiteSpec spec;
  spec.base.backend = "heuristic";
  spec.base.memory_enabled = true;
  static const char* targets[10] = {"sofa", "bed",      "fridge",  "toilet", "desk",
                                    "tv",   "wardrobe", "bathtub", "oven",   "sink"};
  for (int i = 0; i < 10; ++i) {
    WorldSpec w;
    w.seed = 201 + static_cast<uint64_t>(i);
    w.params.deceptive = false;
    w.params.target = targets[i];
    spec.worlds.push_back(w);
  }
  for (uint64_t s = 1; s <= 5; ++s) spec.episode_seeds.push_back(s);
  spec.conditions.push_back({"panorama", [](EpisodeConfig& c) { c.views = 6; }});
  spec.conditions.push_back({"limited", [](EpisodeConfig& c) { c.views = 3; }});
  return spec;
}

}  // namespace panonav
