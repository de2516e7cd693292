#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "panonav/runner.hpp"
#include "panonav/svg.hpp"

namespace fs = std::filesystem;
using namespace panonav;

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::invalid_input, "cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::invalid_input, "cannot write file: " + path.string());
  out << content;
  out.flush();
  require(out.good(), Errc::invalid_input, "write failed: " + path.string());
}

EpisodeConfig load_config(const std::string& file) {
  if (file.empty()) return {};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(file));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_input, "config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

std::string result_header() { return "s,rho_m,ell_m,final_dts_m,start_final_m,escaped,steps"; }

std::string result_row(const EpisodeResult& r) {
  return std::to_string(r.s) + "," + to_fixed(r.rho_m, 2) + "," + to_fixed(r.ell_m, 2) + "," +
         to_fixed(r.final_dts_m, 2) + "," + to_fixed(r.start_final_m, 2) + "," +
         (r.escaped ? "1" : "0") + "," + std::to_string(r.steps);
}

void verify_logged_result(const TrajectoryLog& log, const EpisodeResult& r) {
  const auto& j = log.result;
  require(j.is_object(), Errc::invalid_input, "log lacks a result record");
  bool same = j.at("s").get<int>() == r.s && j.at("rho").get<double>() == r.rho_m &&
              j.at("ell").get<double>() == r.ell_m &&
              j.at("final_dts").get<double>() == r.final_dts_m &&
              j.at("start_final").get<double>() == r.start_final_m &&
              j.at("escaped").get<bool>() == r.escaped && j.at("steps").get<int>() == r.steps;
  require(same, Errc::invalid_input, "recomputed metrics differ from the logged result");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mapless object-goal navigation testbed"};
  app.require_subcommand(1);

  std::string config_file;
  std::string backend;
  std::string out_dir = ".";
  uint64_t seed = 0;
  bool memory_enabled = true;
  int views = 6;
  int capacity = 5;
  auto* config_opt = app.add_option("--config", config_file, "episode config file (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "seed (episode seed; world seed for gen)");
  auto* backend_opt = app.add_option("--backend", backend, "oracle | heuristic | remote")
                          ->check(CLI::IsMember({"oracle", "heuristic", "remote"}));
  auto* memory_opt =
      app.add_flag("--memory,!--no-memory", memory_enabled, "toggle memory guidance");
  auto* views_opt =
      app.add_option("--views", views, "sectors visible to the decider")->check(CLI::IsMember({3, 6}));
  auto* n_opt = app.add_option("--n", capacity, "memory queue capacity")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory");

  auto* gen_cmd = app.add_subcommand("gen", "generate a world file");
  gen_cmd->fallthrough();
  GeneratorParams gp;
  std::string gen_priors;
  gen_cmd->add_option("--width", gp.width, "grid width in cells");
  gen_cmd->add_option("--height", gp.height, "grid height in cells");
  gen_cmd->add_option("--rooms", gp.rooms, "room count");
  gen_cmd->add_option("--target", gp.target, "target object category");
  gen_cmd->add_flag("--deceptive", gp.deceptive, "start room chosen to mislead the prior");
  gen_cmd->add_option("--cell-size", gp.cell_size, "cell edge in meters");
  gen_cmd->add_option("--door-width", gp.door_width, "door width in cells");
  gen_cmd->add_option("--min-span", gp.min_room_span, "minimum room side in cells");
  gen_cmd->add_option("--priors", gen_priors, "prior table CSV used for object placement");

  auto* run_cmd = app.add_subcommand("run", "run one episode");
  run_cmd->fallthrough();
  std::string run_world, run_target, run_prompt_mode, run_llm_mode;
  std::string run_transcript_in, run_transcript_out, run_prompt_dir, run_priors;
  uint64_t run_gen_seed = 0;
  int run_max_steps = 0, run_leg = 0;
  bool run_fixed_start = false;
  auto* run_world_opt = run_cmd->add_option("--world", run_world, "world file (JSON)");
  auto* run_gen_opt = run_cmd->add_option("--gen-seed", run_gen_seed, "generate a world instead");
  auto* run_target_opt = run_cmd->add_option("--target", run_target, "override target category");
  auto* run_steps_opt = run_cmd->add_option("--max-steps", run_max_steps, "action budget");
  auto* run_leg_opt = run_cmd->add_option("--leg", run_leg, "forward steps per leg");
  auto* run_priors_opt = run_cmd->add_option("--priors", run_priors, "prior table CSV");
  auto* run_pm_opt = run_cmd->add_option("--prompt-mode", run_prompt_mode, "decoupled | one_step")
                         ->check(CLI::IsMember({"decoupled", "one_step"}));
  auto* run_lm_opt = run_cmd->add_option("--llm-mode", run_llm_mode, "live | replay")
                         ->check(CLI::IsMember({"live", "replay"}));
  auto* run_tin_opt = run_cmd->add_option("--transcript-in", run_transcript_in,
                                          "transcript to replay remote calls from");
  auto* run_tout_opt = run_cmd->add_option("--transcript-out", run_transcript_out,
                                           "record remote calls to this transcript");
  auto* run_pdir_opt = run_cmd->add_option("--prompt-dir", run_prompt_dir,
                                           "directory of prompt template overrides");
  run_cmd->add_flag("--fixed-start", run_fixed_start, "start exactly at the world's start pose");

  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark suite");
  bench_cmd->fallthrough();
  std::string suite_name = "deadlock";
  bench_cmd->add_option("--suite", suite_name, "deadlock | views")
      ->check(CLI::IsMember({"deadlock", "views"}));

  auto* plot_cmd = app.add_subcommand("plot", "render a trajectory log as SVG");
  plot_cmd->fallthrough();
  std::string plot_world, plot_log;
  plot_cmd->add_option("--world", plot_world, "world file")->required();
  plot_cmd->add_option("--log", plot_log, "trajectory log")->required();

  auto* replay_cmd = app.add_subcommand("replay", "recompute metrics from trajectory logs");
  replay_cmd->fallthrough();
  std::string replay_world;
  std::vector<std::string> replay_logs;
  replay_cmd->add_option("--world", replay_world, "world file")->required();
  replay_cmd->add_option("--log", replay_logs, "trajectory log (repeatable)")->required();

  CLI11_PARSE(app, argc, argv);

  auto apply_globals = [&](EpisodeConfig& cfg) {
    if (seed_opt->count()) cfg.seed = seed;
    if (backend_opt->count()) cfg.backend = backend;
    if (memory_opt->count()) cfg.memory_enabled = memory_enabled;
    if (views_opt->count()) cfg.views = views;
    if (n_opt->count()) cfg.queue_capacity = capacity;
  };

  try {
    if (app.got_subcommand(gen_cmd)) {
      PriorTable priors =
          gen_priors.empty() ? PriorTable::builtin() : PriorTable::load_csv(gen_priors);
      GridWorld world = generate_world(seed, gp, priors);
      fs::path out = fs::path(out_dir) / ("world_" + std::to_string(seed) + ".json");
      write_text_file(out, world.serialize());
      std::cout << out.string() << "\n"
                << world.rooms().size() << " rooms, " << world.objects().size()
                << " objects, target " << world.target_category() << ", hash "
                << to_hex(world.content_hash()) << "\n";
      return 0;
    }

    if (app.got_subcommand(run_cmd)) {
      EpisodeConfig cfg = load_config(config_file);
      apply_globals(cfg);
      if (run_world_opt->count()) cfg.world_file = run_world;
      if (run_gen_opt->count()) {
        cfg.world_file.clear();
        cfg.gen_seed = run_gen_seed;
      }
      if (run_target_opt->count()) cfg.target = run_target;
      if (run_steps_opt->count()) cfg.max_steps = run_max_steps;
      if (run_leg_opt->count()) cfg.leg_length = run_leg;
      if (run_priors_opt->count()) cfg.priors_file = run_priors;
      if (run_pm_opt->count()) cfg.prompt_mode = run_prompt_mode;
      if (run_lm_opt->count()) cfg.llm_mode = run_llm_mode;
      if (run_tin_opt->count()) cfg.transcript_in = run_transcript_in;
      if (run_tout_opt->count()) cfg.transcript_out = run_transcript_out;
      if (run_pdir_opt->count()) cfg.prompt_dir = run_prompt_dir;
      if (run_fixed_start) cfg.randomize_start = false;
      validate_config(cfg);

      PriorTable priors = priors_from_config(cfg);
      GridWorld world = world_from_config(cfg, priors);
      EpisodeOutput out = run_on_world(cfg, world, priors);

      fs::path dir(out_dir);
      write_text_file(dir / "trajectory.jsonl", out.log.to_jsonl());
      write_text_file(dir / "trajectory.svg", render_trajectory_svg(world, out.log));
      std::cout << result_header() << "\n" << result_row(out.result) << "\n";
      std::cout << to_text(aggregate({out.result})) << "\n";
      return 0;
    }

    if (app.got_subcommand(bench_cmd)) {
      SuiteSpec suite = suite_name == "deadlock" ? deadlock_suite() : ablation_views_suite();
      if (config_opt->count()) suite.base = load_config(config_file);
      apply_globals(suite.base);
      BenchmarkOutput out = run_benchmark(suite);

      std::string episodes = "condition,world_seed,episode_seed," + result_header() + "\n";
      for (const auto& cell : out.cells)
        episodes += cell.condition + "," + std::to_string(cell.world_seed) + "," +
                    std::to_string(cell.episode_seed) + "," + result_row(cell.result) + "\n";
      std::string table = "condition,N,SR,SPL,DTS_f,ER\n";
      for (const auto& cond : out.conditions)
        table += cond.name + "," + to_table_row(cond.report) + "\n";

      fs::path dir(out_dir);
      write_text_file(dir / ("bench_" + suite_name + "_episodes.csv"), episodes);
      write_text_file(dir / ("bench_" + suite_name + "_report.csv"), table);
      std::cout << table;
      for (const auto& err : out.errors) std::cerr << "invalid episode: " << err << "\n";
      return out.invalid > 0 ? 1 : 0;
    }

    if (app.got_subcommand(plot_cmd)) {
      GridWorld world = GridWorld::load(plot_world);
      TrajectoryLog log = TrajectoryLog::load(plot_log);
      fs::path out = fs::path(out_dir) / (fs::path(plot_log).stem().string() + ".svg");
      write_text_file(out, render_trajectory_svg(world, log));
      std::cout << out.string() << "\n";
      return 0;
    }

    if (app.got_subcommand(replay_cmd)) {
      GridWorld world = GridWorld::load(replay_world);
      std::vector<EpisodeResult> results;
      std::cout << result_header() << "\n";
      for (const auto& file : replay_logs) {
        TrajectoryLog log = TrajectoryLog::load(file);
        EpisodeResult r = replay_episode(world, log);
        verify_logged_result(log, r);
        results.push_back(r);
        std::cout << result_row(r) << "\n";
      }
      std::cout << to_text(aggregate(results)) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
