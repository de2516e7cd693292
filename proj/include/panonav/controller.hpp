#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panonav/decision.hpp"
#include "panonav/error.hpp"
#include "panonav/geometry.hpp"
#include "panonav/world.hpp"

namespace panonav {

struct ControllerConfig {
  int leg_length = 5;  // forward moves per exploration leg
  double success_threshold_m = 1.0;
  double sight_range_m = 5.0;
  std::string target_category;
};

enum class LegTermination { WaypointReached, Blocked, StoppedAtTarget, Budget };

inline const char* to_string(LegTermination t) {
  switch (t) {
    case LegTermination::WaypointReached: return "WaypointReached";
    case LegTermination::Blocked: return "Blocked";
    case LegTermination::StoppedAtTarget: return "StoppedAtTarget";
    case LegTermination::Budget: return "Budget";
  }
  fail(Errc::contract, "bad termination value");
}

struct LegStep {
  Action action = Action::Stop;
  StepOutcome outcome;
  Pose pose_after;
};

struct LegResult {
  Pose end_pose;
  std::vector<LegStep> steps;
  LegTermination terminated = LegTermination::WaypointReached;

  std::vector<Action> actions() const {
    std::vector<Action> out;
    for (const auto& s : steps) out.push_back(s.action);
    return out;
  }

  int forward_moves() const {
    int n = 0;
    for (const auto& s : steps) n += s.outcome.moved ? 1 : 0;
    return n;
  }

  double path_length_m(double cell_size) const { return forward_moves() * cell_size; }
};

namespace detail {

// Minimal turn sequence from one heading to another; the 180-degree tie
// turns left.
inline std::vector<Action> turns_between(int from_deg, int to_deg) {
  int delta = normalize_deg(to_deg - from_deg);
  std::vector<Action> out;
  if (delta == 0) return out;
  if (delta <= 180)
    out.assign(delta / 30, Action::TurnLeft);
  else
    out.assign((360 - delta) / 30, Action::TurnRight);
  return out;
}

}  // namespace detail

// Executes one decision: rotate to the chosen sector, then either advance a
// fixed leg or close in on the sighted target and stop. Every action,
// including blocked ones, consumes budget.
inline LegResult execute_leg(const GridWorld& world, const Pose& start,
                             const DecisionResult& decision, int budget,
                             const ControllerConfig& cfg) {
  require(budget >= 1, Errc::invalid_input, "leg budget must be at least 1");
  require(decision.sector >= 1 && decision.sector <= 6, Errc::invalid_input,
          "decision sector out of range");
  require(cfg.leg_length >= 1, Errc::invalid_input, "leg length must be at least 1");

  LegResult leg;
  Pose pose = start;
  int left = budget;
  auto apply = [&](Action a) {
    auto [next, outcome] = world.step(pose, a);
    pose = next;
    leg.steps.push_back({a, outcome, pose});
    --left;
    return outcome;
  };

  int goal_heading = normalize_deg(start.heading + 60 * (decision.sector - 1));
  for (Action turn : detail::turns_between(pose.heading, goal_heading)) {
    if (left == 0) {
      leg.end_pose = pose;
      leg.terminated = LegTermination::Budget;
      return leg;
    }
    apply(turn);
  }

  if (!decision.found) {
    for (int i = 0; i < cfg.leg_length; ++i) {
      if (left == 0) {
        leg.end_pose = pose;
        leg.terminated = LegTermination::Budget;
        return leg;
      }
      auto outcome = apply(Action::MoveAhead);
      if (outcome.blocked) {
        leg.end_pose = pose;
        leg.terminated = LegTermination::Blocked;
        return leg;
      }
    }
    leg.end_pose = pose;
    leg.terminated = LegTermination::WaypointReached;
    return leg;
  }

  auto instances = world.category_cells(cfg.target_category);
  require(!instances.empty(), Errc::invalid_input,
          "no instance of category: " + cfg.target_category);
  std::vector<std::vector<int>> fields;
  for (Cell c : instances) fields.push_back(world.distance_field({c}));
  double max_sight_cells = cfg.sight_range_m / world.cell_size();

  auto visible_lock = [&]() -> std::optional<int> {
    std::optional<int> best;
    int best_hops = 0;
    for (size_t i = 0; i < instances.size(); ++i) {
      double d2 = static_cast<double>(dist2(pose.cell, instances[i]));
      if (d2 > max_sight_cells * max_sight_cells) continue;
      if (!world.line_of_sight(pose.cell, instances[i])) continue;
      int hops = fields[i][pose.cell.y * world.width() + pose.cell.x];
      if (hops < 0) continue;
      if (!best || hops < best_hops) {
        best = static_cast<int>(i);
        best_hops = hops;
      }
    }
    return best;
  };

  std::optional<int> lock = visible_lock();
  if (!lock) {  // claimed sighting with nothing in sight: give up here
    if (left == 0) {
      leg.end_pose = pose;
      leg.terminated = LegTermination::Budget;
      return leg;
    }
    apply(Action::Stop);
    leg.end_pose = pose;
    leg.terminated = LegTermination::StoppedAtTarget;
    return leg;
  }

  while (true) {
    if (left == 0) {
      leg.end_pose = pose;
      leg.terminated = LegTermination::Budget;
      return leg;
    }
    const auto& field = fields[*lock];
    int here = field[pose.cell.y * world.width() + pose.cell.x];
    if (here * world.cell_size() <= cfg.success_threshold_m) {
      apply(Action::Stop);
      leg.end_pose = pose;
      leg.terminated = LegTermination::StoppedAtTarget;
      return leg;
    }
    static constexpr int axes[4] = {0, 180, 90, 270};
    std::optional<int> step_axis;
    int best_hops = here;
    for (int axis : axes) {
      Cell d = axis_step(axis);
      Cell n{pose.cell.x + d.x, pose.cell.y + d.y};
      if (!world.free(n)) continue;
      int hops = field[n.y * world.width() + n.x];
      if (hops >= 0 && hops < best_hops) {
        best_hops = hops;
        step_axis = axis;
      }
    }
    if (!step_axis) {  // target unreachable from here; stop rather than spin
      apply(Action::Stop);
      leg.end_pose = pose;
      leg.terminated = LegTermination::StoppedAtTarget;
      return leg;
    }
    for (Action turn : detail::turns_between(pose.heading, *step_axis)) {
      if (left == 0) {
        leg.end_pose = pose;
        leg.terminated = LegTermination::Budget;
        return leg;
      }
      apply(turn);
    }
    if (left == 0) {
      leg.end_pose = pose;
      leg.terminated = LegTermination::Budget;
      return leg;
    }
    auto outcome = apply(Action::MoveAhead);
    if (outcome.blocked) {
      leg.end_pose = pose;
      leg.terminated = LegTermination::Blocked;
      return leg;
    }
    if (auto fresh = visible_lock()) lock = fresh;
  }
}

}  // namespace panonav
