#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "panonav/error.hpp"
#include "panonav/geometry.hpp"
#include "panonav/memory.hpp"
#include "panonav/perception.hpp"
#include "panonav/priors.hpp"
#include "panonav/world.hpp"

namespace panonav {

struct DecisionResult {
  int sector = 1;
  bool found = false;
  std::string rationale;
};

struct PriorWeights {
  double like = 1.0;
  double prior = 0.6;
  double rich = 0.2;
  double memory = 0.8;
};

inline double prior_policy_score(const LocalDescription& ld, const std::string& target,
                                 const PriorTable& priors, const PriorWeights& w) {
  return w.like * ld.target_likelihood + w.prior * priors.prior(ld.room_type_guess, target) +
         w.rich * ld.richness;
}

inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::string> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<std::string> inter, uni;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

// How strongly a sector resembles somewhere already visited: best match over
// the queue, half object overlap, half room-type agreement.
inline double memory_penalty(const LocalDescription& ld,
                             const std::vector<GlobalSummary>& entries) {
  require(!entries.empty(), Errc::contract, "memory penalty queried with empty history");
  std::vector<std::string> cats;
  for (const auto& e : ld.entities) cats.push_back(e.category);
  double worst = 0.0;
  for (const auto& gs : entries) {
    double sim = 0.5 * jaccard(cats, gs.inventory) +
                 (ld.room_type_guess == gs.room_type ? 0.5 : 0.0);
    worst = std::max(worst, sim);
  }
  return worst;
}

// A direction picker. Implementations never see the queue unless the runner
// hands them a snapshot through decide_with_memory.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual DecisionResult decide_without_memory(const std::vector<LocalDescription>& lds,
                                               const GlobalSummary& gs) = 0;
  virtual DecisionResult decide_with_memory(const std::vector<LocalDescription>& lds,
                                            const GlobalSummary& gs,
                                            const std::vector<GlobalSummary>& history) = 0;

  // Ground-truth policies need to know where the agent stands; text policies
  // ignore this (mapless contract).
  virtual void set_pose(const Pose&) {}
};

inline void check_decision_inputs(const std::vector<LocalDescription>& lds) {
  require(lds.size() == 6, Errc::invalid_input, "decision needs exactly six sector descriptions");
  for (size_t i = 0; i < lds.size(); ++i)
    require(lds[i].sector == static_cast<int>(i) + 1, Errc::invalid_input,
            "sector descriptions must arrive in order 1 through 6");
  int present = 0;
  for (const auto& ld : lds) present += ld.present ? 1 : 0;
  require(present == 6 || present == 3, Errc::invalid_input,
          "either the full panorama or the three forward sectors must be present");
  if (present == 3)
    require(lds[0].present && lds[1].present && lds[5].present, Errc::invalid_input,
            "the limited panorama keeps the forward sectors 1, 2, and 6");
}

// Memory gate: history is consulted only when the queue is full, and the
// policy receives it only then.
inline DecisionResult decide(Policy& policy, const std::vector<LocalDescription>& lds,
                             const GlobalSummary& gs, const MemoryQueue& q,
                             bool memory_enabled = true) {
  check_decision_inputs(lds);
  if (memory_enabled && q.full()) return policy.decide_with_memory(lds, gs, q.snapshot());
  return policy.decide_without_memory(lds, gs);
}

// Score-based stand-in for the language model: prior-driven exploration that
// loops on prior-consistent rooms until the memory term pushes it elsewhere.
class HeuristicPolicy : public Policy {
 public:
  explicit HeuristicPolicy(std::string target, PriorTable priors = PriorTable::builtin(),
                           PriorWeights weights = {})
      : target_(std::move(target)), priors_(std::move(priors)), w_(weights) {}

  DecisionResult decide_without_memory(const std::vector<LocalDescription>& lds,
                                       const GlobalSummary& gs) override {
    return decide_impl(lds, gs, nullptr);
  }

  DecisionResult decide_with_memory(const std::vector<LocalDescription>& lds,
                                    const GlobalSummary& gs,
                                    const std::vector<GlobalSummary>& history) override {
    return decide_impl(lds, gs, &history);
  }

  const PriorWeights& weights() const { return w_; }
  const PriorTable& priors() const { return priors_; }

 private:
  DecisionResult decide_impl(const std::vector<LocalDescription>& lds, const GlobalSummary&,
                             const std::vector<GlobalSummary>* history) {
    DecisionResult r;
    std::optional<int> sighted;
    double sighted_score = 0.0;
    for (const auto& ld : lds) {
      if (!ld.present || ld.target_likelihood != 1.0) continue;
      double s = prior_policy_score(ld, target_, priors_, w_);
      if (!sighted || s > sighted_score) {
        sighted = ld.sector;
        sighted_score = s;
      }
    }
    if (sighted) {
      r.sector = *sighted;
      r.found = true;
      r.rationale = "target sighted in sector " + std::to_string(*sighted);
      return r;
    }
    std::optional<double> best;
    for (const auto& ld : lds) {
      if (!ld.present) continue;
      double s = prior_policy_score(ld, target_, priors_, w_);
      if (history) s -= w_.memory * memory_penalty(ld, *history);
      if (!best || s > *best) {
        best = s;
        r.sector = ld.sector;
      }
    }
    require(best.has_value(), Errc::contract, "no present sector to score");
    r.found = false;
    r.rationale = history ? "best prior score after revisit penalty" : "best prior score";
    return r;
  }

  std::string target_;
  PriorTable priors_;
  PriorWeights w_;
};

// Upper-bound reference policy: walks the geodesic descent toward the
// nearest target instance. Ignores summaries and history by construction.
class OraclePolicy : public Policy {
 public:
  OraclePolicy(const GridWorld& world, std::string target)
      : world_(&world), target_(std::move(target)) {
    auto cells = world.category_cells(target_);
    require(!cells.empty(), Errc::invalid_input, "no instance of category: " + target_);
    field_ = world.distance_field(cells);
  }

  void set_pose(const Pose& pose) override { pose_ = pose; }

  DecisionResult decide_without_memory(const std::vector<LocalDescription>& lds,
                                       const GlobalSummary& gs) override {
    return decide_impl(lds, gs);
  }

  DecisionResult decide_with_memory(const std::vector<LocalDescription>& lds,
                                    const GlobalSummary& gs,
                                    const std::vector<GlobalSummary>&) override {
    return decide_impl(lds, gs);
  }

 private:
  DecisionResult decide_impl(const std::vector<LocalDescription>& lds, const GlobalSummary&) {
    check_decision_inputs(lds);
    DecisionResult r;
    for (const auto& ld : lds)
      if (ld.present && ld.target_likelihood == 1.0) {
        r.sector = ld.sector;
        r.found = true;
        r.rationale = "target sighted";
        return r;
      }
    std::optional<int> best;
    for (const auto& ld : lds) {
      if (!ld.present) continue;
      int heading = normalize_deg(pose_.heading + 60 * (ld.sector - 1));
      Cell d = axis_step(snapped_axis(heading));
      Cell next{pose_.cell.x + d.x, pose_.cell.y + d.y};
      if (!world_->free(next)) continue;
      int dist = field_[next.y * world_->width() + next.x];
      if (dist < 0) continue;
      if (!best || dist < *best) {
        best = dist;
        r.sector = ld.sector;
      }
    }
    r.found = false;
    r.rationale = best ? "descending geodesic field" : "no open direction";
    return r;
  }

  const GridWorld* world_;
  std::string target_;
  std::vector<int> field_;
  Pose pose_;
};

}  // namespace panonav
