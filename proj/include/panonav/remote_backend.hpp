#pragma once

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "panonav/decision.hpp"
#include "panonav/llm_client.hpp"
#include "panonav/perception.hpp"

namespace panonav {

// Raw transcription of one directional view, the symbolic stand-in for the
// sector's camera frame. Unlike LocalDescription.text it carries no parsed
// judgment, only what is visible.
inline std::string render_view_text(const DirectionalView& view) {
  std::ostringstream out;
  out << "Sector " << view.sector << " (" << sector_tag(view.sector) << "): ";
  if (!view.present) {
    out << "no view available.";
    return out.str();
  }
  if (view.entities.empty()) {
    out << "no objects";
  } else {
    out << "objects: ";
    for (size_t i = 0; i < view.entities.size(); ++i) {
      if (i) out << ", ";
      out << entity_label(view.entities, static_cast<int>(i)) << " at "
          << to_fixed(view.entities[i].range_m, 2) << " m ("
          << bearing_phrase(view.entities[i].bearing_deg) << ")";
    }
  }
  if (!view.visible_room_cells.empty()) {
    out << "; visible floor area by room type: ";
    bool first = true;
    for (const auto& [type, count] : view.visible_room_cells) {
      if (!first) out << ", ";
      first = false;
      out << type << " x" << count;
    }
  }
  if (view.wall_distance_ahead)
    out << "; wall at " << to_fixed(*view.wall_distance_ahead, 2) << " m.";
  else
    out << "; open beyond visible range.";
  return out.str();
}

// Model-backed scene parsing. Entity lists and relation edges stay
// mechanical (they are the observation itself); the model contributes the
// judgment fields: room guess, target likelihood, richness, prose.
class RemoteParser : public ParserBackend {
 public:
  RemoteParser(LlmClient* client, PromptLibrary lib = PromptLibrary::builtin(),
               PriorTable priors = PriorTable::builtin(), int richness_cap = 8)
      : client_(client), lib_(std::move(lib)), priors_(std::move(priors)),
        richness_cap_(richness_cap) {}

  LocalDescription parse_local(const DirectionalView& view, const ScaffoldGrid& m,
                               const std::string& target) override {
    LocalDescription ld = oracle_parse_local(view, m, target, priors_, richness_cap_);
    if (!view.present) return ld;
    ChatRequest req;
    req.model = client_->options().mllm_model;
    req.temperature = 0.0;
    req.timeout_s = client_->options().timeout_s;
    std::map<std::string, std::string> subs;
    subs["TARGET"] = target;
    subs["VIEW"] = render_view_text(view);
    req.messages.push_back({"system",
                            "You describe robot camera observations. Answer with one JSON "
                            "object and nothing else.",
                            {}});
    req.messages.push_back({"user", lib_.render("parse_local_v1", subs), {}});
    std::string reply = client_->complete(req);
    auto parsed = parse_local_reply(reply);
    if (!parsed) {
      std::cerr << "warning: unparseable parse_local reply for sector " << view.sector
                << ", using mechanical parse\n";
      return ld;
    }
    ld.room_type_guess = parsed->room.empty() ? "unknown" : parsed->room;
    ld.target_likelihood = parsed->target_likelihood;
    ld.richness = parsed->richness;
    if (!parsed->summary.empty())
      ld.text = "Sector " + std::to_string(view.sector) + " (" + sector_tag(view.sector) +
                "): " + parsed->summary;
    return ld;
  }

  GlobalSummary summarize(const std::vector<LocalDescription>& lds, int timestep) override {
    GlobalSummary gs = summarize_global(lds, timestep);  // inventory stays mechanical
    ChatRequest req;
    req.model = client_->options().model;
    req.temperature = 0.0;
    req.timeout_s = client_->options().timeout_s;
    std::ostringstream texts;
    for (size_t i = 0; i < lds.size(); ++i) {
      if (i) texts << "\n";
      texts << lds[i].text;
    }
    std::map<std::string, std::string> subs;
    subs["LOCAL_DESCRIPTIONS"] = texts.str();
    req.messages.push_back({"system",
                            "You summarize robot observations. Answer with one JSON object and "
                            "nothing else.",
                            {}});
    req.messages.push_back({"user", lib_.render("summarize_v1", subs), {}});
    std::string reply = client_->complete(req);
    auto parsed = parse_summary_reply(reply);
    if (!parsed) {
      std::cerr << "warning: unparseable summarize reply at waypoint " << timestep
                << ", using mechanical summary\n";
      return gs;
    }
    if (!parsed->room.empty()) gs.room_type = parsed->room;
    std::ostringstream text;
    text << "Waypoint " << timestep << ": "
         << (parsed->summary.empty() ? "area looks like " + gs.room_type : parsed->summary);
    if (!gs.inventory.empty()) {
      text << " Visible objects: ";
      for (size_t i = 0; i < gs.inventory.size(); ++i) {
        if (i) text << ", ";
        text << gs.inventory[i];
      }
      text << ".";
    }
    gs.text = text.str();
    return gs;
  }

 private:
  LlmClient* client_;
  PromptLibrary lib_;
  PriorTable priors_;
  int richness_cap_;
};

// Transcription-only parsing for the one-step prompt mode: the decision
// prompt gets raw observations, no intermediate judgment.
class MechanicalParser : public ParserBackend {
 public:
  explicit MechanicalParser(int richness_cap = 8) : richness_cap_(richness_cap) {}

  LocalDescription parse_local(const DirectionalView& view, const ScaffoldGrid& m,
                               const std::string&) override {
    LocalDescription ld;
    ld.sector = view.sector;
    ld.present = view.present;
    if (!view.present) {
      ld.text = render_view_text(view);
      return ld;
    }
    ld.entities = view.entities;
    ld.relations = parse_spatial_relations(view, m);
    ld.room_type_guess = "unknown";
    ld.target_likelihood = 0.0;
    ld.richness = std::min(1.0, static_cast<double>(view.entities.size()) / richness_cap_);
    ld.text = render_view_text(view);
    return ld;
  }

  GlobalSummary summarize(const std::vector<LocalDescription>& lds, int timestep) override {
    return summarize_global(lds, timestep);
  }

 private:
  int richness_cap_;
};

// Model-backed direction picker: one prompt per waypoint, a single
// format-nudge retry on an unparseable reply, then the heuristic stand-in.
// Transport failures propagate and abort the episode.
class RemotePolicy : public Policy {
 public:
  RemotePolicy(LlmClient* client, std::string target, PromptMode mode = PromptMode::decoupled,
               PromptLibrary lib = PromptLibrary::builtin(),
               PriorTable priors = PriorTable::builtin(), PriorWeights weights = {})
      : client_(client), target_(std::move(target)), mode_(mode), lib_(std::move(lib)),
        fallback_(target_, std::move(priors), weights) {}

  DecisionResult decide_without_memory(const std::vector<LocalDescription>& lds,
                                       const GlobalSummary& gs) override {
    return decide_impl(lds, gs, std::nullopt);
  }

  DecisionResult decide_with_memory(const std::vector<LocalDescription>& lds,
                                    const GlobalSummary& gs,
                                    const std::vector<GlobalSummary>& history) override {
    last_history_ = history;
    std::vector<std::string> texts;
    for (const auto& h : history) texts.push_back(h.text);
    return decide_impl(lds, gs, texts);
  }

 private:
  DecisionResult decide_impl(const std::vector<LocalDescription>& lds, const GlobalSummary& gs,
                             const std::optional<std::vector<std::string>>& queue_texts) {
    std::vector<std::string> ld_texts;
    for (const auto& ld : lds) ld_texts.push_back(ld.text);
    ChatRequest req = render_decision_prompt(ld_texts, gs.text, queue_texts, target_, mode_,
                                             lib_, client_->options().model,
                                             client_->options().timeout_s);
    std::string reply = client_->complete(req);
    if (auto r = accept(parse_decision_reply(reply), lds)) return *r;

    ChatRequest retry = req;
    retry.messages.push_back({"assistant", reply, {}});
    retry.messages.push_back({"user",
                              "That reply could not be parsed. Reply with exactly one JSON "
                              "object of the form {\"sector\": <1-6>, \"found\": "
                              "<true|false>, \"reason\": \"<short>\"} and nothing else.",
                              {}});
    std::string second = client_->complete(retry);
    if (auto r = accept(parse_decision_reply(second), lds)) return *r;

    std::cerr << "warning: unparseable decision replies, falling back to heuristic policy\n";
    DecisionResult r = queue_texts ? fallback_.decide_with_memory(lds, gs, last_history_)
                                   : fallback_.decide_without_memory(lds, gs);
    r.rationale += " (heuristic fallback after unparseable replies)";
    return r;
  }

  std::optional<DecisionResult> accept(std::optional<DecisionResult> r,
                                       const std::vector<LocalDescription>& lds) {
    if (!r) return std::nullopt;
    for (const auto& ld : lds)
      if (ld.sector == r->sector) return ld.present ? r : std::nullopt;
    return std::nullopt;
  }

  LlmClient* client_;
  std::string target_;
  PromptMode mode_;
  PromptLibrary lib_;
  HeuristicPolicy fallback_;
  std::vector<GlobalSummary> last_history_;
};

}  // namespace panonav
