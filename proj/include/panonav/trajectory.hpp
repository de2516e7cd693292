#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "panonav/controller.hpp"
#include "panonav/decision.hpp"
#include "panonav/error.hpp"
#include "panonav/perception.hpp"
#include "panonav/world.hpp"

namespace panonav {

inline double round_to(double v, int digits) {
  double scale = std::pow(10.0, digits);
  double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

inline std::string to_hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline nlohmann::ordered_json pose_to_json(const Pose& p) {
  return {{"cell", {p.cell.x, p.cell.y}}, {"heading", p.heading}, {"pitch", p.pitch}};
}

inline Pose pose_from_json(const nlohmann::json& j) {
  Pose p;
  p.cell = {j.at("cell").at(0).get<int>(), j.at("cell").at(1).get<int>()};
  p.heading = j.at("heading").get<int>();
  p.pitch = j.value("pitch", 0);
  return p;
}

struct SectorDigest {
  int sector = 1;
  bool present = true;
  std::string room = "unknown";
  double target_likelihood = 0.0;
  double richness = 0.0;
  std::vector<std::string> categories;
  std::string text;

  static SectorDigest from(const LocalDescription& ld) {
    SectorDigest d;
    d.sector = ld.sector;
    d.present = ld.present;
    d.room = ld.room_type_guess;
    d.target_likelihood = round_to(ld.target_likelihood, 4);
    d.richness = round_to(ld.richness, 4);
    for (const auto& e : ld.entities) d.categories.push_back(e.category);
    d.text = ld.text;
    return d;
  }

  nlohmann::ordered_json to_json() const {
    return {{"sector", sector},   {"present", present},
            {"room", room},       {"target_likelihood", target_likelihood},
            {"richness", richness}, {"categories", categories},
            {"text", text}};
  }

  static SectorDigest from_json(const nlohmann::json& j) {
    SectorDigest d;
    d.sector = j.at("sector").get<int>();
    d.present = j.at("present").get<bool>();
    d.room = j.at("room").get<std::string>();
    d.target_likelihood = j.at("target_likelihood").get<double>();
    d.richness = j.at("richness").get<double>();
    d.categories = j.at("categories").get<std::vector<std::string>>();
    d.text = j.at("text").get<std::string>();
    return d;
  }
};

struct SummaryDigest {
  int timestep = 0;
  std::string room = "unknown";
  std::vector<std::string> inventory;
  std::string text;

  static SummaryDigest from(const GlobalSummary& gs) {
    return {gs.timestep, gs.room_type, gs.inventory, gs.text};
  }

  GlobalSummary to_summary() const {
    GlobalSummary gs;
    gs.timestep = timestep;
    gs.room_type = room;
    gs.inventory = inventory;
    gs.text = text;
    return gs;
  }

  nlohmann::ordered_json to_json() const {
    return {{"t", timestep}, {"room", room}, {"inventory", inventory}, {"text", text}};
  }

  static SummaryDigest from_json(const nlohmann::json& j) {
    SummaryDigest d;
    d.timestep = j.at("t").get<int>();
    d.room = j.at("room").get<std::string>();
    d.inventory = j.at("inventory").get<std::vector<std::string>>();
    d.text = j.at("text").get<std::string>();
    return d;
  }
};

struct LoggedStep {
  int t = 0;  // global action index, 1-based
  Action action = Action::Stop;
  Pose pose_after;
  StepOutcome outcome;
};

struct LoggedWaypoint {
  int index = 0;  // waypoint timestep, 1-based
  Pose pose;      // where the decision was made
  std::vector<SectorDigest> sectors;
  SummaryDigest summary;
  std::vector<SummaryDigest> queue_before;  // queue contents the decider saw
  DecisionResult decision;
  int budget_left = 0;
  std::vector<LoggedStep> steps;
  LegTermination terminated = LegTermination::WaypointReached;
};

// Line-delimited episode record: one header line, then waypoint and step
// lines in event order, then one result line. Contains no timestamps so
// identical runs serialize to identical bytes.
class TrajectoryLog {
 public:
  static constexpr const char* kSchema = "panonav.trajlog/1";

  nlohmann::ordered_json config;
  std::string world_hash;
  Pose start;
  std::vector<LoggedWaypoint> waypoints;
  nlohmann::ordered_json result;

  std::string to_jsonl() const {
    std::ostringstream out;
    nlohmann::ordered_json header;
    header["schema"] = kSchema;
    header["config"] = config;
    header["world_hash"] = world_hash;
    header["start"] = pose_to_json(start);
    out << header.dump() << "\n";
    for (const auto& wp : waypoints) {
      nlohmann::ordered_json w;
      w["waypoint"] = wp.index;
      w["pose"] = pose_to_json(wp.pose);
      auto& sectors = w["sectors"] = nlohmann::ordered_json::array();
      for (const auto& s : wp.sectors) sectors.push_back(s.to_json());
      w["summary"] = wp.summary.to_json();
      auto& queue = w["queue"] = nlohmann::ordered_json::array();
      for (const auto& q : wp.queue_before) queue.push_back(q.to_json());
      w["decision"] = {{"sector", wp.decision.sector},
                       {"found", wp.decision.found},
                       {"rationale", wp.decision.rationale}};
      w["budget_left"] = wp.budget_left;
      out << w.dump() << "\n";
      for (const auto& s : wp.steps) {
        nlohmann::ordered_json step;
        step["t"] = s.t;
        step["action"] = to_string(s.action);
        step["pose"] = pose_to_json(s.pose_after);
        step["moved"] = s.outcome.moved;
        step["blocked"] = s.outcome.blocked;
        step["stopped"] = s.outcome.stopped;
        out << step.dump() << "\n";
      }
      nlohmann::ordered_json end;
      end["leg_end"] = wp.index;
      end["terminated"] = to_string(wp.terminated);
      out << end.dump() << "\n";
    }
    nlohmann::ordered_json res;
    res["result"] = result;
    out << res.dump() << "\n";
    return out.str();
  }

  static TrajectoryLog parse(const std::string& text) {
    TrajectoryLog log;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_header = false, have_result = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::ordered_json j;
      try {
        j = nlohmann::ordered_json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_input, "bad log line " + std::to_string(lineno) + ": " + e.what());
      }
      try {
        if (!have_header) {
          require(j.value("schema", "") == kSchema, Errc::invalid_input,
                  "unsupported trajectory log schema");
          log.config = j.at("config");
          log.world_hash = j.at("world_hash").get<std::string>();
          log.start = pose_from_json(j.at("start"));
          have_header = true;
        } else if (j.contains("waypoint")) {
          LoggedWaypoint wp;
          wp.index = j.at("waypoint").get<int>();
          wp.pose = pose_from_json(j.at("pose"));
          for (const auto& s : j.at("sectors")) wp.sectors.push_back(SectorDigest::from_json(s));
          wp.summary = SummaryDigest::from_json(j.at("summary"));
          for (const auto& q : j.at("queue"))
            wp.queue_before.push_back(SummaryDigest::from_json(q));
          wp.decision.sector = j.at("decision").at("sector").get<int>();
          wp.decision.found = j.at("decision").at("found").get<bool>();
          wp.decision.rationale = j.at("decision").at("rationale").get<std::string>();
          wp.budget_left = j.at("budget_left").get<int>();
          log.waypoints.push_back(std::move(wp));
        } else if (j.contains("t")) {
          require(!log.waypoints.empty(), Errc::invalid_input, "step before any waypoint");
          LoggedStep s;
          s.t = j.at("t").get<int>();
          s.action = action_from_string(j.at("action").get<std::string>());
          s.pose_after = pose_from_json(j.at("pose"));
          s.outcome.moved = j.at("moved").get<bool>();
          s.outcome.blocked = j.at("blocked").get<bool>();
          s.outcome.stopped = j.at("stopped").get<bool>();
          log.waypoints.back().steps.push_back(s);
        } else if (j.contains("leg_end")) {
          require(!log.waypoints.empty(), Errc::invalid_input, "leg end before any waypoint");
          std::string term = j.at("terminated").get<std::string>();
          bool known = false;
          for (auto t : {LegTermination::WaypointReached, LegTermination::Blocked,
                         LegTermination::StoppedAtTarget, LegTermination::Budget})
            if (term == to_string(t)) {
              log.waypoints.back().terminated = t;
              known = true;
            }
          require(known, Errc::invalid_input, "unknown leg termination: " + term);
        } else if (j.contains("result")) {
          log.result = j.at("result");
          have_result = true;
        } else {
          fail(Errc::invalid_input, "unrecognized log line " + std::to_string(lineno));
        }
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_input,
             "malformed log line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    require(have_header, Errc::invalid_input, "trajectory log missing header");
    require(have_result, Errc::invalid_input, "trajectory log missing result line");
    return log;
  }

  static TrajectoryLog load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::invalid_input, "cannot open trajectory log: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), Errc::invalid_input, "cannot write trajectory log: " + path);
    out << to_jsonl();
  }
};

}  // namespace panonav
