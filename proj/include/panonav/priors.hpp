#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "panonav/error.hpp"

namespace panonav {

// Room-type x object-category likelihood table. Both the oracle parser and
// the heuristic decision policy read it, so generated scenes and the scoring
// that explores them agree on which rooms "should" contain which objects.
class PriorTable {
 public:
  static constexpr double kDefault = 0.05;

  double prior(const std::string& room_type, const std::string& category) const {
    auto r = table_.find(room_type);
    if (r == table_.end()) return kDefault;
    auto c = r->second.find(category);
    return c == r->second.end() ? kDefault : c->second;
  }

  void set(const std::string& room_type, const std::string& category, double p) {
    require(p >= 0.0 && p <= 1.0, Errc::invalid_input,
            "prior out of [0,1] for " + room_type + "/" + category);
    table_[room_type][category] = p;
  }

  std::vector<std::string> room_types() const {
    std::vector<std::string> out;
    for (const auto& [room, _] : table_) out.push_back(room);
    return out;
  }

  // Categories typical for a room, strongest first.
  std::vector<std::string> typical_objects(const std::string& room_type,
                                           double min_prior = 0.25) const {
    std::vector<std::pair<double, std::string>> hits;
    auto r = table_.find(room_type);
    if (r != table_.end())
      for (const auto& [cat, p] : r->second)
        if (p >= min_prior) hits.push_back({-p, cat});
    std::sort(hits.begin(), hits.end());
    std::vector<std::string> out;
    for (auto& [_, cat] : hits) out.push_back(cat);
    return out;
  }

  // Room type where the category is most expected; lexicographic tie-break.
  std::string deceptive_room_for(const std::string& category) const {
    std::string best_room = "unknown";
    double best = kDefault;
    for (const auto& [room, cats] : table_) {
      auto c = cats.find(category);
      if (c != cats.end() && c->second > best) {
        best = c->second;
        best_room = room;
      }
    }
    return best_room;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "room_type,category,prior\n";
    for (const auto& [room, cats] : table_)
      for (const auto& [cat, p] : cats) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", p);
        out << room << "," << cat << "," << buf << "\n";
      }
    return out.str();
  }

  static PriorTable from_csv(std::istream& in) {
    PriorTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      if (lineno == 1 && line.rfind("room_type,", 0) == 0) continue;
      std::istringstream row(line);
      std::string room, cat, val;
      if (!std::getline(row, room, ',') || !std::getline(row, cat, ',') ||
          !std::getline(row, val))
        fail(Errc::invalid_input, "bad prior row at line " + std::to_string(lineno));
      size_t pos = 0;
      double p = 0.0;
      try {
        p = std::stod(val, &pos);
      } catch (const std::exception&) {
        fail(Errc::invalid_input, "bad prior value at line " + std::to_string(lineno));
      }
      t.set(room, cat, p);
    }
    return t;
  }

  static PriorTable load_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::invalid_input, "cannot open prior table: " + path);
    return from_csv(in);
  }

  void save_csv(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), Errc::invalid_input, "cannot write prior table: " + path);
    out << to_csv();
  }

  static PriorTable builtin() {
    PriorTable t;
    auto room = [&t](const std::string& r,
                     std::initializer_list<std::pair<const char*, double>> cats) {
      for (const auto& [c, p] : cats) t.set(r, c, p);
    };
    room("living_room", {{"sofa", 0.40},
                         {"tv", 0.35},
                         {"table", 0.30},
                         {"chair", 0.30},
                         {"lamp", 0.20},
                         {"plant", 0.15},
                         {"bookshelf", 0.15}});
    room("bedroom",
         {{"bed", 0.40}, {"wardrobe", 0.35}, {"lamp", 0.25}, {"chair", 0.15}, {"table", 0.10}});
    room("kitchen",
         {{"fridge", 0.40}, {"oven", 0.35}, {"sink", 0.30}, {"table", 0.25}, {"chair", 0.20}});
    room("bathroom", {{"toilet", 0.40}, {"sink", 0.35}, {"bathtub", 0.30}});
    room("office", {{"desk", 0.40},
                    {"chair", 0.30},
                    {"bookshelf", 0.30},
                    {"lamp", 0.20},
                    {"sofa", 0.15},
                    {"table", 0.15},
                    {"tv", 0.10}});
    room("hallway", {{"plant", 0.10}, {"lamp", 0.10}});
    return t;
  }

 private:
  std::map<std::string, std::map<std::string, double>> table_;
};

}  // namespace panonav
