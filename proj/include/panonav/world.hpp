#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "panonav/error.hpp"
#include "panonav/geometry.hpp"

namespace panonav {

enum class Action { Stop, MoveAhead, TurnLeft, TurnRight, LookUp, LookDown };

inline const char* to_string(Action a) {
  switch (a) {
    case Action::Stop: return "Stop";
    case Action::MoveAhead: return "MoveAhead";
    case Action::TurnLeft: return "TurnLeft";
    case Action::TurnRight: return "TurnRight";
    case Action::LookUp: return "LookUp";
    case Action::LookDown: return "LookDown";
  }
  fail(Errc::contract, "bad action value");
}

inline Action action_from_string(const std::string& s) {
  for (Action a : {Action::Stop, Action::MoveAhead, Action::TurnLeft, Action::TurnRight,
                   Action::LookUp, Action::LookDown})
    if (s == to_string(a)) return a;
  fail(Errc::invalid_input, "unknown action: " + s);
}

struct StepOutcome {
  bool moved = false;
  bool blocked = false;
  bool stopped = false;
};

struct Room {
  int id = 0;
  std::string type;
  std::vector<Cell> cells;
};

struct ObjectInstance {
  std::string category;
  Cell cell;
  int room_id = 0;
};

// Static indoor environment: occupancy grid, typed rooms, object instances,
// start pose, target category. Immutable after construction; all mutation
// lives in the agent's Pose.
class GridWorld {
 public:
  GridWorld(std::vector<std::string> rows, double cell_size, std::vector<Room> rooms,
            std::vector<ObjectInstance> objects, Pose start, std::string target)
      : cell_size_(cell_size),
        rows_(std::move(rows)),
        rooms_(std::move(rooms)),
        objects_(std::move(objects)),
        start_(start),
        target_(std::move(target)) {
    validate();
    index();
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  const std::vector<Room>& rooms() const { return rooms_; }
  const std::vector<ObjectInstance>& objects() const { return objects_; }
  const Pose& start() const { return start_; }
  const std::string& target_category() const { return target_; }
  const std::vector<std::string>& rows() const { return rows_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_; }

  bool free(Cell c) const { return in_bounds(c) && rows_[c.y][c.x] == '.'; }

  bool wall(Cell c) const { return !free(c); }

  int room_id_at(Cell c) const { return in_bounds(c) ? room_of_[idx(c)] : -1; }

  const std::string& room_type_at(Cell c) const {
    static const std::string none;
    int id = room_id_at(c);
    return id < 0 ? none : room(id).type;
  }

  const Room& room(int id) const {
    auto it = room_by_id_.find(id);
    require(it != room_by_id_.end(), Errc::invalid_input, "no room with id " + std::to_string(id));
    return rooms_[it->second];
  }

  double meters(Cell c, int axis) const { return (axis == 0 ? c.x : c.y) * cell_size_; }

  void validate_pose(const Pose& p) const {
    require(free(p.cell), Errc::contract, "pose not on a free cell");
    require(p.heading >= 0 && p.heading < 360 && p.heading % 30 == 0, Errc::contract,
            "pose heading not a multiple of 30 in [0,360)");
    require(p.pitch == -30 || p.pitch == 0 || p.pitch == 30, Errc::contract,
            "pose pitch outside {-30,0,30}");
  }

  std::pair<Pose, StepOutcome> step(const Pose& pose, Action action) const {
    validate_pose(pose);
    Pose next = pose;
    StepOutcome out;
    switch (action) {
      case Action::Stop: out.stopped = true; break;
      case Action::MoveAhead: {
        Cell d = axis_step(snapped_axis(pose.heading));
        Cell dest{pose.cell.x + d.x, pose.cell.y + d.y};
        if (free(dest)) {
          next.cell = dest;
          out.moved = true;
        } else {
          out.blocked = true;
        }
        break;
      }
      case Action::TurnLeft: next.heading = normalize_deg(pose.heading + 30); break;
      case Action::TurnRight: next.heading = normalize_deg(pose.heading - 30); break;
      case Action::LookUp: next.pitch = std::min(30, pose.pitch + 30); break;
      case Action::LookDown: next.pitch = std::max(-30, pose.pitch - 30); break;
    }
    return {next, out};
  }

  // Hop counts from the nearest source to every free cell, -1 where
  // unreachable. Uniform edge weights, so the heap order is total and the
  // result is deterministic.
  std::vector<int> distance_field(const std::vector<Cell>& sources) const {
    std::vector<int> dist(static_cast<size_t>(width_) * height_, -1);
    using Node = std::pair<int, int>;  // (hops, cell index), min-heap
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap;
    for (Cell s : sources) {
      require(free(s), Errc::contract, "distance source on a wall");
      if (dist[idx(s)] != 0) {
        dist[idx(s)] = 0;
        heap.push({0, idx(s)});
      }
    }
    static constexpr int dx[4] = {1, -1, 0, 0};
    static constexpr int dy[4] = {0, 0, 1, -1};
    while (!heap.empty()) {
      auto [d, i] = heap.top();
      heap.pop();
      if (d != dist[i]) continue;
      Cell c{i % width_, i / width_};
      for (int k = 0; k < 4; ++k) {
        Cell n{c.x + dx[k], c.y + dy[k]};
        if (!free(n)) continue;
        int nd = d + 1;
        int j = idx(n);
        if (dist[j] == -1 || nd < dist[j]) {
          dist[j] = nd;
          heap.push({nd, j});
        }
      }
    }
    return dist;
  }

  std::optional<double> shortest_path_length(Cell a, Cell b) const {
    require(free(a) && free(b), Errc::invalid_input, "path endpoints must be free cells");
    auto field = distance_field({a});
    int hops = field[idx(b)];
    if (hops < 0) return std::nullopt;
    return hops * cell_size_;
  }

  // Geodesic meters from `from` to the closest instance of the category.
  // Missing category is a malformed episode; unreachable instances yield an
  // empty result.
  std::optional<double> distance_to_nearest(Cell from, const std::string& category) const {
    std::vector<Cell> cells;
    for (const auto& o : objects_)
      if (o.category == category) cells.push_back(o.cell);
    require(!cells.empty(), Errc::invalid_input, "no instance of category: " + category);
    auto field = distance_field(cells);
    int hops = field[idx(from)];
    if (hops < 0) return std::nullopt;
    return hops * cell_size_;
  }

  std::vector<Cell> category_cells(const std::string& category) const {
    std::vector<Cell> cells;
    for (const auto& o : objects_)
      if (o.category == category) cells.push_back(o.cell);
    return cells;
  }

  // Wall-aware visibility between two free cells; the sight line is blocked
  // by any wall cell the segment passes through, corner grazes included.
  bool line_of_sight(Cell a, Cell b) const {
    return walk_segment(a, b, [this](Cell c) { return free(c); });
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["cell_size"] = cell_size_;
    j["grid"] = rows_;
    auto& jr = j["rooms"] = nlohmann::ordered_json::array();
    for (const auto& r : rooms_) {
      nlohmann::ordered_json room;
      room["id"] = r.id;
      room["type"] = r.type;
      auto& cells = room["cells"] = nlohmann::ordered_json::array();
      for (Cell c : r.cells) cells.push_back({c.x, c.y});
      jr.push_back(std::move(room));
    }
    auto& jo = j["objects"] = nlohmann::ordered_json::array();
    for (const auto& o : objects_) {
      nlohmann::ordered_json obj;
      obj["category"] = o.category;
      obj["cell"] = {o.cell.x, o.cell.y};
      obj["room"] = o.room_id;
      jo.push_back(std::move(obj));
    }
    j["start"] = {{"cell", {start_.cell.x, start_.cell.y}}, {"heading", start_.heading}};
    j["target"] = target_;
    return j;
  }

  static GridWorld from_json(const nlohmann::json& j) {
    try {
      require(j.at("version").get<int>() == 1, Errc::invalid_input, "unsupported world version");
      std::vector<std::string> rows = j.at("grid").get<std::vector<std::string>>();
      std::vector<Room> rooms;
      for (const auto& room : j.at("rooms")) {
        Room r;
        r.id = room.at("id").get<int>();
        r.type = room.at("type").get<std::string>();
        for (const auto& c : room.at("cells"))
          r.cells.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
        rooms.push_back(std::move(r));
      }
      std::vector<ObjectInstance> objects;
      for (const auto& obj : j.at("objects")) {
        ObjectInstance o;
        o.category = obj.at("category").get<std::string>();
        o.cell = {obj.at("cell").at(0).get<int>(), obj.at("cell").at(1).get<int>()};
        o.room_id = obj.at("room").get<int>();
        objects.push_back(std::move(o));
      }
      Pose start;
      start.cell = {j.at("start").at("cell").at(0).get<int>(),
                    j.at("start").at("cell").at(1).get<int>()};
      start.heading = j.at("start").at("heading").get<int>();
      return GridWorld(std::move(rows), j.at("cell_size").get<double>(), std::move(rooms),
                       std::move(objects), start, j.at("target").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::invalid_input, std::string("malformed world file: ") + e.what());
    }
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  static GridWorld parse(const std::string& text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::invalid_input, std::string("world file is not valid JSON: ") + e.what());
    }
    return from_json(j);
  }

  static GridWorld load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::invalid_input, "cannot open world file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), Errc::invalid_input, "cannot write world file: " + path);
    out << serialize();
  }

  uint64_t content_hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : serialize()) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  int idx(Cell c) const { return c.y * width_ + c.x; }

  void validate() {
    require(!rows_.empty() && !rows_[0].empty(), Errc::invalid_input, "empty grid");
    height_ = static_cast<int>(rows_.size());
    width_ = static_cast<int>(rows_[0].size());
    require(cell_size_ > 0.0, Errc::invalid_input, "cell_size must be positive");
    require(!target_.empty(), Errc::invalid_input, "empty target category");
    for (const auto& row : rows_) {
      require(static_cast<int>(row.size()) == width_, Errc::invalid_input, "ragged grid rows");
      for (char c : row)
        require(c == '#' || c == '.', Errc::invalid_input, "grid cells must be '#' or '.'");
    }
    for (int x = 0; x < width_; ++x)
      require(rows_[0][x] == '#' && rows_[height_ - 1][x] == '#', Errc::invalid_input,
              "grid boundary must be walls");
    for (int y = 0; y < height_; ++y)
      require(rows_[y][0] == '#' && rows_[y][width_ - 1] == '#', Errc::invalid_input,
              "grid boundary must be walls");
  }

  void index() {
    room_of_.assign(static_cast<size_t>(width_) * height_, -1);
    for (size_t ri = 0; ri < rooms_.size(); ++ri) {
      auto& r = rooms_[ri];
      require(!r.type.empty(), Errc::invalid_input, "room with empty type");
      require(!r.cells.empty(), Errc::invalid_input, "room with no cells");
      require(r.id >= 0 && r.id <= 32000, Errc::invalid_input,
              "room id out of range: " + std::to_string(r.id));
      require(!room_by_id_.count(r.id), Errc::invalid_input,
              "duplicate room id " + std::to_string(r.id));
      room_by_id_[r.id] = ri;
      for (Cell c : r.cells) {
        require(free(c), Errc::invalid_input, "room cell not free");
        require(room_of_[idx(c)] == -1, Errc::invalid_input, "cell assigned to two rooms");
        room_of_[idx(c)] = static_cast<int16_t>(r.id);
      }
      require(connected(r.cells), Errc::invalid_input,
              "room " + std::to_string(r.id) + " is not 4-connected");
    }
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x)
        require(!free({x, y}) || room_of_[idx({x, y})] != -1, Errc::invalid_input,
                "free cell belongs to no room");
    for (const auto& o : objects_) {
      require(free(o.cell), Errc::invalid_input, "object not on a free cell");
      require(room_id_at(o.cell) == o.room_id, Errc::invalid_input,
              "object room does not match its cell");
      require(!o.category.empty(), Errc::invalid_input, "object with empty category");
    }
    require(free(start_.cell), Errc::invalid_input, "start not on a free cell");
    require(start_.heading % 30 == 0 && start_.heading >= 0 && start_.heading < 360,
            Errc::invalid_input, "start heading not a multiple of 30 in [0,360)");
  }

  bool connected(const std::vector<Cell>& cells) const {
    if (cells.empty()) return true;
    std::vector<Cell> stack{cells[0]};
    std::vector<uint8_t> seen(static_cast<size_t>(width_) * height_, 0);
    std::vector<uint8_t> member(static_cast<size_t>(width_) * height_, 0);
    for (Cell c : cells) member[idx(c)] = 1;
    seen[idx(cells[0])] = 1;
    size_t found = 1;
    while (!stack.empty()) {
      Cell c = stack.back();
      stack.pop_back();
      for (Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1},
                     Cell{c.x, c.y - 1}}) {
        if (!in_bounds(n) || !member[idx(n)] || seen[idx(n)]) continue;
        seen[idx(n)] = 1;
        ++found;
        stack.push_back(n);
      }
    }
    return found == cells.size();
  }

  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.25;
  std::vector<std::string> rows_;
  std::vector<Room> rooms_;
  std::vector<ObjectInstance> objects_;
  Pose start_;
  std::string target_;
  std::vector<int16_t> room_of_;
  std::map<int, size_t> room_by_id_;
};

}  // namespace panonav
