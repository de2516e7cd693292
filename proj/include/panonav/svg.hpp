#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "panonav/error.hpp"
#include "panonav/trajectory.hpp"
#include "panonav/world.hpp"

namespace panonav {

namespace detail {

inline std::string room_fill(const std::string& type) {
  static const std::map<std::string, std::string> palette = {
      {"living_room", "#f6ddc5"}, {"bedroom", "#cfe0f5"}, {"kitchen", "#d8eccd"},
      {"bathroom", "#cdeae6"},    {"office", "#e4d7f0"},  {"hallway", "#ececec"}};
  auto it = palette.find(type);
  return it == palette.end() ? "#f0e8e8" : it->second;
}

inline std::string object_fill(const std::string& category) {
  static const std::vector<std::string> palette = {"#c2643f", "#3f7ac2", "#4f9d53", "#9d4f93",
                                                   "#b08a2e", "#2e9d96", "#77552e", "#556070"};
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : category) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return palette[h % palette.size()];
}

}  // namespace detail

// Top-down picture of one episode: tinted rooms, walls, object markers, the
// walked polyline with waypoint dots, start and stop markers. Pure function
// of (world, log); output bytes are stable.
inline std::string render_trajectory_svg(const GridWorld& world, const TrajectoryLog& log) {
  require(log.world_hash == to_hex(world.content_hash()), Errc::invalid_input,
          "trajectory log does not belong to this world");
  const int s = 24;  // pixels per cell
  int w = world.width() * s, h = world.height() * s;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";

  for (const auto& room : world.rooms()) {
    out << "<g fill=\"" << detail::room_fill(room.type) << "\">\n";
    for (Cell c : room.cells)
      out << "<rect x=\"" << c.x * s << "\" y=\"" << c.y * s << "\" width=\"" << s
          << "\" height=\"" << s << "\"/>\n";
    out << "</g>\n";
  }
  out << "<g fill=\"#3c3644\">\n";
  for (int y = 0; y < world.height(); ++y)
    for (int x = 0; x < world.width(); ++x)
      if (world.wall({x, y}))
        out << "<rect x=\"" << x * s << "\" y=\"" << y * s << "\" width=\"" << s
            << "\" height=\"" << s << "\"/>\n";
  out << "</g>\n";

  auto cx = [s](Cell c) { return c.x * s + s / 2; };
  auto cy = [s](Cell c) { return c.y * s + s / 2; };

  for (const auto& obj : world.objects()) {
    bool is_target = obj.category == world.target_category();
    out << "<circle cx=\"" << cx(obj.cell) << "\" cy=\"" << cy(obj.cell) << "\" r=\"" << s / 3
        << "\" fill=\"" << detail::object_fill(obj.category) << "\"";
    if (is_target) out << " stroke=\"#d41111\" stroke-width=\"3\"";
    out << "><title>" << obj.category << "</title></circle>\n";
  }

  std::vector<Cell> path{log.start.cell};
  for (const auto& wp : log.waypoints)
    for (const auto& st : wp.steps)
      if (st.outcome.moved) path.push_back(st.pose_after.cell);
  if (path.size() > 1) {
    out << "<polyline fill=\"none\" stroke=\"#1f5fd4\" stroke-width=\"3\" "
           "stroke-linejoin=\"round\" stroke-linecap=\"round\" points=\"";
    for (size_t i = 0; i < path.size(); ++i) {
      if (i) out << " ";
      out << cx(path[i]) << "," << cy(path[i]);
    }
    out << "\"/>\n";
  }
  for (const auto& wp : log.waypoints)
    out << "<circle cx=\"" << cx(wp.pose.cell) << "\" cy=\"" << cy(wp.pose.cell)
        << "\" r=\"4\" fill=\"#10316e\"/>\n";

  Cell end = path.back();
  out << "<circle cx=\"" << cx(log.start.cell) << "\" cy=\"" << cy(log.start.cell)
      << "\" r=\"" << s / 3 << "\" fill=\"none\" stroke=\"#0a7d32\" stroke-width=\"4\"/>\n";
  out << "<g stroke=\"#111111\" stroke-width=\"3\">\n";
  out << "<line x1=\"" << cx(end) - s / 4 << "\" y1=\"" << cy(end) - s / 4 << "\" x2=\""
      << cx(end) + s / 4 << "\" y2=\"" << cy(end) + s / 4 << "\"/>\n";
  out << "<line x1=\"" << cx(end) - s / 4 << "\" y1=\"" << cy(end) + s / 4 << "\" x2=\""
      << cx(end) + s / 4 << "\" y2=\"" << cy(end) - s / 4 << "\"/>\n";
  out << "</g>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace panonav
