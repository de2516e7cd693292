#pragma once

// Independent reference implementations and scene builders used only by the
// tests. Kept deliberately naive and textually unrelated to the library code
// so the two cannot share a bug.

#include <deque>
#include <string>
#include <tuple>
#include <vector>

#include "panonav/metrics.hpp"
#include "panonav/perception.hpp"
#include "panonav/world.hpp"

namespace oracles {

using panonav::Cell;
using panonav::DirectionalView;
using panonav::GridWorld;
using panonav::ObjectInstance;
using panonav::Pose;
using panonav::Relation;
using panonav::Room;
using panonav::ScaffoldGrid;
using panonav::SpatialRelationGraph;

// Plain queue-based breadth-first search; neighbor order differs from the
// library's traversal on purpose.
inline std::vector<int> bfs_hops(const GridWorld& w, const std::vector<Cell>& sources) {
  std::vector<int> dist(static_cast<size_t>(w.width()) * w.height(), -1);
  std::deque<Cell> q;
  for (Cell s : sources) {
    if (!w.free(s)) continue;
    size_t i = static_cast<size_t>(s.y) * w.width() + s.x;
    if (dist[i] == 0) continue;
    dist[i] = 0;
    q.push_back(s);
  }
  const int dx[4] = {0, 1, 0, -1};
  const int dy[4] = {-1, 0, 1, 0};
  while (!q.empty()) {
    Cell c = q.front();
    q.pop_front();
    int d = dist[static_cast<size_t>(c.y) * w.width() + c.x];
    for (int k = 0; k < 4; ++k) {
      Cell n{c.x + dx[k], c.y + dy[k]};
      if (!w.free(n)) continue;
      size_t j = static_cast<size_t>(n.y) * w.width() + n.x;
      if (dist[j] != -1) continue;
      dist[j] = d + 1;
      q.push_back(n);
    }
  }
  return dist;
}

// Straight transcription of the success-weighted path-length formula.
inline double spl_reference(const std::vector<panonav::EpisodeResult>& rs) {
  double acc = 0.0;
  for (const auto& r : rs) {
    double denom = r.rho_m > r.ell_m ? r.rho_m : r.ell_m;
    acc += r.s * r.ell_m / denom;
  }
  return 100.0 * acc / static_cast<double>(rs.size());
}

// Relation edges written as comparable tuples so edge sets from different
// producers can be sorted and compared.
using EdgeKey = std::tuple<int, int, int, double>;

inline std::vector<EdgeKey> edge_keys(const SpatialRelationGraph& g) {
  std::vector<EdgeKey> keys;
  for (const auto& e : g.edges)
    keys.emplace_back(e.a, e.b, static_cast<int>(e.rel), e.magnitude_m.value_or(0.0));
  std::sort(keys.begin(), keys.end());
  return keys;
}

// Expected relation set by enumerating every ordered entity pair directly.
inline std::vector<EdgeKey> expected_relations(const DirectionalView& v, const ScaffoldGrid& m) {
  std::vector<EdgeKey> keys;
  int n = static_cast<int>(v.entities.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (v.entities[i].range_m < v.entities[j].range_m)
        keys.emplace_back(i, j, static_cast<int>(Relation::closer_than),
                          v.entities[j].range_m - v.entities[i].range_m);
      auto [ri, ci] = m.anchors[i];
      auto [rj, cj] = m.anchors[j];
      if (ci < cj)
        keys.emplace_back(i, j, static_cast<int>(Relation::left_of), 0.0);
      else if (ci == cj && ri < rj)
        keys.emplace_back(i, j, static_cast<int>(Relation::above), 0.0);
    }
  std::sort(keys.begin(), keys.end());
  return keys;
}

inline std::vector<std::string> open_box(int w, int h) {
  std::vector<std::string> rows(h, std::string(w, '.'));
  for (int x = 0; x < w; ++x) rows[0][x] = rows[h - 1][x] = '#';
  for (int y = 0; y < h; ++y) rows[y][0] = rows[y][w - 1] = '#';
  return rows;
}

inline std::vector<Cell> free_cells(const std::vector<std::string>& rows) {
  std::vector<Cell> out;
  for (int y = 0; y < static_cast<int>(rows.size()); ++y)
    for (int x = 0; x < static_cast<int>(rows[y].size()); ++x)
      if (rows[y][x] == '.') out.push_back({x, y});
  return out;
}

// World whose free cells form one room. Rows must already be a valid grid
// (rectangular, walled boundary, connected interior).
inline GridWorld simple_world(std::vector<std::string> rows, std::vector<ObjectInstance> objects,
                              Pose start, std::string target,
                              std::string room_type = "living_room", double cell_size = 0.25) {
  Room room;
  room.id = 0;
  room.type = std::move(room_type);
  room.cells = free_cells(rows);
  for (auto& o : objects) o.room_id = 0;
  return GridWorld(std::move(rows), cell_size, {room}, std::move(objects), start,
                   std::move(target));
}

inline panonav::GlobalSummary make_summary(int t, std::string room,
                                           std::vector<std::string> inventory) {
  panonav::GlobalSummary gs;
  gs.timestep = t;
  gs.room_type = std::move(room);
  std::sort(inventory.begin(), inventory.end());
  inventory.erase(std::unique(inventory.begin(), inventory.end()), inventory.end());
  gs.inventory = std::move(inventory);
  gs.text = "summary";
  return gs;
}

}  // namespace oracles
