#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "panonav/error.hpp"
#include "panonav/priors.hpp"
#include "panonav/rng.hpp"
#include "panonav/world.hpp"

namespace panonav {

struct GeneratorParams {
  int width = 33;
  int height = 21;
  int rooms = 5;
  double cell_size = 0.25;
  std::string target = "sofa";
  // Deceptive layout: rooms form a row joined by wide doorways; the start
  // room is typed as the target's most likely room but holds everything
  // typical except the target, which sits in the geodesic-farthest room.
  bool deceptive = false;
  int door_width = 2;
  int min_room_span = 4;
};

namespace detail {

struct Rect {
  int x0, y0, x1, y1;  // inclusive free region

  int w() const { return x1 - x0 + 1; }
  int h() const { return y1 - y0 + 1; }
  bool contains(Cell c) const { return c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1; }
};

struct DoorCell {
  Cell cell;
  Cell neighbor;  // free cell whose room the door joins
};

struct Layout {
  std::vector<std::string> rows;
  std::vector<Rect> leaves;
  std::vector<DoorCell> doors;
  std::vector<std::vector<int>> adj;  // leaf adjacency via doors
};

inline std::vector<int> flood_hops(const std::vector<std::string>& rows, Cell from) {
  int w = static_cast<int>(rows[0].size());
  int h = static_cast<int>(rows.size());
  std::vector<int> dist(static_cast<size_t>(w) * h, -1);
  std::deque<Cell> frontier{from};
  dist[from.y * w + from.x] = 0;
  while (!frontier.empty()) {
    Cell c = frontier.front();
    frontier.pop_front();
    int d = dist[c.y * w + c.x];
    for (Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1},
                   Cell{c.x, c.y - 1}}) {
      if (n.x < 0 || n.x >= w || n.y < 0 || n.y >= h) continue;
      if (rows[n.y][n.x] != '.' || dist[n.y * w + n.x] != -1) continue;
      dist[n.y * w + n.x] = d + 1;
      frontier.push_back(n);
    }
  }
  return dist;
}

inline std::optional<Layout> carve_layout(const GeneratorParams& p, Rng& rng) {
  Layout out;
  out.rows.assign(p.height, std::string(p.width, '#'));
  Rect whole{1, 1, p.width - 2, p.height - 2};
  for (int y = whole.y0; y <= whole.y1; ++y)
    for (int x = whole.x0; x <= whole.x1; ++x) out.rows[y][x] = '.';

  struct Split {
    bool vertical;
    int line;
    int lo, hi;   // wall segment extent along the line
    int a, b;     // leaf list indices of the two children at split time
  };
  std::vector<Rect> leaves{whole};
  std::vector<Split> splits;
  int span = p.min_room_span;
  while (static_cast<int>(leaves.size()) < p.rooms) {
    int best = -1;
    for (size_t i = 0; i < leaves.size(); ++i) {
      const Rect& r = leaves[i];
      if (std::max(r.w(), r.h()) < 2 * span + 1) continue;
      if (best < 0 || std::max(r.w(), r.h()) > std::max(leaves[best].w(), leaves[best].h()))
        best = static_cast<int>(i);
    }
    if (best < 0) return std::nullopt;
    Rect r = leaves[best];
    bool vertical = r.w() >= r.h();
    if (vertical) {
      int line = r.x0 + span + static_cast<int>(rng.below(r.w() - 2 * span));
      for (int y = r.y0; y <= r.y1; ++y) out.rows[y][line] = '#';
      leaves[best] = {r.x0, r.y0, line - 1, r.y1};
      leaves.push_back({line + 1, r.y0, r.x1, r.y1});
      splits.push_back({true, line, r.y0, r.y1, best, static_cast<int>(leaves.size()) - 1});
    } else {
      int line = r.y0 + span + static_cast<int>(rng.below(r.h() - 2 * span));
      for (int x = r.x0; x <= r.x1; ++x) out.rows[line][x] = '#';
      leaves[best] = {r.x0, r.y0, r.x1, line - 1};
      leaves.push_back({r.x0, line + 1, r.x1, r.y1});
      splits.push_back({false, line, r.x0, r.x1, best, static_cast<int>(leaves.size()) - 1});
    }
  }
  out.leaves = leaves;
  out.adj.assign(leaves.size(), {});

  auto leaf_of = [&leaves](Cell c) {
    for (size_t i = 0; i < leaves.size(); ++i)
      if (leaves[i].contains(c)) return static_cast<int>(i);
    return -1;
  };

  for (const auto& s : splits) {
    std::vector<int> offsets;
    for (int o = s.lo; o + p.door_width - 1 <= s.hi; ++o) {
      bool ok = true;
      for (int k = 0; k < p.door_width && ok; ++k) {
        Cell door = s.vertical ? Cell{s.line, o + k} : Cell{o + k, s.line};
        Cell neg = s.vertical ? Cell{s.line - 1, o + k} : Cell{o + k, s.line - 1};
        Cell pos = s.vertical ? Cell{s.line + 1, o + k} : Cell{o + k, s.line + 1};
        ok = out.rows[neg.y][neg.x] == '.' && out.rows[pos.y][pos.x] == '.' &&
             out.rows[door.y][door.x] == '#' && leaf_of(neg) >= 0 && leaf_of(pos) >= 0;
      }
      if (ok) offsets.push_back(o);
    }
    if (offsets.empty()) return std::nullopt;
    int o = offsets[rng.below(offsets.size())];
    int la = -1, lb = -1;
    for (int k = 0; k < p.door_width; ++k) {
      Cell door = s.vertical ? Cell{s.line, o + k} : Cell{o + k, s.line};
      Cell neg = s.vertical ? Cell{s.line - 1, o + k} : Cell{o + k, s.line - 1};
      Cell pos = s.vertical ? Cell{s.line + 1, o + k} : Cell{o + k, s.line + 1};
      out.rows[door.y][door.x] = '.';
      out.doors.push_back({door, neg});
      la = leaf_of(neg);
      lb = leaf_of(pos);
    }
    if (la >= 0 && lb >= 0) {
      out.adj[la].push_back(lb);
      out.adj[lb].push_back(la);
    }
  }
  return out;
}

// Row of full-height room slabs joined by half-height doorways that
// alternate between the top and bottom of each shared wall. Axis-aligned
// walks cross rooms without threading narrow openings, so room-to-room
// travel stays a decision problem rather than a motor problem, while the
// staggered openings block straight sight lines across several rooms.
inline std::optional<Layout> carve_enfilade(const GeneratorParams& p, Rng& rng) {
  Layout out;
  out.rows.assign(p.height, std::string(p.width, '#'));
  Rect whole{1, 1, p.width - 2, p.height - 2};
  for (int y = whole.y0; y <= whole.y1; ++y)
    for (int x = whole.x0; x <= whole.x1; ++x) out.rows[y][x] = '.';

  int walls = p.rooms - 1;
  int base = (whole.w() - walls) / p.rooms;
  int rem = (whole.w() - walls) % p.rooms;
  if (base < p.min_room_span) return std::nullopt;
  std::vector<int> widths(p.rooms, base);
  for (int i = 0; i < rem; ++i) widths[i]++;
  for (int i = 0; i + 1 < p.rooms; ++i) {
    int shift = static_cast<int>(rng.below(3)) - 1;
    if (shift < 0 && widths[i] > p.min_room_span) {
      widths[i]--;
      widths[i + 1]++;
    } else if (shift > 0 && widths[i + 1] > p.min_room_span) {
      widths[i]++;
      widths[i + 1]--;
    }
  }

  out.adj.assign(p.rooms, {});
  int x = whole.x0;
  for (int i = 0; i < p.rooms; ++i) {
    out.leaves.push_back({x, whole.y0, x + widths[i] - 1, whole.y1});
    if (i < walls) {
      int line = x + widths[i];
      for (int y = whole.y0; y <= whole.y1; ++y) out.rows[y][line] = '#';
      int mid = (whole.y0 + whole.y1) / 2;
      int lo = i % 2 == 0 ? whole.y0 : mid - 1;
      int hi = i % 2 == 0 ? mid + 1 : whole.y1;
      for (int y = lo; y <= hi; ++y) {
        out.rows[y][line] = '.';
        out.doors.push_back({{line, y}, {line - 1, y}});
      }
      out.adj[i].push_back(i + 1);
      out.adj[i + 1].push_back(i);
      x = line + 1;
    }
  }
  return out;
}

}  // namespace detail

inline GridWorld generate_world(uint64_t seed, const GeneratorParams& p,
                                const PriorTable& priors) {
  require(p.rooms >= 1, Errc::invalid_input, "room count must be at least 1");
  require(!p.deceptive || p.rooms >= 2, Errc::invalid_input,
          "deceptive layout needs at least 2 rooms");
  require(p.width >= 7 && p.height >= 7, Errc::invalid_input, "grid too small");
  require(p.door_width >= 1 && p.min_room_span >= 2, Errc::invalid_input,
          "bad door or room span parameters");
  require(!p.target.empty(), Errc::invalid_input, "empty target category");

  const std::vector<std::string> pool = {"living_room", "bedroom", "kitchen",
                                         "bathroom",    "office",  "hallway"};
  Rng base(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng rng = base.fork(1000 + attempt);
    auto layout = p.deceptive ? detail::carve_enfilade(p, rng) : detail::carve_layout(p, rng);
    if (!layout) continue;
    auto& lay = *layout;
    int nleaves = static_cast<int>(lay.leaves.size());

    std::vector<std::string> types(nleaves);
    int start_leaf = 0, target_leaf = 0;
    Cell start_cell;
    if (p.deceptive) {
      start_leaf = rng.chance(0.5) ? 0 : nleaves - 1;
      const detail::Rect& sr = lay.leaves[start_leaf];
      start_cell = {(sr.x0 + sr.x1) / 2, (sr.y0 + sr.y1) / 2};
      auto hops = detail::flood_hops(lay.rows, start_cell);
      auto leaf_dist = [&](int leaf) {
        const detail::Rect& r = lay.leaves[leaf];
        int best = -1;
        for (int y = r.y0; y <= r.y1; ++y)
          for (int x = r.x0; x <= r.x1; ++x) {
            int d = hops[y * p.width + x];
            if (d > best) best = d;
          }
        return best;
      };
      target_leaf = -1;
      int far = -1;
      for (int i = 0; i < nleaves; ++i) {
        if (i == start_leaf) continue;
        int d = leaf_dist(i);
        if (d > far) {
          far = d;
          target_leaf = i;
        }
      }
      if (target_leaf < 0 || far <= 0) continue;

      std::string start_type = priors.deceptive_room_for(p.target);
      types[start_leaf] = start_type;
      std::vector<std::string> others;
      for (const auto& t : pool)
        if (t != start_type && t != "hallway") others.push_back(t);
      rng.shuffle(others);
      size_t next = 0;
      for (int i = 0; i < nleaves; ++i) {
        if (i == start_leaf) continue;
        types[i] = others[next++ % others.size()];
      }
      if (nleaves >= 3 && !lay.adj[start_leaf].empty()) {
        std::vector<int> cands = lay.adj[start_leaf];
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        int hall = cands[rng.below(cands.size())];
        if (hall != target_leaf) types[hall] = "hallway";
      }
    } else {
      std::vector<std::string> bag = pool;
      rng.shuffle(bag);
      for (int i = 0; i < nleaves; ++i) types[i] = bag[i % bag.size()];
      start_leaf = static_cast<int>(rng.below(nleaves));
      target_leaf = static_cast<int>(rng.below(nleaves));
      const detail::Rect& sr = lay.leaves[start_leaf];
      start_cell = {sr.x0 + static_cast<int>(rng.below(sr.w())),
                    sr.y0 + static_cast<int>(rng.below(sr.h()))};
    }

    std::vector<Room> rooms(nleaves);
    for (int i = 0; i < nleaves; ++i) {
      rooms[i].id = i;
      rooms[i].type = types[i];
      const detail::Rect& r = lay.leaves[i];
      for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x)
          if (lay.rows[y][x] == '.') rooms[i].cells.push_back({x, y});
    }
    auto leaf_of = [&lay](Cell c) {
      for (size_t i = 0; i < lay.leaves.size(); ++i)
        if (lay.leaves[i].contains(c)) return static_cast<int>(i);
      return -1;
    };
    for (const auto& d : lay.doors) {
      int leaf = leaf_of(d.neighbor);
      if (leaf < 0) continue;
      rooms[leaf].cells.push_back(d.cell);
    }
    for (auto& r : rooms)
      std::sort(r.cells.begin(), r.cells.end(),
                [](Cell a, Cell b) { return a.y < b.y || (a.y == b.y && a.x < b.x); });

    std::vector<ObjectInstance> objects;
    std::vector<uint8_t> occupied(static_cast<size_t>(p.width) * p.height, 0);
    occupied[start_cell.y * p.width + start_cell.x] = 1;
    auto place = [&](int leaf, const std::string& category) {
      const detail::Rect& r = lay.leaves[leaf];
      std::vector<Cell> cands;
      for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x)
          if (lay.rows[y][x] == '.' && !occupied[y * p.width + x]) cands.push_back({x, y});
      if (cands.empty()) return false;
      Cell c = cands[rng.below(cands.size())];
      occupied[c.y * p.width + c.x] = 1;
      objects.push_back({category, c, leaf});
      return true;
    };
    // Nearest free cell to a wanted spot, ties broken by scan order.
    auto place_at = [&](int leaf, const std::string& category, Cell want) {
      const detail::Rect& r = lay.leaves[leaf];
      Cell best{-1, -1};
      int best_d = -1;
      for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) {
          if (lay.rows[y][x] != '.' || occupied[y * p.width + x]) continue;
          int d = std::abs(x - want.x) + std::abs(y - want.y);
          if (best_d < 0 || d < best_d) {
            best_d = d;
            best = {x, y};
          }
        }
      if (best_d < 0) return false;
      occupied[best.y * p.width + best.x] = 1;
      objects.push_back({category, best, leaf});
      return true;
    };

    bool ok = true;
    Cell target_cell{-1, -1};
    if (p.deceptive) {
      // Each room's furnishings form one tight cluster at its center, two
      // of each kind. Doorways overlap around the middle rows, so from the
      // neighborhood of one cluster the next room's furniture shows through
      // the opening while the rest of its floor stays bare.
      auto anchor_of = [&](int leaf) {
        const detail::Rect& r = lay.leaves[leaf];
        return Cell{(r.x0 + r.x1) / 2, (r.y0 + r.y1) / 2};
      };
      static const int spread[][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}};
      ok = place_at(target_leaf, p.target, anchor_of(target_leaf));
      if (ok) target_cell = objects.back().cell;
      for (int i = 0; i < nleaves && ok; ++i) {
        std::vector<std::string> cats;
        for (const auto& cat : priors.typical_objects(types[i], 0.10))
          if (cat != p.target) cats.push_back(cat);
        if (cats.size() > 3) cats.resize(3);
        Cell a = anchor_of(i);
        size_t doubled = 2 * cats.size();
        for (size_t j = 0; j < doubled && ok; ++j) {
          const int* d = spread[j % 6];
          ok = ok && place_at(i, cats[j % cats.size()], {a.x + d[0], a.y + d[1]});
        }
      }
    } else {
      ok = place(target_leaf, p.target);
      if (ok) target_cell = objects.back().cell;
      for (int i = 0; i < nleaves && ok; ++i)
        for (const auto& cat : priors.typical_objects(types[i])) ok = ok && place(i, cat);
    }
    if (!ok) continue;

    if (!p.deceptive) {
      const detail::Rect& sr = lay.leaves[start_leaf];
      if (start_cell == target_cell) {
        std::vector<Cell> cands;
        for (int y = sr.y0; y <= sr.y1; ++y)
          for (int x = sr.x0; x <= sr.x1; ++x)
            if (!(Cell{x, y} == target_cell)) cands.push_back({x, y});
        if (cands.empty()) continue;
        start_cell = cands[rng.below(cands.size())];
      }
    }
    auto hops = detail::flood_hops(lay.rows, start_cell);
    int target_hops = hops[target_cell.y * p.width + target_cell.x];
    if (target_hops <= 4) continue;

    Pose start;
    start.cell = start_cell;
    start.heading = 30 * rng.range(0, 11);
    return GridWorld(lay.rows, p.cell_size, std::move(rooms), std::move(objects), start,
                     p.target);
  }
  fail(Errc::invalid_input, "could not fit the requested rooms into the grid");
}

inline GridWorld generate_world(uint64_t seed, const GeneratorParams& p) {
  return generate_world(seed, p, PriorTable::builtin());
}

}  // namespace panonav
