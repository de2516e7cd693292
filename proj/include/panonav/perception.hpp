#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "panonav/error.hpp"
#include "panonav/geometry.hpp"
#include "panonav/priors.hpp"
#include "panonav/world.hpp"

namespace panonav {

struct ViewEntity {
  std::string category;
  double range_m = 0.0;
  double bearing_deg = 0.0;  // within [-30,30); more negative renders as "left"
};

// One sixth of the panorama. `present` is false for sectors masked out by
// limited-view mode; masked sectors carry no data.
struct DirectionalView {
  int sector = 1;
  bool present = true;
  std::vector<ViewEntity> entities;
  std::optional<double> wall_distance_ahead;
  std::map<std::string, int> visible_room_cells;  // room type -> cell count
};

struct PanoramaOptions {
  double max_range_m = 5.0;
};

// Distance from the agent to the first wall surface along a fixed direction,
// in cell units; empty when no wall within range. Grid walk with a
// conservative tie rule: grazing a corner hits if either flanking cell is a
// wall.
inline std::optional<double> wall_ray_cells(const GridWorld& world, Cell from, int angle_deg,
                                            double max_range_cells) {
  double dx = cos30(angle_deg), dy = sin30(angle_deg);
  int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  double tdx = dx == 0 ? 0 : 1.0 / std::abs(dx);
  double tdy = dy == 0 ? 0 : 1.0 / std::abs(dy);
  double tmx = sx == 0 ? std::numeric_limits<double>::infinity() : 0.5 * tdx;
  double tmy = sy == 0 ? std::numeric_limits<double>::infinity() : 0.5 * tdy;
  Cell c = from;
  while (true) {
    double t;
    if (tmx < tmy) {
      t = tmx;
      if (t > max_range_cells) return std::nullopt;
      c.x += sx;
      tmx += tdx;
    } else if (tmy < tmx) {
      t = tmy;
      if (t > max_range_cells) return std::nullopt;
      c.y += sy;
      tmy += tdy;
    } else {
      t = tmx;
      if (t > max_range_cells) return std::nullopt;
      Cell side_a{c.x + sx, c.y}, side_b{c.x, c.y + sy};
      if (world.wall(side_a) || world.wall(side_b)) return t;
      c.x += sx;
      c.y += sy;
      tmx += tdx;
      tmy += tdy;
    }
    if (world.wall(c)) return t;
  }
}

inline std::array<DirectionalView, 6> capture_panorama(const GridWorld& world, const Pose& pose,
                                                       const PanoramaOptions& opts = {}) {
  world.validate_pose(pose);
  std::array<DirectionalView, 6> views;
  for (int k = 0; k < 6; ++k) views[k].sector = k + 1;

  double max_cells = opts.max_range_m / world.cell_size();
  auto within_range = [&](Cell c) {
    double d2 = static_cast<double>(dist2(pose.cell, c));
    return d2 <= max_cells * max_cells;
  };

  for (const auto& obj : world.objects()) {
    // An object underfoot has no bearing; it belongs to no sector.
    if (obj.cell == pose.cell) continue;
    if (!within_range(obj.cell)) continue;
    if (!world.line_of_sight(pose.cell, obj.cell)) continue;
    int dx = obj.cell.x - pose.cell.x, dy = obj.cell.y - pose.cell.y;
    int sector = sector_of(dx, dy, pose.heading);
    ViewEntity e;
    e.category = obj.category;
    e.range_m = std::sqrt(static_cast<double>(dist2(pose.cell, obj.cell))) * world.cell_size();
    e.bearing_deg = sector_bearing(dx, dy, pose.heading, sector);
    views[sector - 1].entities.push_back(std::move(e));
  }
  for (auto& v : views)
    std::sort(v.entities.begin(), v.entities.end(), [](const ViewEntity& a, const ViewEntity& b) {
      if (a.range_m != b.range_m) return a.range_m < b.range_m;
      if (a.bearing_deg != b.bearing_deg) return a.bearing_deg < b.bearing_deg;
      return a.category < b.category;
    });

  for (int y = 0; y < world.height(); ++y)
    for (int x = 0; x < world.width(); ++x) {
      Cell c{x, y};
      if (!world.free(c) || c == pose.cell) continue;
      if (!within_range(c) || !world.line_of_sight(pose.cell, c)) continue;
      int sector = sector_of(c.x - pose.cell.x, c.y - pose.cell.y, pose.heading);
      views[sector - 1].visible_room_cells[world.room_type_at(c)]++;
    }

  for (int k = 0; k < 6; ++k)
    if (auto t = wall_ray_cells(world, pose.cell, pose.heading + 60 * k, max_cells))
      views[k].wall_distance_ahead = *t * world.cell_size();
  return views;
}

// Limited three-view mode keeps the forward fan (sectors 6, 1, 2) and blanks
// the rear sectors.
inline void mask_to_limited(std::array<DirectionalView, 6>& views) {
  for (int sector : {3, 4, 5}) {
    auto& v = views[sector - 1];
    v.present = false;
    v.entities.clear();
    v.visible_room_cells.clear();
    v.wall_distance_ahead.reset();
  }
}

// Anchor grid over (range, bearing): nearer entities land on larger row
// indices, bearing sweeps columns monotonically. Collisions share an anchor.
struct ScaffoldGrid {
  int rows = 6;
  int cols = 6;
  std::vector<std::pair<int, int>> anchors;  // aligned with view.entities
};

inline ScaffoldGrid scaffold(const DirectionalView& view, double max_range_m, int rows = 6,
                             int cols = 6) {
  require(rows >= 1 && cols >= 1 && max_range_m > 0, Errc::invalid_input,
          "bad scaffold dimensions");
  ScaffoldGrid m;
  m.rows = rows;
  m.cols = cols;
  for (const auto& e : view.entities) {
    int row = static_cast<int>(std::floor((1.0 - e.range_m / max_range_m) * rows));
    int col = static_cast<int>(std::floor((e.bearing_deg + 30.0) / 60.0 * cols));
    row = std::clamp(row, 0, rows - 1);
    col = std::clamp(col, 0, cols - 1);
    m.anchors.push_back({row, col});
  }
  return m;
}

enum class Relation { closer_than, farther_than, left_of, right_of, above, below };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::closer_than: return "closer_than";
    case Relation::farther_than: return "farther_than";
    case Relation::left_of: return "left_of";
    case Relation::right_of: return "right_of";
    case Relation::above: return "above";
    case Relation::below: return "below";
  }
  fail(Errc::contract, "bad relation value");
}

struct RelationEdge {
  int a = 0;  // entity indices into the owning view
  int b = 0;
  Relation rel = Relation::closer_than;
  std::optional<double> magnitude_m;

  bool operator==(const RelationEdge&) const = default;
};

struct SpatialRelationGraph {
  std::vector<RelationEdge> edges;
};

// Pairwise relations in canonical spelling: closer_than for unequal ranges,
// left_of for unequal anchor columns, above only when columns tie and rows
// differ (the higher row is the nearer entity, so the smaller row is above).
// Exact ties emit nothing.
inline SpatialRelationGraph parse_spatial_relations(const DirectionalView& view,
                                                    const ScaffoldGrid& m) {
  require(m.anchors.size() == view.entities.size(), Errc::invalid_input,
          "scaffold does not match view");
  SpatialRelationGraph g;
  int n = static_cast<int>(view.entities.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double ri = view.entities[i].range_m, rj = view.entities[j].range_m;
      if (ri < rj)
        g.edges.push_back({i, j, Relation::closer_than, rj - ri});
      else if (rj < ri)
        g.edges.push_back({j, i, Relation::closer_than, ri - rj});
      auto [rowi, coli] = m.anchors[i];
      auto [rowj, colj] = m.anchors[j];
      if (coli < colj)
        g.edges.push_back({i, j, Relation::left_of, std::nullopt});
      else if (colj < coli)
        g.edges.push_back({j, i, Relation::left_of, std::nullopt});
      else if (rowi < rowj)
        g.edges.push_back({i, j, Relation::above, std::nullopt});
      else if (rowj < rowi)
        g.edges.push_back({j, i, Relation::above, std::nullopt});
    }
  return g;
}

struct LocalDescription {
  int sector = 1;
  bool present = true;
  std::vector<ViewEntity> entities;
  SpatialRelationGraph relations;
  std::string room_type_guess = "unknown";
  double target_likelihood = 0.0;
  double richness = 0.0;
  std::string text;
};

struct GlobalSummary {
  int timestep = 0;
  std::string room_type = "unknown";
  std::vector<std::string> inventory;  // sorted, unique
  std::string text;
};

inline std::string sector_tag(int sector) {
  switch (sector) {
    case 1: return "ahead";
    case 2: return "+60";
    case 3: return "+120";
    case 4: return "behind";
    case 5: return "-120";
    case 6: return "-60";
  }
  fail(Errc::contract, "sector out of range");
}

inline std::string entity_label(const std::vector<ViewEntity>& entities, int index) {
  const std::string& cat = entities[index].category;
  int total = 0, ordinal = 0;
  for (int i = 0; i < static_cast<int>(entities.size()); ++i) {
    if (entities[i].category != cat) continue;
    ++total;
    if (i <= index) ++ordinal;
  }
  if (total == 1) return cat;
  return cat + "#" + std::to_string(ordinal);
}

inline std::string bearing_phrase(double bearing_deg) {
  if (bearing_deg == 0.0) return "dead ahead";
  std::string mag = to_fixed(std::abs(bearing_deg), 0);
  if (mag == "0") mag = "1";  // sub-degree offsets still get a side
  return mag + " deg " + (bearing_deg < 0 ? "left" : "right");
}

inline std::string render_local_text(const LocalDescription& ld,
                                     const std::optional<double>& wall_distance) {
  std::ostringstream out;
  out << "Sector " << ld.sector << " (" << sector_tag(ld.sector) << "): ";
  if (!ld.present) {
    out << "no view available.";
    return out.str();
  }
  out << (ld.room_type_guess == "unknown" ? std::string("area type unclear")
                                          : "looks like " + ld.room_type_guess);
  if (ld.entities.empty()) {
    out << "; nothing notable in sight";
  } else {
    out << "; objects: ";
    for (size_t i = 0; i < ld.entities.size(); ++i) {
      if (i) out << ", ";
      out << entity_label(ld.entities, static_cast<int>(i)) << " at "
          << to_fixed(ld.entities[i].range_m, 2) << " m ("
          << bearing_phrase(ld.entities[i].bearing_deg) << ")";
    }
    for (const auto& e : ld.relations.edges) {
      out << "; " << entity_label(ld.entities, e.a) << " ";
      switch (e.rel) {
        case Relation::closer_than: out << "closer than"; break;
        case Relation::farther_than: out << "farther than"; break;
        case Relation::left_of: out << "left of"; break;
        case Relation::right_of: out << "right of"; break;
        case Relation::above: out << "above"; break;
        case Relation::below: out << "below"; break;
      }
      out << " " << entity_label(ld.entities, e.b);
    }
  }
  if (wall_distance)
    out << "; wall at " << to_fixed(*wall_distance, 2) << " m.";
  else
    out << "; open beyond visible range.";
  return out.str();
}

// Ground-truth parse of one sector: room guess by visible-cell majority,
// likelihood 1.0 on direct sighting and the room prior otherwise, richness a
// saturating entity count.
inline LocalDescription oracle_parse_local(const DirectionalView& view, const ScaffoldGrid& m,
                                           const std::string& target, const PriorTable& priors,
                                           int richness_cap = 8) {
  require(richness_cap >= 1, Errc::invalid_input, "richness cap must be positive");
  LocalDescription ld;
  ld.sector = view.sector;
  ld.present = view.present;
  if (!view.present) {
    ld.text = render_local_text(ld, std::nullopt);
    return ld;
  }
  ld.entities = view.entities;
  ld.relations = parse_spatial_relations(view, m);
  int best = 0;
  for (const auto& [type, count] : view.visible_room_cells)
    if (count > best) {  // map order makes ties resolve lexicographically
      best = count;
      ld.room_type_guess = type;
    }
  bool sighted = false;
  for (const auto& e : ld.entities) sighted = sighted || e.category == target;
  ld.target_likelihood = sighted ? 1.0 : priors.prior(ld.room_type_guess, target);
  ld.richness = std::min(1.0, static_cast<double>(ld.entities.size()) / richness_cap);
  ld.text = render_local_text(ld, view.wall_distance_ahead);
  return ld;
}

// Waypoint-level roll-up: object inventory across present sectors and a
// majority-vote room type. No coordinates anywhere in the text.
inline GlobalSummary summarize_global(const std::vector<LocalDescription>& lds, int timestep) {
  require(lds.size() == 6, Errc::invalid_input, "summary needs exactly six sector descriptions");
  GlobalSummary gs;
  gs.timestep = timestep;
  std::map<std::string, int> votes;
  for (const auto& ld : lds) {
    if (!ld.present) continue;
    votes[ld.room_type_guess]++;
    for (const auto& e : ld.entities) gs.inventory.push_back(e.category);
  }
  std::sort(gs.inventory.begin(), gs.inventory.end());
  gs.inventory.erase(std::unique(gs.inventory.begin(), gs.inventory.end()), gs.inventory.end());
  int best = 0;
  for (const auto& [type, count] : votes)
    if (count > best) {
      best = count;
      gs.room_type = type;
    }
  std::ostringstream text;
  text << "Waypoint " << timestep << ": "
       << (gs.room_type == "unknown" ? std::string("area type unclear")
                                     : "area looks like " + gs.room_type);
  if (gs.inventory.empty()) {
    text << "; nothing visible.";
  } else {
    text << "; visible objects: ";
    for (size_t i = 0; i < gs.inventory.size(); ++i) {
      if (i) text << ", ";
      text << gs.inventory[i];
    }
    text << ".";
  }
  gs.text = text.str();
  return gs;
}

// Seam between the runner and whatever turns raw views into descriptions:
// the ground-truth oracle here, the model-backed parser elsewhere.
class ParserBackend {
 public:
  virtual ~ParserBackend() = default;
  virtual LocalDescription parse_local(const DirectionalView& view, const ScaffoldGrid& m,
                                       const std::string& target) = 0;
  virtual GlobalSummary summarize(const std::vector<LocalDescription>& lds, int timestep) = 0;
};

class OracleParser : public ParserBackend {
 public:
  explicit OracleParser(PriorTable priors = PriorTable::builtin(), int richness_cap = 8)
      : priors_(std::move(priors)), richness_cap_(richness_cap) {}

  LocalDescription parse_local(const DirectionalView& view, const ScaffoldGrid& m,
                               const std::string& target) override {
    return oracle_parse_local(view, m, target, priors_, richness_cap_);
  }

  GlobalSummary summarize(const std::vector<LocalDescription>& lds, int timestep) override {
    return summarize_global(lds, timestep);
  }

  const PriorTable& priors() const { return priors_; }

 private:
  PriorTable priors_;
  int richness_cap_;
};

}  // namespace panonav
