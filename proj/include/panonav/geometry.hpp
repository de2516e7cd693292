#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>

#include "panonav/error.hpp"

namespace panonav {

struct Cell {
  int x = 0;
  int y = 0;

  bool operator==(const Cell&) const = default;
};

struct CellHash {
  size_t operator()(const Cell& c) const {
    return std::hash<int64_t>()((static_cast<int64_t>(c.x) << 32) ^ static_cast<uint32_t>(c.y));
  }
};

inline int64_t dist2(Cell a, Cell b) {
  int64_t dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Agent pose on the grid. Headings are multiples of 30 degrees in [0,360),
// 0 = +x, 90 = +y, left turns increase the angle. Pitch is -30, 0, or 30.
struct Pose {
  Cell cell;
  int heading = 0;
  int pitch = 0;

  bool operator==(const Pose&) const = default;
};

inline int normalize_deg(int d) { return ((d % 360) + 360) % 360; }

// Values of the form a + b*sqrt(3). Cross and dot products of grid vectors
// against 30-degree-multiple directions live in this ring, so sector
// membership can be decided in exact integer arithmetic.
struct Ring3 {
  int64_t a = 0;
  int64_t b = 0;
};

inline int sign_ring(Ring3 v) {
  if (v.a == 0 && v.b == 0) return 0;
  if (v.a >= 0 && v.b >= 0) return 1;
  if (v.a <= 0 && v.b <= 0) return -1;
  int64_t lhs = v.a * v.a, rhs = 3 * v.b * v.b;
  if (v.a > 0) return lhs > rhs ? 1 : -1;
  return lhs > rhs ? -1 : 1;
}

// Direction of a 30-degree-multiple heading, scaled by 2 so that every
// component is exact: (2cos h, 2sin h), each component an a + b*sqrt(3).
struct Dir2 {
  Ring3 x, y;
};

inline Dir2 heading_dir(int heading_deg) {
  switch (normalize_deg(heading_deg)) {
    case 0: return {{2, 0}, {0, 0}};
    case 30: return {{0, 1}, {1, 0}};
    case 60: return {{1, 0}, {0, 1}};
    case 90: return {{0, 0}, {2, 0}};
    case 120: return {{-1, 0}, {0, 1}};
    case 150: return {{0, -1}, {1, 0}};
    case 180: return {{-2, 0}, {0, 0}};
    case 210: return {{0, -1}, {-1, 0}};
    case 240: return {{-1, 0}, {0, -1}};
    case 270: return {{0, 0}, {-2, 0}};
    case 300: return {{1, 0}, {0, -1}};
    case 330: return {{0, 1}, {-1, 0}};
    default: fail(Errc::contract, "heading not a multiple of 30: " + std::to_string(heading_deg));
  }
}

inline int cross_sign(int boundary_deg, int64_t dx, int64_t dy) {
  Dir2 u = heading_dir(boundary_deg);
  return sign_ring({u.x.a * dy - u.y.a * dx, u.x.b * dy - u.y.b * dx});
}

// True when (dx,dy) points into the half-open arc [lo, lo+60). The boundary
// ray at lo belongs to the arc, the one at lo+60 does not.
inline bool in_sector_arc(int lo_deg, int64_t dx, int64_t dy) {
  return cross_sign(lo_deg, dx, dy) >= 0 && cross_sign(lo_deg + 60, dx, dy) < 0;
}

// Panorama sector of the offset (dx,dy) seen from a pose with the given
// heading. Sector 1 faces forward, numbering increases to the left; sector k
// covers relative bearings [60(k-1)-30, 60(k-1)+30). The zero offset maps to
// sector 1.
inline int sector_of(int dx, int dy, int heading_deg) {
  if (dx == 0 && dy == 0) return 1;
  for (int k = 1; k <= 6; ++k) {
    int lo = heading_deg + 60 * (k - 1) - 30;
    if (in_sector_arc(lo, dx, dy)) return k;
  }
  fail(Errc::contract, "sector arcs failed to cover offset");
}

inline double atan2_deg(double dy, double dx) { return std::atan2(dy, dx) * 180.0 / M_PI; }

// Display bearing of (dx,dy) inside its sector, in degrees left of the sector
// center, clamped to [-30, 30). Sector membership is decided exactly
// elsewhere; this value is cosmetic.
inline double sector_bearing(int dx, int dy, int heading_deg, int sector) {
  if (dx == 0 && dy == 0) return 0.0;
  int center = normalize_deg(heading_deg + 60 * (sector - 1));
  double b = std::remainder(atan2_deg(dy, dx) - center, 360.0);
  if (b < -30.0) b = -30.0;
  if (b >= 30.0) b = std::nextafter(30.0, 0.0);
  return b;
}

// Axis the agent actually moves along for a given heading: diagonal headings
// snap to the nearest axis, 30 down to 0, 60 up to 90, and so on.
inline int snapped_axis(int heading_deg) {
  int h = normalize_deg(heading_deg);
  int r = h % 90;
  if (r == 30) return normalize_deg(h - 30);
  if (r == 60) return normalize_deg(h + 30);
  return h;
}

inline Cell axis_step(int axis_deg) {
  switch (normalize_deg(axis_deg)) {
    case 0: return {1, 0};
    case 90: return {0, 1};
    case 180: return {-1, 0};
    case 270: return {0, -1};
    default: fail(Errc::contract, "not an axis heading: " + std::to_string(axis_deg));
  }
}

inline double cos30(int heading_deg) {
  static const double s = std::sqrt(3.0) / 2.0;
  static const double table[12] = {1, s, 0.5, 0, -0.5, -s, -1, -s, -0.5, 0, 0.5, s};
  return table[normalize_deg(heading_deg) / 30];
}

inline double sin30(int heading_deg) { return cos30(heading_deg - 90); }

// Walks every cell the open segment between the centers of a and b passes
// through, endpoints excluded. When the segment crosses a lattice corner
// exactly, both cells flanking the corner are visited, which keeps occlusion
// symmetric and conservative. Returns false if the visitor stops the walk.
inline bool walk_segment(Cell a, Cell b, const std::function<bool(Cell)>& visit) {
  int dx = b.x - a.x, dy = b.y - a.y;
  int xstep = dx >= 0 ? 1 : -1, ystep = dy >= 0 ? 1 : -1;
  dx = std::abs(dx);
  dy = std::abs(dy);
  int x = a.x, y = a.y;
  int ddx = 2 * dx, ddy = 2 * dy;
  auto see = [&](Cell c) { return c == a || c == b || visit(c); };
  if (ddx >= ddy) {
    int error = dx, errorprev = dx;
    for (int i = 0; i < dx; ++i) {
      x += xstep;
      error += ddy;
      if (error > ddx) {
        y += ystep;
        error -= ddx;
        if (error + errorprev < ddx) {
          if (!see({x, y - ystep})) return false;
        } else if (error + errorprev > ddx) {
          if (!see({x - xstep, y})) return false;
        } else {
          if (!see({x, y - ystep})) return false;
          if (!see({x - xstep, y})) return false;
        }
      }
      if (!see({x, y})) return false;
      errorprev = error;
    }
  } else {
    int error = dy, errorprev = dy;
    for (int i = 0; i < dy; ++i) {
      y += ystep;
      error += ddx;
      if (error > ddy) {
        x += xstep;
        error -= ddy;
        if (error + errorprev < ddy) {
          if (!see({x - xstep, y})) return false;
        } else if (error + errorprev > ddy) {
          if (!see({x, y - ystep})) return false;
        } else {
          if (!see({x - xstep, y})) return false;
          if (!see({x, y - ystep})) return false;
        }
      }
      if (!see({x, y})) return false;
      errorprev = error;
    }
  }
  return true;
}

// Fixed-point decimal formatting with a normalized zero, for byte-stable
// logs and SVG output.
inline std::string to_fixed(double v, int digits) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s(buf);
  bool all_zero = true;
  for (char c : s)
    if (c != '-' && c != '0' && c != '.') all_zero = false;
  if (all_zero && !s.empty() && s[0] == '-') s.erase(0, 1);
  return s;
}

}  // namespace panonav
