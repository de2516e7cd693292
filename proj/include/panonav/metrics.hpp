#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "panonav/error.hpp"
#include "panonav/geometry.hpp"

namespace panonav {

struct EpisodeResult {
  int s = 0;                 // success flag
  double rho_m = 0.0;        // agent path length
  double ell_m = 0.0;        // shortest start-to-target length
  double final_dts_m = 0.0;  // geodesic distance to nearest target at the end
  double start_final_m = 0.0;
  bool escaped = false;  // ended farther than the escape radius from start
  int steps = 0;
  std::string trajectory_ref;
};

inline double spl(const std::vector<EpisodeResult>& results) {
  require(!results.empty(), Errc::invalid_input, "no episodes to score");
  double sum = 0.0;
  for (const auto& r : results) {
    require(r.ell_m > 0.0, Errc::invalid_input, "episode with non-positive shortest path");
    sum += r.s * (r.ell_m / std::max(r.rho_m, r.ell_m));
  }
  return 100.0 * sum / static_cast<double>(results.size());
}

inline double success_rate(const std::vector<EpisodeResult>& results) {
  require(!results.empty(), Errc::invalid_input, "no episodes to score");
  double sum = 0.0;
  for (const auto& r : results) sum += r.s;
  return 100.0 * sum / static_cast<double>(results.size());
}

// Mean distance-to-success over failed episodes; empty when every episode
// succeeded.
inline std::optional<double> dts_failures(const std::vector<EpisodeResult>& results) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : results)
    if (r.s == 0) {
      sum += r.final_dts_m;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

inline double escape_rate(const std::vector<EpisodeResult>& results) {
  require(!results.empty(), Errc::invalid_input, "no episodes to score");
  int n = 0;
  for (const auto& r : results) n += r.escaped ? 1 : 0;
  return 100.0 * n / static_cast<double>(results.size());
}

struct MetricsReport {
  int n = 0;
  double sr = 0.0;
  double spl = 0.0;
  std::optional<double> dts_f;
  double er = 0.0;
};

inline MetricsReport aggregate(const std::vector<EpisodeResult>& results) {
  MetricsReport rep;
  rep.n = static_cast<int>(results.size());
  rep.sr = success_rate(results);
  rep.spl = spl(results);
  rep.dts_f = dts_failures(results);
  rep.er = escape_rate(results);
  return rep;
}

inline std::string to_table_row(const MetricsReport& r) {
  std::ostringstream out;
  out << r.n << "," << to_fixed(r.sr, 1) << "," << to_fixed(r.spl, 1) << ","
      << (r.dts_f ? to_fixed(*r.dts_f, 1) : std::string("-")) << "," << to_fixed(r.er, 1);
  return out.str();
}

inline std::string to_text(const MetricsReport& r) {
  std::ostringstream out;
  out << "N=" << r.n << "  SR=" << to_fixed(r.sr, 1) << "%  SPL=" << to_fixed(r.spl, 1)
      << "%  DTS(f)=" << (r.dts_f ? to_fixed(*r.dts_f, 1) + " m" : std::string("-"))
      << "  ER=" << to_fixed(r.er, 1) << "%";
  return out.str();
}

}  // namespace panonav
