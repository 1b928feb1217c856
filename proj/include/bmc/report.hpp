#pragma once

// Text and JSON renderings of configurations and exploration reports.

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "bmc/explore.hpp"
#include "bmc/hashtable.hpp"
#include "bmc/network.hpp"

namespace bmc {

using Json = nlohmann::ordered_json;

inline Json to_json(const TableConfig& t) {
  return Json{{"bucket_words", t.bucket_words},
              {"num_hash_functions", t.num_hash_functions},
              {"capacity_words", t.capacity_words},
              {"layout", to_string(t.effective_layout())},
              {"seed", t.seed}};
}

inline Json to_json(const ExploreConfig& c) {
  Json j{{"workers", c.workers},
         {"table", to_json(c.table)},
         {"cache_slots", c.cache_slots},
         {"detect_deadlocks", c.detect_deadlocks}};
  j["max_iterations"] = c.max_iterations ? Json(*c.max_iterations) : Json(nullptr);
  return j;
}

/// Report fields in declaration order. Deadlock states are lists of local
/// state indices.
inline Json to_json(const ExplorationReport& r) {
  Json dl = Json::array();
  for (const auto& s : r.deadlocks) dl.push_back(s);
  return Json{{"states", r.states},
              {"transitions", r.transitions},
              {"deadlocks", dl},
              {"deadlock_count", r.deadlock_count},
              {"iterations", r.iterations},
              {"wall_time", r.wall_time},
              {"throughput", r.throughput},
              {"outcome", to_string(r.outcome)}};
}

inline std::string format_state(const CompositeState& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + ")";
}

inline void print_config(std::ostream& out, const ExploreConfig& c, const std::string& engine) {
  out << "config:\n"
      << "  engine             " << engine << '\n'
      << "  workers            " << c.workers << '\n'
      << "  bucket_words       " << c.table.bucket_words << '\n'
      << "  layout             " << to_string(c.table.effective_layout()) << '\n'
      << "  num_hash_functions " << c.table.num_hash_functions << '\n'
      << "  capacity_words     " << c.table.capacity_words << '\n'
      << "  seed               " << c.table.seed << '\n'
      << "  cache_slots        " << c.cache_slots << '\n'
      << "  detect_deadlocks   " << (c.detect_deadlocks ? "yes" : "no") << '\n';
}

inline void print_report(std::ostream& out, const ExplorationReport& r) {
  std::ostringstream tp;
  tp << std::fixed << std::setprecision(0) << r.throughput;
  out << "outcome:     " << to_string(r.outcome) << '\n'
      << "states:      " << r.states << '\n'
      << "transitions: " << r.transitions << '\n'
      << "iterations:  " << r.iterations << '\n'
      << "wall_time:   " << std::fixed << std::setprecision(6) << r.wall_time << " s\n"
      << std::defaultfloat << "throughput:  " << tp.str() << " states/s\n"
      << "deadlocks:   " << r.deadlock_count << '\n';
  for (const auto& s : r.deadlocks) out << "  " << format_state(s) << '\n';
  if (r.deadlock_count > r.deadlocks.size()) {
    out << "  ... " << (r.deadlock_count - r.deadlocks.size()) << " more\n";
  }
}

}  // namespace bmc
