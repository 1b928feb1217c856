#pragma once

// Reference reachability: plain FIFO breadth-first search over the product
// using a standard hash set. Shares no code with the lock-free table so that
// agreement between the two is meaningful.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <new>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "bmc/network.hpp"
#include "bmc/statevec.hpp"

namespace bmc {

struct OracleOptions {
  /// Keep the packed state set (needed for canonical dumps).
  bool collect_states = true;
};

struct OracleResult {
  std::uint64_t states = 0;
  std::uint64_t transitions = 0;
  std::vector<CompositeState> deadlocks;  // sorted
  std::vector<PackedState> state_set;     // sorted, when collected

  std::string canonical_dump() const { return bmc::canonical_dump(state_set); }
};

namespace detail {
struct CompositeHash {
  std::size_t operator()(const CompositeState& s) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (LocalState x : s) {
      h ^= x;
      h *= 1099511628211ULL;
    }
    return h;
  }
};
}  // namespace detail

inline OracleResult sequential_bfs(const Network& net, const OracleOptions& opts = {}) {
  OracleResult result;
  std::unordered_set<CompositeState, detail::CompositeHash> seen;
  std::deque<const CompositeState*> queue;
  try {
    auto [it, _] = seen.insert(net.initial_state());
    queue.push_back(&*it);
    SuccessorBuffer succ;
    while (!queue.empty()) {
      const CompositeState& s = *queue.front();
      queue.pop_front();
      net.successors(s, succ);
      result.transitions += succ.size();
      if (succ.empty()) result.deadlocks.push_back(s);
      for (std::size_t k = 0; k < succ.size(); ++k) {
        auto t = succ.target(k);
        auto [pos, fresh] = seen.emplace(t.begin(), t.end());
        if (fresh) queue.push_back(&*pos);
      }
    }
  } catch (const std::bad_alloc&) {
    throw std::runtime_error("oracle ran out of memory after " + std::to_string(seen.size()) +
                             " states");
  }
  result.states = seen.size();
  std::sort(result.deadlocks.begin(), result.deadlocks.end());
  if (opts.collect_states) {
    const PackingScheme scheme = PackingScheme::for_network(net);
    result.state_set.reserve(seen.size());
    for (const auto& s : seen) result.state_set.push_back(scheme.pack(s));
    std::sort(result.state_set.begin(), result.state_set.end());
  }
  return result;
}

}  // namespace bmc
