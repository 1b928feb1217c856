#pragma once

// Parallel reachability over the product of a Network, using a StateTable as
// the combined open (NEW) and closed (OLD) set.
//
// Exploration proceeds in barrier-separated rounds. In each round every
// worker first claims the NEW states in its chunks of the table, then, after a
// barrier, expands them and routes successors through a private cache before
// they reach the shared table. Round k therefore expands exactly the states at
// breadth-first depth k, whatever the worker count or schedule.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <atomic>
#include <bit>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bmc/hashtable.hpp"
#include "bmc/network.hpp"
#include "bmc/statevec.hpp"

namespace bmc {

struct ExploreConfig {
  std::uint32_t workers = 1;
  TableConfig table;
  std::uint32_t cache_slots = 4096;
  bool detect_deadlocks = false;
  std::optional<std::uint64_t> max_iterations;
};

enum class Outcome { kComplete, kTableFull, kIterationCap };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kComplete: return "COMPLETE";
    case Outcome::kTableFull: return "TABLE_FULL";
    case Outcome::kIterationCap: return "ITERATION_CAP";
  }
  return "?";
}

inline constexpr std::size_t kMaxReportedDeadlocks = 100;

struct ExplorationReport {
  std::uint64_t states = 0;
  std::uint64_t transitions = 0;
  /// The lexicographically smallest deadlock states, at most 100.
  std::vector<CompositeState> deadlocks;
  std::uint64_t deadlock_count = 0;
  std::uint64_t iterations = 0;
  double wall_time = 0.0;  // seconds
  double throughput = 0.0;  // states per second
  Outcome outcome = Outcome::kComplete;
  /// States claimed and expanded over the whole run.
  std::uint64_t expanded = 0;
  std::uint64_t cache_lookups = 0;
  std::uint64_t cache_hits = 0;
};

/// Worker-private open-addressing set of vectors discovered since the last
/// flush. When a probe window is full the entry at the home slot is forwarded
/// to the global table and replaced.
class LocalCache {
 public:
  enum class Result { kFresh, kDuplicate };

  static constexpr std::uint32_t kProbeWindow = 8;

  LocalCache(std::uint32_t slots, std::uint32_t vector_length)
      : capacity_(std::bit_ceil(std::max<std::uint32_t>(slots, 1))),
        mask_(capacity_ - 1),
        vector_length_(vector_length),
        words_(std::size_t{capacity_} * vector_length),
        used_(capacity_, 0) {
    if (slots == 0) throw std::invalid_argument("cache needs at least one slot");
    occupied_.reserve(capacity_);
  }

  std::uint32_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return occupied_.size(); }
  std::uint64_t lookups() const noexcept { return lookups_; }
  std::uint64_t hits() const noexcept { return hits_; }

  template <class Forward>
  Result insert(std::span<const std::uint32_t> v, Forward&& forward) {
    ++lookups_;
    const std::uint32_t home = static_cast<std::uint32_t>(fold_words(v)) & mask_;
    const std::uint32_t window = std::min(kProbeWindow, capacity_);
    for (std::uint32_t k = 0; k < window; ++k) {
      const std::uint32_t j = (home + k) & mask_;
      if (!used_[j]) {
        store(j, v);
        used_[j] = 1;
        occupied_.push_back(j);
        return Result::kFresh;
      }
      if (words_equal(v.data(), slot(j), v.size())) {
        ++hits_;
        return Result::kDuplicate;
      }
    }
    forward(std::span<const std::uint32_t>(slot(home), vector_length_));
    store(home, v);
    return Result::kFresh;
  }

  /// Forwards every cached vector and empties the cache.
  template <class Forward>
  void flush(Forward&& forward) {
    for (std::uint32_t j : occupied_) {
      forward(std::span<const std::uint32_t>(slot(j), vector_length_));
      used_[j] = 0;
    }
    occupied_.clear();
  }

 private:
  const std::uint32_t* slot(std::uint32_t j) const { return words_.data() + std::size_t{j} * vector_length_; }
  void store(std::uint32_t j, std::span<const std::uint32_t> v) {
    std::copy(v.begin(), v.end(), words_.data() + std::size_t{j} * vector_length_);
  }

  std::uint32_t capacity_;
  std::uint32_t mask_;
  std::uint32_t vector_length_;
  std::vector<std::uint32_t> words_;
  std::vector<std::uint8_t> used_;
  std::vector<std::uint32_t> occupied_;
  std::uint64_t lookups_ = 0;
  std::uint64_t hits_ = 0;
};

/// Keeps the total number of deadlocks and the smallest few of them, so the
/// reported list does not depend on scheduling.
class DeadlockCollector {
 public:
  explicit DeadlockCollector(std::size_t limit = kMaxReportedDeadlocks) : limit_(limit) {}

  void add(std::span<const LocalState> s) {
    std::lock_guard lock(mu_);
    ++count_;
    CompositeState state(s.begin(), s.end());
    auto pos = std::lower_bound(kept_.begin(), kept_.end(), state);
    if (pos != kept_.end() && *pos == state) return;
    if (kept_.size() == limit_) {
      if (pos == kept_.end()) return;
      kept_.pop_back();
    }
    kept_.insert(pos, std::move(state));
  }

  std::uint64_t count() const {
    std::lock_guard lock(mu_);
    return count_;
  }
  std::vector<CompositeState> states() const {
    std::lock_guard lock(mu_);
    return kept_;
  }

 private:
  mutable std::mutex mu_;
  std::size_t limit_;
  std::uint64_t count_ = 0;
  std::vector<CompositeState> kept_;
};

/// Short FIFO in front of the global table: a vector's first bucket is
/// prefetched when it enters and the vector is inserted once the queue is
/// full, hiding most of the memory latency of random probes.
class InsertQueue {
 public:
  static constexpr std::uint32_t kDepth = 16;

  explicit InsertQueue(std::uint32_t vector_length) : vector_length_(vector_length) {}

  template <class Insert>
  void push(const StateTable& table, std::span<const std::uint32_t> v, Insert&& insert) {
    if (size_ == kDepth) {
      insert(std::span<const std::uint32_t>(entries_[head_].data(), vector_length_));
      head_ = (head_ + 1) % kDepth;
      --size_;
    }
    auto& slot = entries_[(head_ + size_) % kDepth];
    std::copy(v.begin(), v.end(), slot.begin());
    ++size_;
    table.prefetch(v);
  }

  template <class Insert>
  void drain(Insert&& insert) {
    while (size_ > 0) {
      insert(std::span<const std::uint32_t>(entries_[head_].data(), vector_length_));
      head_ = (head_ + 1) % kDepth;
      --size_;
    }
  }

 private:
  std::uint32_t vector_length_;
  std::uint32_t head_ = 0;
  std::uint32_t size_ = 0;
  std::array<std::array<std::uint32_t, kMaxVectorLength>, kDepth> entries_{};
};

struct RoundStats {
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;  // transitions
};

class Explorer {
 public:
  Explorer(const Network& net, ExploreConfig cfg)
      : net_(net),
        cfg_(std::move(cfg)),
        scheme_(PackingScheme::for_network(net)),
        table_(cfg_.table, scheme_.vector_length()) {
    if (cfg_.workers == 0) throw std::invalid_argument("need at least one worker");
    if (cfg_.cache_slots == 0) throw std::invalid_argument("cache needs at least one slot");
    for (std::uint32_t w = 0; w < cfg_.workers; ++w) {
      workers_.emplace_back(cfg_.cache_slots, scheme_.vector_length(), net.size());
    }
  }

  const StateTable& table() const noexcept { return table_; }
  StateTable& table() noexcept { return table_; }
  const PackingScheme& scheme() const noexcept { return scheme_; }
  const ExploreConfig& config() const noexcept { return cfg_; }
  const LocalCache& cache(std::uint32_t worker) const { return workers_[worker].cache; }
  bool stopped() const noexcept { return table_full_.load(std::memory_order_relaxed); }

  /// Inserts the initial state. Returns false if the table is already full.
  bool seed_initial() {
    const PackedState init = scheme_.pack(net_.initial_state());
    if (table_.find_or_insert(init.span()).outcome == InsertOutcome::kTableFull) {
      table_full_.store(true);
      return false;
    }
    return true;
  }

  /// First half of a round: claims every NEW state in the worker's chunks
  /// (chunk c belongs to worker c % workers). States inserted afterwards wait
  /// for the next round, so rounds coincide with breadth-first levels.
  std::uint64_t claim_frontier(std::uint32_t worker_id) {
    WorkerState& ws = workers_[worker_id];
    ws.frontier.clear();
    for (std::uint64_t c = worker_id; c < table_.chunks(); c += cfg_.workers) {
      table_.scan_chunk_new(c, [&](SlotHandle h) {
        if (table_.claim_new(h)) ws.frontier.push_back(h);
      });
    }
    return ws.frontier.size();
  }

  /// Second half of a round: expands the claimed states and flushes the cache.
  RoundStats expand_frontier(std::uint32_t worker_id) {
    WorkerState& ws = workers_[worker_id];
    RoundStats stats;
    auto insert = [&](std::span<const std::uint32_t> v) {
      if (table_.find_or_insert(v).outcome == InsertOutcome::kTableFull) {
        table_full_.store(true, std::memory_order_relaxed);
      }
    };
    auto forward = [&](std::span<const std::uint32_t> v) { ws.queue.push(table_, v, insert); };
    for (const SlotHandle h : ws.frontier) {
      if (stopped()) break;
      ++stats.expanded;
      scheme_.unpack(table_.words(h), ws.locals);
      net_.successors(ws.locals, ws.succ);
      stats.generated += ws.succ.size();
      if (ws.succ.empty() && cfg_.detect_deadlocks) deadlocks_.add(ws.locals);
      for (std::size_t k = 0; k < ws.succ.size(); ++k) {
        scheme_.pack(ws.succ.target(k), ws.packed);
        ws.cache.insert(std::span<const std::uint32_t>(ws.packed.data(), scheme_.vector_length()), forward);
      }
    }
    ws.frontier.clear();
    ws.cache.flush(forward);
    ws.queue.drain(insert);
    return stats;
  }

  /// Both halves of a round for one worker, without waiting for the others.
  RoundStats worker_round(std::uint32_t worker_id) {
    claim_frontier(worker_id);
    return expand_frontier(worker_id);
  }

  ExplorationReport run() {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    ExplorationReport report;

    if (!seed_initial()) {
      report.outcome = Outcome::kTableFull;
    } else {
      std::vector<RoundStats> per_worker(cfg_.workers);
      while (true) {
        if (table_.occupancy().fresh == 0) {
          report.outcome = Outcome::kComplete;
          break;
        }
        if (cfg_.max_iterations && report.iterations >= *cfg_.max_iterations) {
          report.outcome = Outcome::kIterationCap;
          break;
        }
        run_round(per_worker);
        ++report.iterations;
        std::uint64_t expanded = 0;
        for (const auto& r : per_worker) {
          expanded += r.expanded;
          report.transitions += r.generated;
        }
        report.expanded += expanded;
        if (stopped()) {
          report.outcome = Outcome::kTableFull;
          break;
        }
        if (expanded == 0) {
          throw std::logic_error("exploration round made no progress with NEW states pending");
        }
      }
    }

    report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    report.states = table_.occupancy().occupied;
    report.throughput = report.wall_time > 0 ? static_cast<double>(report.states) / report.wall_time : 0.0;
    report.deadlocks = deadlocks_.states();
    report.deadlock_count = deadlocks_.count();
    for (const auto& w : workers_) {
      report.cache_lookups += w.cache.lookups();
      report.cache_hits += w.cache.hits();
    }
    return report;
  }

 private:
  struct WorkerState {
    WorkerState(std::uint32_t cache_slots, std::uint32_t vector_length, std::size_t processes)
        : cache(cache_slots, vector_length), queue(vector_length), locals(processes) {}
    LocalCache cache;
    InsertQueue queue;
    CompositeState locals;
    SuccessorBuffer succ;
    std::array<std::uint32_t, kMaxVectorLength> packed{};
    std::vector<SlotHandle> frontier;
  };

  void run_round(std::vector<RoundStats>& out) {
    if (cfg_.workers == 1) {
      out[0] = worker_round(0);
      return;
    }
    parallel([&](std::uint32_t w) { claim_frontier(w); });
    parallel([&](std::uint32_t w) { out[w] = expand_frontier(w); });
  }

  template <class Body>
  void parallel(Body&& body) {
    std::vector<std::thread> threads;
    threads.reserve(cfg_.workers - 1);
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto guarded = [&](std::uint32_t w) {
      try {
        body(w);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        table_full_.store(true);
      }
    };
    for (std::uint32_t w = 1; w < cfg_.workers; ++w) threads.emplace_back(guarded, w);
    guarded(0);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  const Network& net_;
  ExploreConfig cfg_;
  PackingScheme scheme_;
  StateTable table_;
  std::vector<WorkerState> workers_;
  DeadlockCollector deadlocks_;
  std::atomic<bool> table_full_{false};
};

/// Explores the product of `net` from its initial state.
inline ExplorationReport explore(const Network& net, const ExploreConfig& cfg) {
  Explorer explorer(net, cfg);
  return explorer.run();
}

}  // namespace bmc
