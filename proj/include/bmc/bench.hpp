#pragma once

// Benchmark protocols: isolated insertion of sequences with a controlled
// duplication factor, and bucket-size sweeps over full explorations.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bmc/explore.hpp"
#include "bmc/hashtable.hpp"

namespace bmc {

struct DuplicationSpec {
  std::uint64_t total = 1'000'000;
  std::uint64_t duplication = 1;
  std::uint32_t vector_length = 1;
  std::uint64_t seed = kDefaultSeed;

  std::uint64_t unique() const { return duplication == 0 ? 0 : total / duplication; }
};

inline constexpr std::uint64_t kLargeScaleTotal = 100'000'000;

/// Flat storage for a sequence of equal-length vectors.
struct VectorSequence {
  std::uint32_t vector_length = 1;
  std::vector<std::uint32_t> words;

  std::size_t size() const { return words.size() / vector_length; }
  std::span<const std::uint32_t> operator[](std::size_t i) const {
    return {words.data() + i * vector_length, vector_length};
  }
};

namespace detail {
// Unbiased enough for shuffling and fully specified, unlike the standard
// distributions whose output differs between library implementations.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(gen()) * n) >> 64);
}
}  // namespace detail

/// ⌊total/d⌋ distinct random vectors, each repeated d times; the last one is
/// repeated further until the sequence holds exactly `total` vectors. The
/// result is shuffled. Deterministic for a given seed.
inline VectorSequence gen_duplication_sequence(const DuplicationSpec& spec) {
  if (spec.duplication == 0 || spec.duplication > spec.total) {
    throw std::invalid_argument("duplication must be in 1..total");
  }
  if (spec.vector_length == 0 || spec.vector_length > kMaxVectorLength) {
    throw std::invalid_argument("vector length must be in 1..16");
  }
  const std::uint32_t len = spec.vector_length;
  const std::uint64_t unique = spec.unique();
  std::mt19937_64 gen(spec.seed);

  // Draw distinct vectors: oversample, sort, drop repeats, top up.
  VectorSequence pool{len, {}};
  std::vector<std::uint64_t> order;
  auto less = [&](std::uint64_t a, std::uint64_t b) {
    return std::lexicographical_compare(pool.words.begin() + a * len, pool.words.begin() + (a + 1) * len,
                                        pool.words.begin() + b * len, pool.words.begin() + (b + 1) * len);
  };
  auto same = [&](std::uint64_t a, std::uint64_t b) { return !less(a, b) && !less(b, a); };
  std::uint64_t distinct = 0;
  while (distinct < unique) {
    const std::uint64_t want = unique - distinct;
    for (std::uint64_t k = 0; k < want * len; ++k) pool.words.push_back(static_cast<std::uint32_t>(gen()));
    order.resize(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), less);
    order.erase(std::unique(order.begin(), order.end(), same), order.end());
    std::sort(order.begin(), order.end());  // keep draw order
    VectorSequence kept{len, {}};
    kept.words.reserve(order.size() * len);
    for (auto idx : order) {
      auto v = pool[idx];
      kept.words.insert(kept.words.end(), v.begin(), v.end());
    }
    pool = std::move(kept);
    distinct = pool.size();
  }
  pool.words.resize(unique * len);

  VectorSequence seq{len, {}};
  seq.words.reserve(spec.total * len);
  for (std::uint64_t u = 0; u < unique; ++u) {
    const std::uint64_t reps = u + 1 == unique ? spec.total - (unique - 1) * spec.duplication : spec.duplication;
    auto v = pool[u];
    for (std::uint64_t r = 0; r < reps; ++r) seq.words.insert(seq.words.end(), v.begin(), v.end());
  }
  // Fisher-Yates over vectors.
  for (std::uint64_t i = spec.total; i > 1; --i) {
    const std::uint64_t j = detail::bounded(gen, i);
    if (j != i - 1) {
      std::swap_ranges(seq.words.begin() + (i - 1) * len, seq.words.begin() + i * len,
                       seq.words.begin() + j * len);
    }
  }
  return seq;
}

/// Table sized so that all `total` vectors would fill at most half of the
/// slots, i.e. 50% load at duplication 1. Buckets of fewer than four slots
/// overflow all their hash functions noticeably often at that load, so they
/// get a quarter instead.
inline TableConfig bench_table_config(const DuplicationSpec& spec, std::uint32_t bucket_words,
                                      std::uint64_t seed = kDefaultSeed) {
  TableConfig cfg;
  cfg.bucket_words = bucket_words;
  cfg.seed = seed;
  const std::uint32_t spb = slots_per_bucket(bucket_words, spec.vector_length, cfg.effective_layout());
  const std::uint64_t factor = spb >= 4 ? 2 : 4;
  const std::uint64_t buckets =
      std::max<std::uint64_t>((factor * spec.total + spb - 1) / spb, cfg.num_hash_functions);
  cfg.capacity_words = buckets * bucket_words;
  return cfg;
}

struct BenchRecord {
  DuplicationSpec spec;
  TableConfig table;
  std::uint32_t threads = 1;
  double wall_ms = 0.0;
  double inserts_per_sec = 0.0;
  std::uint64_t found = 0;
  std::uint64_t inserted = 0;
};

/// Inserts the whole sequence into a fresh table using `threads` threads on
/// contiguous slices. Only the insertion phase is timed.
inline BenchRecord run_insert_bench(const VectorSequence& seq, const DuplicationSpec& spec,
                                    const TableConfig& table_cfg, std::uint32_t threads) {
  if (threads == 0) throw std::invalid_argument("need at least one thread");
  StateTable table(table_cfg, seq.vector_length);
  const std::size_t n = seq.size();
  std::vector<std::uint64_t> found(threads, 0), inserted(threads, 0);
  std::atomic<bool> full{false};
  auto body = [&](std::uint32_t t) {
    const std::size_t first = n * t / threads, last = n * (t + 1) / threads;
    std::uint64_t f = 0, ins = 0;
    for (std::size_t i = first; i < last; ++i) {
      switch (table.find_or_insert(seq[i]).outcome) {
        case InsertOutcome::kFound: ++f; break;
        case InsertOutcome::kInserted: ++ins; break;
        case InsertOutcome::kTableFull: full.store(true); return;
      }
    }
    found[t] = f;
    inserted[t] = ins;
  };

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> pool;
  for (std::uint32_t t = 1; t < threads; ++t) pool.emplace_back(body, t);
  body(0);
  for (auto& th : pool) th.join();
  const auto stop = std::chrono::steady_clock::now();

  if (full.load()) {
    throw std::runtime_error("hash table full during benchmark (" + std::to_string(table.total_slots()) +
                             " slots for " + std::to_string(n) + " vectors): table is undersized");
  }
  BenchRecord rec;
  rec.spec = spec;
  rec.table = table_cfg;
  rec.threads = threads;
  rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  rec.found = std::accumulate(found.begin(), found.end(), std::uint64_t{0});
  rec.inserted = std::accumulate(inserted.begin(), inserted.end(), std::uint64_t{0});
  rec.inserts_per_sec = rec.wall_ms > 0 ? static_cast<double>(n) / (rec.wall_ms / 1000.0) : 0.0;
  if (rec.found + rec.inserted != n) throw std::logic_error("benchmark lost insertions");
  return rec;
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

/// Duplication grid used for the isolated table experiment.
inline std::vector<std::uint64_t> default_duplication_grid() {
  std::vector<std::uint64_t> grid{1};
  for (std::uint64_t d = 10; d <= 100; d += 10) grid.push_back(d);
  return grid;
}

/// One record per (bucket size, duplication); wall_ms is the median of `reps`.
inline std::vector<BenchRecord> duplication_sweep(const DuplicationSpec& base,
                                                  const std::vector<std::uint64_t>& duplications,
                                                  const std::vector<std::uint32_t>& bucket_sizes,
                                                  std::uint32_t threads, std::uint32_t reps) {
  std::vector<BenchRecord> out;
  for (std::uint64_t d : duplications) {
    DuplicationSpec spec = base;
    spec.duplication = d;
    const VectorSequence seq = gen_duplication_sequence(spec);
    for (std::uint32_t b : bucket_sizes) {
      const TableConfig cfg = bench_table_config(spec, b, base.seed);
      std::vector<double> times;
      BenchRecord rec;
      for (std::uint32_t r = 0; r < std::max(reps, 1u); ++r) {
        rec = run_insert_bench(seq, spec, cfg, threads);
        times.push_back(rec.wall_ms);
      }
      rec.wall_ms = median(times);
      rec.inserts_per_sec = static_cast<double>(spec.total) / (rec.wall_ms / 1000.0);
      out.push_back(rec);
    }
  }
  return out;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "duplication,bucket_words,vector_length,threads,total,unique,runtime_ms,inserts_per_sec,found,inserted\n";
  for (const auto& r : records) {
    out << r.spec.duplication << ',' << r.table.bucket_words << ',' << r.spec.vector_length << ','
        << r.threads << ',' << r.spec.total << ',' << r.spec.unique() << ',' << r.wall_ms << ','
        << r.inserts_per_sec << ',' << r.found << ',' << r.inserted << '\n';
  }
}

// ---------------------------------------------------------------------------
// Bucket-size sweep over full explorations.

struct SweepCell {
  std::string model;
  std::uint32_t bucket_words = 32;
  double mean_ms = 0.0;
  double normalized = 0.0;
  std::uint32_t reps = 0;
  Outcome outcome = Outcome::kComplete;
  std::uint64_t states = 0;
  std::uint64_t transitions = 0;
};

/// Runs explore() `reps` times per bucket size and normalizes the mean
/// runtime to the 32-word cell (or the first cell if 32 is not swept).
inline std::vector<SweepCell> bucket_size_sweep(const Network& net, const std::string& model,
                                                const ExploreConfig& base,
                                                const std::vector<std::uint32_t>& sizes = {4, 8, 16, 32},
                                                std::uint32_t reps = 5) {
  if (sizes.empty()) throw std::invalid_argument("no bucket sizes to sweep");
  std::vector<SweepCell> cells;
  for (std::uint32_t size : sizes) {
    ExploreConfig cfg = base;
    cfg.table.bucket_words = size;
    cfg.table.layout.reset();
    SweepCell cell;
    cell.model = model;
    cell.bucket_words = size;
    cell.reps = reps;
    double total_ms = 0.0;
    for (std::uint32_t r = 0; r < reps; ++r) {
      const ExplorationReport rep = explore(net, cfg);
      total_ms += rep.wall_time * 1000.0;
      if (r == 0) {
        cell.states = rep.states;
        cell.transitions = rep.transitions;
      } else if (rep.states != cell.states || rep.transitions != cell.transitions) {
        throw std::logic_error("sweep repetition disagrees on state or transition count");
      }
      if (rep.outcome != Outcome::kComplete) cell.outcome = rep.outcome;
    }
    cell.mean_ms = reps ? total_ms / reps : 0.0;
    cells.push_back(cell);
  }
  auto base_it = std::find_if(cells.begin(), cells.end(), [](const SweepCell& c) { return c.bucket_words == 32; });
  const double base_ms = (base_it != cells.end() ? *base_it : cells.front()).mean_ms;
  for (auto& c : cells) c.normalized = base_ms > 0 ? c.mean_ms / base_ms : 0.0;
  return cells;
}

/// Columns: model,bucket,mean_ms,normalized,reps. A cell that did not
/// complete reports its outcome in the normalized column.
inline void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "model,bucket,mean_ms,normalized,reps\n";
  for (const auto& c : cells) {
    out << c.model << ',' << c.bucket_words << ',' << c.mean_ms << ',';
    if (c.outcome == Outcome::kComplete) {
      out << c.normalized;
    } else {
      out << to_string(c.outcome);
    }
    out << ',' << c.reps << '\n';
  }
}

}  // namespace bmc
