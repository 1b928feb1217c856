#pragma once

// Lock-free, fixed-capacity, closed-hashing set of packed state vectors.
//
// The table is an array of buckets of `bucket_words` 32-bit words. Each
// bucket holds `slots_per_bucket` vectors and one status byte per slot
// (EMPTY -> CLAIMED -> NEW -> OLD, never backwards). A vector is probed in
// the buckets chosen by `num_hash_functions` hash functions, in order.
//
// Insertion claims the first EMPTY slot of a bucket with a compare-and-swap,
// writes the words, then publishes the slot as NEW. Because a slot is only
// ever claimed after every slot before it was seen non-empty, the occupied
// slots of a bucket always form a prefix. A full bucket is therefore final,
// and a vector moves on to its next bucket only when no earlier bucket can
// ever hold it. This gives global uniqueness without locks.

#include <algorithm>
#include <array>
#include <atomic>
#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <new>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bmc/statevec.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#endif
#if defined(__linux__)
#include <sys/mman.h>
#endif

namespace bmc {

namespace detail {

// Lazily zeroed memory. On Linux the region is a private anonymous mapping
// with transparent huge pages requested, which keeps TLB misses down for
// randomly probed multi-gigabyte tables.
class ZeroedRegion {
 public:
  ZeroedRegion() = default;
  explicit ZeroedRegion(std::size_t bytes) : bytes_(bytes) {
    if (bytes == 0) return;
#if defined(__linux__)
    void* p = ::mmap(nullptr, bytes, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
    if (p == MAP_FAILED) throw std::bad_alloc();
    ::madvise(p, bytes, MADV_HUGEPAGE);
#else
    void* p = std::calloc(bytes, 1);
    if (p == nullptr) throw std::bad_alloc();
#endif
    data_ = static_cast<std::byte*>(p);
  }
  ZeroedRegion(ZeroedRegion&& o) noexcept : data_(std::exchange(o.data_, nullptr)), bytes_(o.bytes_) {}
  ZeroedRegion& operator=(ZeroedRegion&& o) noexcept {
    if (this != &o) {
      release();
      data_ = std::exchange(o.data_, nullptr);
      bytes_ = o.bytes_;
    }
    return *this;
  }
  ~ZeroedRegion() { release(); }

  std::byte* data() const noexcept { return data_; }

 private:
  void release() noexcept {
    if (data_ == nullptr) return;
#if defined(__linux__)
    ::munmap(data_, bytes_);
#else
    std::free(data_);
#endif
    data_ = nullptr;
  }

  std::byte* data_ = nullptr;
  std::size_t bytes_ = 0;
};

}  // namespace detail

enum class BucketLayout { kPlain, kHalfBucket };

inline const char* to_string(BucketLayout l) {
  return l == BucketLayout::kHalfBucket ? "half" : "plain";
}

/// Number of vectors of `vector_length` words that fit one bucket.
inline std::uint32_t slots_per_bucket(std::uint32_t bucket_words, std::uint32_t vector_length,
                                      BucketLayout layout) {
  if (bucket_words == 0 || vector_length == 0) {
    throw std::invalid_argument("bucket size and vector length must be positive");
  }
  std::uint32_t n = 0;
  if (layout == BucketLayout::kHalfBucket) {
    if (bucket_words % 2 != 0) throw std::invalid_argument("half-bucket layout needs an even bucket size");
    n = 2 * ((bucket_words / 2) / vector_length);
  } else {
    n = bucket_words / vector_length;
  }
  if (n == 0) throw std::invalid_argument("vector too long for bucket");
  return n;
}

inline constexpr std::uint64_t kDefaultSeed = 0x5eed'0b5e'55ed'2017ULL;

struct TableConfig {
  std::uint32_t bucket_words = 32;
  std::uint32_t num_hash_functions = 8;
  /// Word budget for vector storage; buckets = capacity_words / bucket_words.
  std::uint64_t capacity_words = megabytes(256);
  /// Defaults to half buckets at size 32 and plain buckets otherwise.
  std::optional<BucketLayout> layout;
  std::uint64_t seed = kDefaultSeed;

  static constexpr std::uint64_t megabytes(std::uint64_t mb) { return mb * (1ULL << 20) / 4; }

  BucketLayout effective_layout() const {
    if (layout) return *layout;
    return bucket_words == 32 ? BucketLayout::kHalfBucket : BucketLayout::kPlain;
  }
};

enum class SlotStatus : std::uint8_t { kEmpty = 0, kClaimed = 1, kNew = 2, kOld = 3 };

inline const char* to_string(SlotStatus s) {
  switch (s) {
    case SlotStatus::kEmpty: return "EMPTY";
    case SlotStatus::kClaimed: return "CLAIMED";
    case SlotStatus::kNew: return "NEW";
    case SlotStatus::kOld: return "OLD";
  }
  return "?";
}

/// Global slot index: bucket * slots_per_bucket + slot.
struct SlotHandle {
  std::uint64_t index = 0;
  friend auto operator<=>(const SlotHandle&, const SlotHandle&) = default;
};

enum class InsertOutcome { kFound, kInserted, kTableFull };

struct InsertResult {
  InsertOutcome outcome;
  SlotHandle slot;
};

struct Occupancy {
  std::uint64_t occupied = 0;
  std::uint64_t fresh = 0;  // slots still NEW
  double load_factor = 0.0;
};

class StateTable {
 public:
  /// Buckets per chunk; chunks are the unit of work distribution and of the
  /// "has NEW slots" hint used by exploration.
  static constexpr std::uint64_t kChunkBuckets = 64;
  static constexpr int kSpinLimit = 1024;

  StateTable(const TableConfig& cfg, std::uint32_t vector_length)
      : cfg_(cfg), vector_length_(vector_length) {
    if (cfg.bucket_words != 4 && cfg.bucket_words != 8 && cfg.bucket_words != 16 &&
        cfg.bucket_words != 32) {
      throw std::invalid_argument("bucket size must be one of 4, 8, 16, 32 (got " +
                                  std::to_string(cfg.bucket_words) + ")");
    }
    if (cfg.num_hash_functions == 0) throw std::invalid_argument("need at least one hash function");
    layout_ = cfg.effective_layout();
    slots_ = bmc::slots_per_bucket(cfg.bucket_words, vector_length, layout_);
    buckets_ = cfg.capacity_words / cfg.bucket_words;
    if (buckets_ < cfg.num_hash_functions) {
      throw std::invalid_argument("table too small: " + std::to_string(buckets_) +
                                  " buckets for " + std::to_string(cfg.num_hash_functions) +
                                  " hash functions");
    }

    const std::uint32_t half = cfg.bucket_words / 2;
    const std::uint32_t per_half = layout_ == BucketLayout::kHalfBucket ? slots_ / 2 : slots_;
    for (std::uint32_t s = 0; s < slots_; ++s) {
      slot_offset_[s] = layout_ == BucketLayout::kHalfBucket
                            ? (s / per_half) * half + (s % per_half) * vector_length
                            : s * vector_length;
    }

    status_bytes_ = (slots_ + 3u) & ~3u;
    stride_ = status_bytes_ + std::size_t{cfg.bucket_words} * 4;
    memory_ = detail::ZeroedRegion(buckets_ * stride_);

    chunks_ = (buckets_ + kChunkBuckets - 1) / kChunkBuckets;
    chunk_dirty_ = std::make_unique<std::atomic<std::uint8_t>[]>(chunks_);

    std::mt19937_64 gen(cfg.seed);
    for (std::uint32_t i = 0; i < cfg.num_hash_functions; ++i) {
      const std::uint64_t a = gen() | 1u;
      const std::uint64_t b = gen();
      hash_.push_back({a, b});
    }
  }

  StateTable(const StateTable&) = delete;
  StateTable& operator=(const StateTable&) = delete;

  const TableConfig& config() const noexcept { return cfg_; }
  BucketLayout layout() const noexcept { return layout_; }
  std::uint32_t vector_length() const noexcept { return vector_length_; }
  std::uint32_t slots_per_bucket() const noexcept { return slots_; }
  std::uint64_t buckets() const noexcept { return buckets_; }
  std::uint64_t total_slots() const noexcept { return buckets_ * slots_; }
  std::uint64_t chunks() const noexcept { return chunks_; }
  std::uint32_t num_hash_functions() const noexcept { return cfg_.num_hash_functions; }

  /// Bucket probed by hash function `i`.
  std::uint64_t bucket_index(std::span<const std::uint32_t> v, std::uint32_t i) const {
    assert(i < hash_.size() && "hash function index out of range");
    return reduce(fold_words(v), i);
  }

  /// Hints the cache about the first bucket `v` will probe.
  void prefetch(std::span<const std::uint32_t> v) const noexcept {
    const std::uint64_t b = reduce(fold_words(v), 0);
    __builtin_prefetch(status_ptr(b), 1);
    __builtin_prefetch(data_ptr(b), 1);
  }

  InsertResult find_or_insert(std::span<const std::uint32_t> v) {
    assert(v.size() == vector_length_);
    const std::uint64_t folded = fold_words(v);
    for (std::uint32_t i = 0; i < hash_.size(); ++i) {
      const std::uint64_t b = reduce(folded, i);
      std::uint8_t* status = status_ptr(b);
      std::uint32_t* data = data_ptr(b);
      for (std::uint32_t s = 0; s < slots_; ++s) {
        std::atomic_ref<std::uint8_t> cell(status[s]);
        std::uint8_t st = cell.load(std::memory_order_acquire);
        if (st == kEmptyByte) {
          std::uint8_t expected = kEmptyByte;
          if (cell.compare_exchange_strong(expected, kClaimedByte, std::memory_order_acq_rel,
                                           std::memory_order_acquire)) {
            std::copy(v.begin(), v.end(), data + slot_offset_[s]);
            cell.store(kNewByte, std::memory_order_seq_cst);
            mark_chunk(b);
            shard(b).inserted.fetch_add(1, std::memory_order_relaxed);
            return {InsertOutcome::kInserted, handle(b, s)};
          }
          st = expected;
        }
        if (st == kClaimedByte) st = wait_published(cell);
        if (words_equal(v.data(), data + slot_offset_[s], v.size())) {
          return {InsertOutcome::kFound, handle(b, s)};
        }
      }
    }
    return {InsertOutcome::kTableFull, {}};
  }

  /// Lookup without insertion.
  std::optional<SlotHandle> find(std::span<const std::uint32_t> v) const {
    const std::uint64_t folded = fold_words(v);
    for (std::uint32_t i = 0; i < hash_.size(); ++i) {
      const std::uint64_t b = reduce(folded, i);
      std::uint8_t* status = status_ptr(b);
      const std::uint32_t* data = data_ptr(b);
      for (std::uint32_t s = 0; s < slots_; ++s) {
        std::atomic_ref<std::uint8_t> cell(status[s]);
        std::uint8_t st = cell.load(std::memory_order_acquire);
        // A vector only reaches later buckets once this one is full.
        if (st == kEmptyByte) return std::nullopt;
        if (st == kClaimedByte) st = wait_published(cell);
        if (words_equal(v.data(), data + slot_offset_[s], v.size())) return handle(b, s);
      }
    }
    return std::nullopt;
  }

  /// NEW -> OLD. True iff this caller made the transition.
  bool claim_new(SlotHandle h) {
    std::atomic_ref<std::uint8_t> cell(status_byte(h));
    std::uint8_t expected = kNewByte;
    if (cell.compare_exchange_strong(expected, kOldByte, std::memory_order_acq_rel,
                                     std::memory_order_acquire)) {
      shard(h.index / slots_).claimed.fetch_add(1, std::memory_order_relaxed);
      return true;
    }
    assert(expected != kEmptyByte && expected != kClaimedByte && "claim_new on an unpublished slot");
    return false;
  }

  SlotStatus status(SlotHandle h) const {
    return static_cast<SlotStatus>(
        std::atomic_ref<std::uint8_t>(status_byte(h)).load(std::memory_order_acquire));
  }

  /// Words of a published slot.
  std::span<const std::uint32_t> words(SlotHandle h) const {
    const std::uint64_t b = h.index / slots_;
    const auto s = static_cast<std::uint32_t>(h.index % slots_);
    return {data_ptr(b) + slot_offset_[s], vector_length_};
  }

  /// Handles of NEW slots in buckets [first, last), bucket-major. Weakly
  /// consistent under concurrency; use claim_new for exclusivity.
  std::vector<SlotHandle> scan_new(std::uint64_t first_bucket, std::uint64_t last_bucket) const {
    std::vector<SlotHandle> out;
    last_bucket = std::min(last_bucket, buckets_);
    for (std::uint64_t b = first_bucket; b < last_bucket; ++b) {
      std::uint8_t* status = status_ptr(b);
      for (std::uint32_t s = 0; s < slots_; ++s) {
        std::uint8_t st = std::atomic_ref<std::uint8_t>(status[s]).load(std::memory_order_acquire);
        if (st == kEmptyByte) break;
        if (st == kNewByte) out.push_back(handle(b, s));
      }
    }
    return out;
  }

  /// Visits the NEW slots of one chunk if the chunk has been marked since the
  /// last call for it. Any slot published after the mark is cleared re-marks
  /// the chunk, so repeated rounds never miss a NEW slot.
  template <class Visit>
  bool scan_chunk_new(std::uint64_t chunk, Visit&& visit) {
    if (chunk_dirty_[chunk].exchange(0, std::memory_order_seq_cst) == 0) return false;
    const std::uint64_t first = chunk * kChunkBuckets;
    const std::uint64_t last = std::min(first + kChunkBuckets, buckets_);
    for (std::uint64_t b = first; b < last; ++b) {
      std::uint8_t* status = status_ptr(b);
      for (std::uint32_t s = 0; s < slots_; ++s) {
        std::uint8_t st = std::atomic_ref<std::uint8_t>(status[s]).load(std::memory_order_seq_cst);
        if (st == kEmptyByte) break;
        if (st == kNewByte) visit(handle(b, s));
      }
    }
    return true;
  }

  Occupancy occupancy() const {
    Occupancy o;
    std::uint64_t claimed = 0;
    for (const auto& sh : shards_) {
      o.occupied += sh.inserted.load(std::memory_order_relaxed);
      claimed += sh.claimed.load(std::memory_order_relaxed);
    }
    o.fresh = o.occupied >= claimed ? o.occupied - claimed : 0;
    o.load_factor = static_cast<double>(o.occupied) / static_cast<double>(total_slots());
    return o;
  }

  /// Occupancy by walking every slot; exact only when quiescent.
  Occupancy recount() const {
    Occupancy o;
    for_each_occupied([&](SlotHandle h, SlotStatus st) {
      ++o.occupied;
      if (st == SlotStatus::kNew) ++o.fresh;
      (void)h;
    });
    o.load_factor = static_cast<double>(o.occupied) / static_cast<double>(total_slots());
    return o;
  }

  /// Visits every non-empty slot (CLAIMED slots included) in bucket-major order.
  template <class Visit>
  void for_each_occupied(Visit&& visit) const {
    for (std::uint64_t b = 0; b < buckets_; ++b) {
      std::uint8_t* status = status_ptr(b);
      for (std::uint32_t s = 0; s < slots_; ++s) {
        std::uint8_t st = std::atomic_ref<std::uint8_t>(status[s]).load(std::memory_order_acquire);
        if (st == kEmptyByte) break;
        visit(handle(b, s), static_cast<SlotStatus>(st));
      }
    }
  }

  /// All published vectors, sorted.
  std::vector<PackedState> dump_states() const {
    std::vector<PackedState> out;
    for_each_occupied([&](SlotHandle h, SlotStatus st) {
      if (st == SlotStatus::kNew || st == SlotStatus::kOld) out.emplace_back(words(h));
    });
    std::sort(out.begin(), out.end());
    return out;
  }

  /// CSV of every non-empty slot: bucket,slot,status,words.
  void dump_csv(std::ostream& out) const {
    out << "bucket,slot,status,words\n";
    for_each_occupied([&](SlotHandle h, SlotStatus st) {
      out << h.index / slots_ << ',' << h.index % slots_ << ',' << to_string(st) << ',';
      if (st == SlotStatus::kNew || st == SlotStatus::kOld) out << to_hex(words(h));
      out << '\n';
    });
  }

 private:
  static constexpr std::uint8_t kEmptyByte = 0;
  static constexpr std::uint8_t kClaimedByte = 1;
  static constexpr std::uint8_t kNewByte = 2;
  static constexpr std::uint8_t kOldByte = 3;

  struct HashConstants {
    std::uint64_t a;  // odd
    std::uint64_t b;
  };

  struct alignas(64) CounterShard {
    std::atomic<std::uint64_t> inserted{0};
    std::atomic<std::uint64_t> claimed{0};
  };
  static constexpr std::size_t kShards = 16;

  // Affine hash over the folded vector, mapped onto [0, buckets) by taking
  // the high half of a 128-bit product.
  std::uint64_t reduce(std::uint64_t folded, std::uint32_t i) const {
    const std::uint64_t h = hash_[i].a * folded + hash_[i].b;
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * buckets_) >> 64);
  }

  SlotHandle handle(std::uint64_t bucket, std::uint32_t slot) const {
    return {bucket * slots_ + slot};
  }
  std::uint8_t* status_ptr(std::uint64_t bucket) const {
    return reinterpret_cast<std::uint8_t*>(memory_.data() + bucket * stride_);
  }
  std::uint32_t* data_ptr(std::uint64_t bucket) const {
    return reinterpret_cast<std::uint32_t*>(memory_.data() + bucket * stride_ + status_bytes_);
  }
  std::uint8_t& status_byte(SlotHandle h) const {
    return status_ptr(h.index / slots_)[h.index % slots_];
  }
  CounterShard& shard(std::uint64_t bucket) { return shards_[bucket % kShards]; }

  void mark_chunk(std::uint64_t bucket) {
    auto& flag = chunk_dirty_[bucket / kChunkBuckets];
    if (flag.load(std::memory_order_seq_cst) == 0) flag.store(1, std::memory_order_seq_cst);
  }

  // Claim-to-publish is a handful of stores; spin briefly, then yield so a
  // descheduled claimant can finish.
  static std::uint8_t wait_published(std::atomic_ref<std::uint8_t>& cell) {
    for (int spin = 0;; ++spin) {
      std::uint8_t st = cell.load(std::memory_order_acquire);
      if (st != kClaimedByte) return st;
      if (spin < kSpinLimit) {
#if defined(__x86_64__) || defined(_M_X64)
        _mm_pause();
#endif
      } else {
        std::this_thread::yield();
      }
    }
  }

  TableConfig cfg_;
  std::uint32_t vector_length_;
  BucketLayout layout_;
  std::uint32_t slots_ = 0;
  std::uint64_t buckets_ = 0;
  std::uint64_t chunks_ = 0;
  std::size_t status_bytes_ = 0;
  std::size_t stride_ = 0;
  std::array<std::uint32_t, 32> slot_offset_{};
  detail::ZeroedRegion memory_;
  std::unique_ptr<std::atomic<std::uint8_t>[]> chunk_dirty_;
  std::vector<HashConstants> hash_;
  std::array<CounterShard, kShards> shards_;
};

}  // namespace bmc
