#pragma once

// Bit-packing of composite states into fixed-length vectors of 32-bit words.
//
// Fields are laid out process 0 first, starting at bit 0 of word 0. A field
// never straddles a word boundary: if it does not fit in the remainder of the
// current word it starts at bit 0 of the next one. Padding bits are zero.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmc/network.hpp"

namespace bmc {

/// Word-wise equality; vectors are short, so a plain loop beats memcmp.
inline bool words_equal(const std::uint32_t* a, const std::uint32_t* b, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

inline constexpr std::uint32_t kMaxVectorLength = 16;

/// A packed state. Only the first `length` words are meaningful; the rest are
/// kept zero so that defaulted comparison works on the whole array.
struct PackedState {
  std::array<std::uint32_t, kMaxVectorLength> words{};
  std::uint32_t length = 0;

  PackedState() = default;
  explicit PackedState(std::span<const std::uint32_t> w) : length(static_cast<std::uint32_t>(w.size())) {
    std::copy(w.begin(), w.end(), words.begin());
  }

  std::span<const std::uint32_t> span() const { return {words.data(), length}; }
  std::span<std::uint32_t> span() { return {words.data(), length}; }

  friend bool operator==(const PackedState& a, const PackedState& b) {
    return a.length == b.length && std::ranges::equal(a.span(), b.span());
  }
  /// Lexicographic over the words; shorter vectors order first.
  friend std::strong_ordering operator<=>(const PackedState& a, const PackedState& b) {
    return std::lexicographical_compare_three_way(a.words.begin(), a.words.begin() + a.length,
                                                  b.words.begin(), b.words.begin() + b.length);
  }
};

class CorruptStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PackingScheme {
 public:
  struct Field {
    std::uint32_t word;
    std::uint32_t shift;
    std::uint32_t width;
  };

  PackingScheme() = default;

  /// Builds a scheme for processes with the given state counts.
  static PackingScheme for_state_counts(std::span<const std::uint32_t> counts) {
    if (counts.empty()) throw std::invalid_argument("packing scheme needs at least one process");
    PackingScheme scheme;
    std::uint32_t word = 0, used = 0;
    for (std::uint32_t count : counts) {
      if (count == 0) throw std::invalid_argument("process with zero states");
      const std::uint32_t width = std::max<std::uint32_t>(1, std::bit_width(count - 1));
      if (width > 32) throw std::invalid_argument("process state count too large");
      if (used + width > 32) {
        ++word;
        used = 0;
      }
      scheme.fields_.push_back({word, used, width});
      scheme.counts_.push_back(count);
      scheme.total_bits_ += width;
      used += width;
    }
    scheme.vector_length_ = word + 1;
    if (scheme.vector_length_ > kMaxVectorLength) {
      throw std::invalid_argument("state vector too wide: needs " +
                                  std::to_string(scheme.vector_length_) + " words (limit " +
                                  std::to_string(kMaxVectorLength) + ")");
    }
    return scheme;
  }

  static PackingScheme for_network(const Network& net) {
    std::vector<std::uint32_t> counts;
    for (const auto& p : net.processes()) counts.push_back(p.num_states);
    return for_state_counts(counts);
  }

  std::size_t processes() const noexcept { return fields_.size(); }
  std::uint32_t vector_length() const noexcept { return vector_length_; }
  std::uint32_t total_bits() const noexcept { return total_bits_; }
  std::vector<std::uint32_t> widths() const {
    std::vector<std::uint32_t> w;
    for (const auto& f : fields_) w.push_back(f.width);
    return w;
  }
  const std::vector<Field>& fields() const noexcept { return fields_; }

  void pack(std::span<const LocalState> s, std::span<std::uint32_t> out) const {
    std::fill(out.begin(), out.begin() + vector_length_, 0u);
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      out[fields_[i].word] |= s[i] << fields_[i].shift;
    }
  }

  PackedState pack(std::span<const LocalState> s) const {
    PackedState p;
    p.length = vector_length_;
    pack(s, p.words);
    return p;
  }

  /// Throws CorruptStateError when a field decodes to an index outside its
  /// process or a padding bit is set.
  void unpack(std::span<const std::uint32_t> words, std::span<LocalState> out) const {
    std::array<std::uint32_t, kMaxVectorLength> used_bits{};
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      const Field& f = fields_[i];
      const std::uint32_t mask = f.width == 32 ? ~0u : ((1u << f.width) - 1u);
      const std::uint32_t v = (words[f.word] >> f.shift) & mask;
      if (v >= counts_[i]) {
        throw CorruptStateError("corrupt packed state: process " + std::to_string(i) +
                                " decodes to " + std::to_string(v) + " (has " +
                                std::to_string(counts_[i]) + " states)");
      }
      used_bits[f.word] |= mask << f.shift;
      out[i] = v;
    }
    for (std::uint32_t w = 0; w < vector_length_; ++w) {
      if (words[w] & ~used_bits[w]) throw CorruptStateError("corrupt packed state: padding bits set");
    }
  }

  CompositeState unpack(std::span<const std::uint32_t> words) const {
    CompositeState s(fields_.size());
    unpack(words, s);
    return s;
  }

 private:
  std::vector<Field> fields_;
  std::vector<std::uint32_t> counts_;
  std::uint32_t total_bits_ = 0;
  std::uint32_t vector_length_ = 0;
};

// ---------------------------------------------------------------------------
// Hashing helpers shared by the global table and the worker caches.

inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

/// Folds a word sequence into 64 bits with full avalanche.
inline std::uint64_t fold_words(std::span<const std::uint32_t> words) noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ words.size();
  for (std::uint32_t w : words) h = mix64(h ^ w) + 0x9e3779b97f4a7c15ULL;
  return mix64(h);
}

// ---------------------------------------------------------------------------
// Canonical dump: one state per line, words as lowercase hex separated by a
// space, lines sorted lexicographically by word value.

inline std::string to_hex(std::span<const std::uint32_t> words) {
  std::string out;
  out.reserve(words.size() * 9);
  char buf[9];
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    std::snprintf(buf, sizeof buf, "%08x", words[i]);
    out += buf;
  }
  return out;
}

inline std::string canonical_dump(std::vector<PackedState> states) {
  std::sort(states.begin(), states.end());
  std::string out;
  for (const auto& s : states) {
    out += to_hex(s.span());
    out.push_back('\n');
  }
  return out;
}

}  // namespace bmc
