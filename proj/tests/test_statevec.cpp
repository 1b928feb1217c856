#include <gtest/gtest.h>

#include <random>
#include <set>

#include "bmc/models.hpp"
#include "bmc/oracle.hpp"
#include "bmc/statevec.hpp"
#include "support.hpp"

using namespace bmc;

namespace {

PackingScheme scheme_for(std::vector<std::uint32_t> counts) { return PackingScheme::for_state_counts(counts); }

CompositeState random_state(const PackingScheme& sc, const std::vector<std::uint32_t>& counts, std::mt19937_64& gen) {
  CompositeState s(sc.processes());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = gen() % counts[i];
  return s;
}

}  // namespace

TEST(PackingScheme, ProducerConsumerWidths) {
  auto sc = PackingScheme::for_network(test::producer_consumer_network());
  EXPECT_EQ(sc.widths(), (std::vector<std::uint32_t>{1, 1, 1}));
  EXPECT_EQ(sc.vector_length(), 1u);
  EXPECT_EQ(sc.total_bits(), 3u);
}

TEST(PackingScheme, SingleStateHasWidthOne) {
  auto sc = scheme_for({1});
  EXPECT_EQ(sc.widths(), std::vector<std::uint32_t>{1});
  EXPECT_EQ(sc.vector_length(), 1u);
}

TEST(PackingScheme, WidthFormula) {
  auto sc = scheme_for({2, 3, 4, 5, 8, 9, 1u << 20});
  EXPECT_EQ(sc.widths(), (std::vector<std::uint32_t>{1, 2, 2, 3, 3, 4, 20}));
}

TEST(PackingScheme, ThirtySixBitsTakeTwoWords) {
  auto sc = scheme_for({1u << 12, 1u << 12, 1u << 12});
  EXPECT_EQ(sc.total_bits(), 36u);
  EXPECT_EQ(sc.vector_length(), 2u);
}

TEST(PackingScheme, FieldsNeverStraddle) {
  auto sc = scheme_for({1u << 20, 1u << 20});
  ASSERT_EQ(sc.fields().size(), 2u);
  EXPECT_EQ(sc.fields()[1].word, 1u);
  EXPECT_EQ(sc.fields()[1].shift, 0u);
  std::mt19937_64 gen(5);
  for (std::uint32_t n : {3u, 100u, 5000u, 70000u}) {
    std::vector<std::uint32_t> counts(12, n);
    auto s2 = PackingScheme::for_state_counts(counts);
    for (const auto& f : s2.fields()) EXPECT_LE(f.shift + f.width, 32u);
  }
}

TEST(PackingScheme, TooWide) {
  std::vector<std::uint32_t> counts(17, 1u << 20);  // 17 words without straddling
  try {
    PackingScheme::for_state_counts(counts);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("state vector too wide"), std::string::npos);
  }
  std::vector<std::uint32_t> fits(16, 1u << 20);
  EXPECT_EQ(PackingScheme::for_state_counts(fits).vector_length(), 16u);
}

TEST(Pack, ProducerConsumerExample) {
  auto sc = PackingScheme::for_network(test::producer_consumer_network());
  PackedState p = sc.pack(CompositeState{1, 0, 1});
  EXPECT_EQ(p.length, 1u);
  EXPECT_EQ(p.words[0], 0x5u);
  EXPECT_EQ(sc.unpack(p.span()), (CompositeState{1, 0, 1}));
}

TEST(Pack, ZeroStateIsZeroWords) {
  auto sc = scheme_for({7, 300, 1u << 20, 2, 90000});
  PackedState p = sc.pack(CompositeState(5, 0));
  for (std::uint32_t w = 0; w < p.length; ++w) EXPECT_EQ(p.words[w], 0u);
}

TEST(Pack, CorruptFieldRejected) {
  auto sc = scheme_for({3, 2});  // widths (2,1)
  std::array<std::uint32_t, 1> bad{3};  // field 0 decodes to 3 >= 3
  EXPECT_THROW(sc.unpack(bad), CorruptStateError);
  std::array<std::uint32_t, 1> padding{1u << 3};
  EXPECT_THROW(sc.unpack(padding), CorruptStateError);
  std::array<std::uint32_t, 1> ok{0b110};
  EXPECT_EQ(sc.unpack(ok), (CompositeState{2, 1}));
}

TEST(Pack, RoundTripRandomSchemes) {
  std::mt19937_64 gen(99);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::uint32_t> counts(1 + gen() % 20);
    for (auto& c : counts) c = 1 + gen() % (gen() % 2 ? 16 : (1u << 20));
    PackingScheme sc;
    try {
      sc = PackingScheme::for_state_counts(counts);
    } catch (const std::invalid_argument&) {
      continue;
    }
    for (int k = 0; k < 100; ++k) {
      auto s = random_state(sc, counts, gen);
      ASSERT_EQ(sc.unpack(sc.pack(s).span()), s);
    }
  }
}

TEST(Pack, RoundTripBundledModels) {
  std::mt19937_64 gen(17);
  for (const auto& m : {producer_consumer(), generate_model("gas-station", 6), generate_model("token-ring", 12),
                        generate_model("philosophers", 6)}) {
    Network net = m.build();
    auto sc = PackingScheme::for_network(net);
    std::vector<std::uint32_t> counts;
    for (const auto& p : net.processes()) counts.push_back(p.num_states);
    for (int k = 0; k < 10000; ++k) {
      auto s = random_state(sc, counts, gen);
      ASSERT_EQ(sc.unpack(sc.pack(s).span()), s) << m.name;
    }
  }
}

// Injectivity over complete small products.
TEST(Pack, InjectiveOnFullProduct) {
  std::vector<std::uint32_t> counts{3, 5, 2, 7, 4};
  auto sc = scheme_for(counts);
  std::set<PackedState> seen;
  CompositeState s(counts.size(), 0);
  std::size_t total = 0;
  while (true) {
    seen.insert(sc.pack(s));
    ++total;
    std::size_t i = 0;
    while (i < s.size() && ++s[i] == counts[i]) s[i++] = 0;
    if (i == s.size()) break;
  }
  EXPECT_EQ(total, 3u * 5 * 2 * 7 * 4);
  EXPECT_EQ(seen.size(), total);
}

TEST(CanonicalDump, SortedLowercaseHex) {
  std::vector<PackedState> states;
  for (auto words : {std::vector<std::uint32_t>{0xABCDEFu, 1}, {0, 0xFFFFFFFFu}, {0xABCDEFu, 0}}) {
    states.emplace_back(std::span<const std::uint32_t>(words));
  }
  EXPECT_EQ(canonical_dump(states), "00000000 ffffffff\n00abcdef 00000000\n00abcdef 00000001\n");
}

TEST(CanonicalDump, OrderIsLexicographicByWord) {
  std::array<std::uint32_t, 2> a{1, 0}, b{0, 5};
  EXPECT_LT(PackedState(std::span<const std::uint32_t>(b)), PackedState(std::span<const std::uint32_t>(a)));
}
