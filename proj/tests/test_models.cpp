#include <gtest/gtest.h>

#include <filesystem>

#include "bmc/io.hpp"
#include "bmc/models.hpp"
#include "bmc/oracle.hpp"

using namespace bmc;

namespace {

std::uint64_t pow3(std::uint32_t k) {
  std::uint64_t r = 1;
  while (k--) r *= 3;
  return r;
}

// Closed form of the gas station state count: customers not engaged
// contribute a factor 3 each; one engaged customer 14 configurations, two
// engaged 98.
std::uint64_t gas_station_states(std::uint32_t n) {
  std::uint64_t s = pow3(n) + 14ull * n * pow3(n - 1);
  if (n >= 2) s += 98ull * (n * (n - 1) / 2) * pow3(n - 2);
  return s;
}

}  // namespace

TEST(TokenRing, ReferenceCounts) {
  const std::uint64_t want[] = {12, 54, 216, 810};
  for (std::uint32_t n = 2; n <= 5; ++n) {
    EXPECT_EQ(sequential_bfs(gen_token_ring(n).build(), {false}).states, want[n - 2]) << n;
  }
}

TEST(TokenRing, ClosedForm) {
  for (std::uint32_t n = 2; n <= 9; ++n) {
    auto r = sequential_bfs(gen_token_ring(n).build(), {false});
    EXPECT_EQ(r.states, 2ull * n * pow3(n - 1)) << n;
    EXPECT_TRUE(r.deadlocks.empty());
  }
}

TEST(TokenRing, Structure) {
  auto m = gen_token_ring(3);
  Network net = m.build();
  ASSERT_EQ(net.size(), 3u);
  EXPECT_EQ(net.rules().size(), 3u);
  for (std::size_t p = 0; p < 3; ++p) {
    // Three internal steps, send and receive only through rules.
    EXPECT_EQ(net.process(p).transitions.size(), 5u);
    EXPECT_EQ(net.independent_labels(p).size(), 1u);
  }
  EXPECT_EQ(net.initial_state(), (CompositeState{3, 0, 0}));
  EXPECT_THROW(gen_token_ring(1), std::invalid_argument);
  EXPECT_THROW(gen_token_ring(17), std::invalid_argument);
}

TEST(GasStation, ClosedFormAndDeadlockFree) {
  for (std::uint32_t n = 1; n <= 6; ++n) {
    auto r = sequential_bfs(gen_gas_station(n).build(), {false});
    EXPECT_EQ(r.states, gas_station_states(n)) << n;
    EXPECT_TRUE(r.deadlocks.empty()) << n;
  }
}

TEST(GasStation, Structure) {
  Network net = gen_gas_station(4).build();
  EXPECT_EQ(net.size(), 3u + 4u);
  EXPECT_EQ(net.process(0).num_states, 16u);
  EXPECT_EQ(net.process(1).num_states, 4u);
  EXPECT_EQ(net.process(3).num_states, 11u);
  EXPECT_TRUE(net.warnings().empty());
  EXPECT_THROW(gen_gas_station(0), std::invalid_argument);
  EXPECT_THROW(gen_gas_station(13), std::invalid_argument);
}

TEST(Models, CountsNonDecreasingInN) {
  std::uint64_t prev = 0;
  for (std::uint32_t n = 2; n <= 6; ++n) {
    auto s = sequential_bfs(gen_gas_station(n).build(), {false}).states;
    EXPECT_GE(s, prev);
    prev = s;
  }
}

TEST(Models, WrittenFilesLoadBack) {
  const auto dir = std::filesystem::temp_directory_path() / "bmc_models_test";
  std::filesystem::remove_all(dir);
  for (const auto& m : {gen_gas_station(2), gen_token_ring(4), dining_philosophers(3), producer_consumer()}) {
    const auto sub = dir / m.name;
    m.write_to(sub);
    auto loaded = load_network(sub / m.network_file);
    auto a = sequential_bfs(loaded.network, {false});
    auto b = sequential_bfs(m.build(), {false});
    EXPECT_EQ(a.states, b.states) << m.name;
    EXPECT_EQ(a.transitions, b.transitions) << m.name;
  }
  std::filesystem::remove_all(dir);
}

TEST(Models, BundledProducerConsumerMatchesGenerator) {
  auto loaded = load_network(std::filesystem::path(BMC_SOURCE_DIR) / "models/producer-consumer/net.exp");
  auto r = sequential_bfs(loaded.network, {false});
  EXPECT_EQ(r.states, 8u);
  EXPECT_EQ(r.transitions, 24u);
}

TEST(Models, UnknownKind) { EXPECT_THROW(generate_model("elevator", 3), std::invalid_argument); }

TEST(Io, MissingFiles) {
  try {
    load_network("/nonexistent/net.exp");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("file not found"), std::string::npos);
  }
  const auto dir = std::filesystem::temp_directory_path() / "bmc_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "net.exp") << "par using in \"gone.aut\" end par\n";
  }
  EXPECT_THROW(load_network(dir / "net.exp"), InputError);
  {
    std::ofstream(dir / "bad.aut") << "des (0, 2, 2)\n(0, a, 1)\n";
    std::ofstream(dir / "net.exp") << "par using in \"bad.aut\" end par\n";
  }
  try {
    load_network(dir / "net.exp");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.aut"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("transition count mismatch"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
