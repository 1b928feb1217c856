#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "bmc/bench.hpp"
#include "bmc/models.hpp"
#include "support.hpp"

using namespace bmc;

namespace {

std::map<std::vector<std::uint32_t>, std::uint64_t> histogram(const VectorSequence& seq) {
  std::map<std::vector<std::uint32_t>, std::uint64_t> h;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto v = seq[i];
    ++h[std::vector<std::uint32_t>(v.begin(), v.end())];
  }
  return h;
}

DuplicationSpec spec(std::uint64_t total, std::uint64_t d, std::uint32_t len = 1, std::uint64_t seed = 1) {
  DuplicationSpec s;
  s.total = total;
  s.duplication = d;
  s.vector_length = len;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(DuplicationSequence, AllUnique) {
  auto seq = gen_duplication_sequence(spec(100, 1));
  EXPECT_EQ(seq.size(), 100u);
  EXPECT_EQ(histogram(seq).size(), 100u);
}

TEST(DuplicationSequence, OneValueRepeated) {
  auto seq = gen_duplication_sequence(spec(100, 100));
  auto h = histogram(seq);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.begin()->second, 100u);
}

TEST(DuplicationSequence, PaddingRule) {
  auto seq = gen_duplication_sequence(spec(1'000'000, 21));
  EXPECT_EQ(seq.size(), 1'000'000u);
  auto h = histogram(seq);
  ASSERT_EQ(h.size(), 47'619u);
  std::map<std::uint64_t, std::uint64_t> multiplicities;
  for (const auto& [v, c] : h) ++multiplicities[c];
  // 47,618 values appear 21 times; the last one absorbs the remainder.
  EXPECT_EQ(multiplicities[21], 47'618u);
  EXPECT_EQ(multiplicities[1'000'000 - 47'618 * 21], 1u);
}

TEST(DuplicationSequence, Deterministic) {
  auto a = gen_duplication_sequence(spec(5000, 7, 2, 99));
  auto b = gen_duplication_sequence(spec(5000, 7, 2, 99));
  auto c = gen_duplication_sequence(spec(5000, 7, 2, 100));
  EXPECT_EQ(a.words, b.words);
  EXPECT_NE(a.words, c.words);
}

TEST(DuplicationSequence, IsShuffled) {
  auto seq = gen_duplication_sequence(spec(10000, 10));
  std::size_t adjacent_equal = 0;
  for (std::size_t i = 1; i < seq.size(); ++i) adjacent_equal += seq.words[i] == seq.words[i - 1];
  EXPECT_LT(adjacent_equal, 100u);
}

TEST(DuplicationSequence, CardinalityLawsProperty) {
  std::mt19937_64 gen(4);
  for (int round = 0; round < 60; ++round) {
    const std::uint64_t total = 1 + gen() % 3000;
    const std::uint64_t d = 1 + gen() % total;
    const std::uint32_t len = 1 + gen() % 4;
    auto seq = gen_duplication_sequence(spec(total, d, len, gen()));
    ASSERT_EQ(seq.size(), total);
    ASSERT_EQ(seq.words.size(), total * len);
    auto h = histogram(seq);
    ASSERT_EQ(h.size(), total / d);
    std::uint64_t sum = 0, padded = 0;
    for (const auto& [v, c] : h) {
      sum += c;
      if (c != d) {
        ++padded;
        EXPECT_GT(c, d);
      }
    }
    EXPECT_EQ(sum, total);
    EXPECT_LE(padded, 1u);
  }
}

TEST(DuplicationSequence, InvalidSpec) {
  EXPECT_THROW(gen_duplication_sequence(spec(10, 0)), std::invalid_argument);
  EXPECT_THROW(gen_duplication_sequence(spec(10, 11)), std::invalid_argument);
  EXPECT_THROW(gen_duplication_sequence(spec(10, 1, 17)), std::invalid_argument);
}

TEST(InsertBench, TableSizedForHalfLoad) {
  for (std::uint32_t b : {4u, 8u, 16u, 32u}) {
    auto s = spec(100000, 1, 3);
    auto cfg = bench_table_config(s, b);
    StateTable t(cfg, 3);
    EXPECT_GE(t.total_slots(), 2 * s.total) << b;
  }
}

TEST(InsertBench, CountsAtDuplication100) {
  auto s = spec(1'000'000, 100);
  auto seq = gen_duplication_sequence(s);
  auto rec = run_insert_bench(seq, s, bench_table_config(s, 4), 1);
  EXPECT_EQ(rec.inserted, 10'000u);
  EXPECT_EQ(rec.found, 990'000u);
  EXPECT_GT(rec.wall_ms, 0.0);
  EXPECT_GT(rec.inserts_per_sec, 0.0);
}

TEST(InsertBench, ReproducibleCounts) {
  auto s = spec(200'000, 3, 2, 8);
  auto seq = gen_duplication_sequence(s);
  auto a = run_insert_bench(seq, s, bench_table_config(s, 16), 1);
  auto b = run_insert_bench(seq, s, bench_table_config(s, 16), 1);
  EXPECT_EQ(a.found, b.found);
  EXPECT_EQ(a.inserted, b.inserted);
  EXPECT_EQ(a.inserted, 200'000u / 3);
}

TEST(InsertBench, ThreadsAgreeOnCounts) {
  auto s = spec(300'000, 5, 1, 2);
  auto seq = gen_duplication_sequence(s);
  for (std::uint32_t threads : {2u, 4u, 8u}) {
    auto rec = run_insert_bench(seq, s, bench_table_config(s, 8), threads);
    EXPECT_EQ(rec.inserted, 60'000u);
    EXPECT_EQ(rec.found + rec.inserted, s.total);
  }
}

TEST(InsertBench, UndersizedTableIsAnError) {
  auto s = spec(10'000, 1);
  auto seq = gen_duplication_sequence(s);
  TableConfig cfg;
  cfg.bucket_words = 4;
  cfg.capacity_words = 4 * 100;
  EXPECT_THROW(run_insert_bench(seq, s, cfg, 1), std::runtime_error);
}

TEST(InsertBench, SweepAndCsv) {
  auto recs = duplication_sweep(spec(20'000, 1), {1, 10, 100}, {4, 32}, 1, 3);
  ASSERT_EQ(recs.size(), 6u);
  std::ostringstream out;
  write_bench_csv(out, recs);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "duplication,bucket_words,vector_length,threads,total,unique,runtime_ms,inserts_per_sec,found,inserted");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6u);
  EXPECT_EQ(default_duplication_grid(), (std::vector<std::uint64_t>{1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100}));
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_EQ(median({}), 0.0);
}

TEST(BucketSweep, NormalizedToSize32) {
  Network net = generate_model("token-ring", 5).build();
  ExploreConfig cfg;
  cfg.table.capacity_words = TableConfig::megabytes(4);
  auto cells = bucket_size_sweep(net, "token-ring-5", cfg, {4, 8, 16, 32}, 2);
  ASSERT_EQ(cells.size(), 4u);
  for (const auto& c : cells) {
    EXPECT_EQ(c.states, 810u);
    EXPECT_EQ(c.outcome, Outcome::kComplete);
    EXPECT_EQ(c.reps, 2u);
  }
  EXPECT_DOUBLE_EQ(cells[3].normalized, 1.0);
  std::ostringstream out;
  write_sweep_csv(out, cells);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "model,bucket,mean_ms,normalized,reps");
  EXPECT_NE(out.str().find("\ntoken-ring-5,32,"), std::string::npos);
}

TEST(BucketSweep, TableFullRecordedPerCell) {
  Network net = generate_model("token-ring", 6).build();
  ExploreConfig cfg;
  cfg.table.capacity_words = 512;
  auto cells = bucket_size_sweep(net, "tiny", cfg, {4, 32}, 1);
  ASSERT_EQ(cells.size(), 2u);
  for (const auto& c : cells) EXPECT_EQ(c.outcome, Outcome::kTableFull);
  std::ostringstream out;
  write_sweep_csv(out, cells);
  EXPECT_NE(out.str().find(",TABLE_FULL,"), std::string::npos);
}
