#include <gtest/gtest.h>

#include <random>
#include <string>

#include "bmc/aut.hpp"

using namespace bmc;

namespace {

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ParseAut, SmallestFile) {
  Lts lts = parse_aut("des (0,1,2)\n(0,\"a\",1)");
  EXPECT_EQ(lts.num_states, 2u);
  EXPECT_EQ(lts.initial, 0u);
  ASSERT_EQ(lts.transitions.size(), 1u);
  EXPECT_EQ(lts.labels, std::vector<std::string>{"a"});
  EXPECT_EQ(lts.transitions[0], (Transition{0, 0, 1}));
}

TEST(ParseAut, Producer) {
  Lts lts = parse_aut("des (0, 2, 2)\n(0, \"gen_work\", 1)\n(1, \"send\", 0)\n");
  EXPECT_EQ(lts.num_states, 2u);
  ASSERT_EQ(lts.transitions.size(), 2u);
  EXPECT_EQ(lts.labels[lts.transitions[0].label], "gen_work");
  EXPECT_EQ(lts.transitions[0].dst, 1u);
  EXPECT_EQ(lts.labels[lts.transitions[1].label], "send");
  EXPECT_EQ(lts.transitions[1].dst, 0u);
}

TEST(ParseAut, TransitionCountMismatch) {
  const std::string msg = error_of([] { parse_aut("des (0,2,2)\n(0,\"a\",1)"); });
  EXPECT_NE(msg.find("transition count mismatch: header says 2, found 1"), std::string::npos) << msg;
}

TEST(ParseAut, StateOutOfRangeReportsLine) {
  try {
    parse_aut("des (0,2,2)\n(0,\"a\",1)\n(1,\"b\",2)\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("state index 2 out of range"), std::string::npos);
  }
}

TEST(ParseAut, MalformedHeader) {
  EXPECT_THROW(parse_aut("dse (0,1,2)\n(0,\"a\",1)"), ParseError);
  EXPECT_THROW(parse_aut("des (0,1)\n(0,\"a\",1)"), ParseError);
  EXPECT_THROW(parse_aut(""), ParseError);
  EXPECT_THROW(parse_aut("des (2,0,2)\n"), ParseError);  // initial out of range
  EXPECT_THROW(parse_aut("des (0,0,0)\n"), ParseError);
}

TEST(ParseAut, Limits) {
  EXPECT_NO_THROW(parse_aut("des (0,0,1048576)\n"));
  EXPECT_THROW(parse_aut("des (0,0,1048577)\n"), ParseError);
}

TEST(ParseAut, UnquotedLabelsAndCrlf) {
  Lts lts = parse_aut("des (0, 2, 2)\r\n(0, a, 1)\r\n(1, \"b c\", 0)\r\n");
  EXPECT_EQ(lts.labels, (std::vector<std::string>{"a", "b c"}));
}

TEST(ParseAut, InternalActionCanonicalized) {
  Lts lts = parse_aut("des (0, 3, 2)\n(0, \"tau\", 1)\n(1, \"i\", 0)\n(0, x, 0)\n");
  ASSERT_EQ(lts.labels.size(), 2u);
  EXPECT_EQ(lts.transitions[0].label, lts.transitions[1].label);
  EXPECT_EQ(lts.find_label("tau"), lts.find_label("i"));
}

TEST(ParseAut, LabelIdsFollowFirstAppearance) {
  Lts lts = parse_aut("des (0, 4, 3)\n(0, c, 1)\n(1, a, 2)\n(2, c, 0)\n(0, b, 2)\n");
  EXPECT_EQ(lts.labels, (std::vector<std::string>{"c", "a", "b"}));
}

TEST(ParseAut, RoundTripRandom) {
  std::mt19937_64 gen(7);
  for (int round = 0; round < 200; ++round) {
    Lts lts;
    lts.num_states = 1 + gen() % 50;
    lts.initial = gen() % lts.num_states;
    const std::size_t nlabels = 1 + gen() % 6;
    const std::size_t ntrans = gen() % 80;
    std::vector<std::string> pool{"i", "a", "send", "rec work", "x_1", "long_label"};
    for (std::size_t t = 0; t < ntrans; ++t) {
      const std::string& name = pool[gen() % nlabels];
      LabelId id = 0;
      auto it = std::find(lts.labels.begin(), lts.labels.end(), name);
      if (it == lts.labels.end()) {
        id = static_cast<LabelId>(lts.labels.size());
        lts.labels.push_back(name);
      } else {
        id = static_cast<LabelId>(it - lts.labels.begin());
      }
      lts.transitions.push_back({static_cast<StateIndex>(gen() % lts.num_states), id,
                                 static_cast<StateIndex>(gen() % lts.num_states)});
    }
    const Lts again = parse_aut(unparse_aut(lts));
    ASSERT_EQ(again, lts);
    ASSERT_EQ(unparse_aut(again), unparse_aut(lts));
  }
}

TEST(ParseNetwork, ProducerConsumer) {
  const char* text =
      "par using\n"
      "    send * rec * _ -> trans,\n"
      "    send * _ * rec -> trans\n"
      "in\n"
      "    \"producer.aut\"\n"
      "    ||\n"
      "    \"consumer.aut\"\n"
      "    ||\n"
      "    \"consumer.aut\"\n"
      "end par\n";
  NetworkDescription d = parse_network(text);
  ASSERT_EQ(d.rules.size(), 2u);
  EXPECT_EQ(d.process_files, (std::vector<std::string>{"producer.aut", "consumer.aut", "consumer.aut"}));
  const auto& r = d.rules[0];
  ASSERT_EQ(r.items.size(), 3u);
  EXPECT_EQ(r.items[0], "send");
  EXPECT_EQ(r.items[1], "rec");
  EXPECT_EQ(r.items[2], std::nullopt);
  EXPECT_EQ(r.result, "trans");
  EXPECT_EQ(d.rules[1].items[2], "rec");
}

TEST(ParseNetwork, EmptyRuleList) {
  NetworkDescription d = parse_network("par using in \"a.aut\" end par");
  EXPECT_TRUE(d.rules.empty());
  EXPECT_EQ(d.process_files, std::vector<std::string>{"a.aut"});
}

TEST(ParseNetwork, ArityMismatch) {
  const std::string msg =
      error_of([] { parse_network("par using a * b -> c in \"x.aut\" || \"y.aut\" || \"z.aut\" end par"); });
  EXPECT_NE(msg.find("rule arity 2 ≠ 3 processes"), std::string::npos) << msg;
}

TEST(ParseNetwork, CommentsAndWhitespace) {
  NetworkDescription d = parse_network(
      "-- header comment\r\npar using a*b->c -- trailing\r\n,b * a -> d in a.aut||\"b.aut\"\nend   par -- done\n");
  EXPECT_EQ(d.rules.size(), 2u);
  EXPECT_EQ(d.process_files, (std::vector<std::string>{"a.aut", "b.aut"}));
}

TEST(ParseNetwork, SyntaxErrorHasPosition) {
  try {
    parse_network("par using\n  a * b c -> d\nin \"x\" || \"y\" end par");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 0u);
  }
}

TEST(ParseNetwork, MissingEnd) {
  EXPECT_THROW(parse_network("par using in \"a.aut\""), ParseError);
  EXPECT_THROW(parse_network("par using a -> in \"a.aut\" end par"), ParseError);
}

TEST(ParseNetwork, RoundTrip) {
  NetworkDescription d = parse_network(
      "par using send * rec * _ -> trans, send * _ * rec -> trans in \"p.aut\" || \"c.aut\" || \"c.aut\" end par");
  NetworkDescription again = parse_network(unparse_network(d));
  ASSERT_EQ(again.rules.size(), d.rules.size());
  EXPECT_EQ(again.process_files, d.process_files);
  for (std::size_t r = 0; r < d.rules.size(); ++r) {
    EXPECT_EQ(again.rules[r].items, d.rules[r].items);
    EXPECT_EQ(again.rules[r].result, d.rules[r].result);
  }
}
