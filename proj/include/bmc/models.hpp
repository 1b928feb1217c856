#pragma once

// Generators for the scalable benchmark models. Each generator emits real
// `.aut` files plus a network file; see docs/models.md for the constructions.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bmc/aut.hpp"
#include "bmc/network.hpp"

namespace bmc {

struct GeneratedModel {
  std::string name;
  /// File name -> contents; includes the network file.
  std::map<std::string, std::string> files;
  std::string network_file = "net.exp";

  void write_to(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, text] : files) {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
      out << text;
    }
  }

  /// Parses and builds the network without touching the filesystem.
  Network build() const {
    const NetworkDescription desc = parse_network(files.at(network_file));
    std::vector<Lts> ltss;
    for (const auto& f : desc.process_files) ltss.push_back(parse_aut(files.at(f)));
    return Network::build(desc, std::move(ltss));
  }
};

namespace detail {

struct AutBuilder {
  std::uint32_t states = 0;
  std::uint32_t initial = 0;
  std::vector<std::tuple<std::uint32_t, std::string, std::uint32_t>> edges;

  void edge(std::uint32_t s, std::string label, std::uint32_t d) { edges.emplace_back(s, std::move(label), d); }

  std::string text() const {
    std::ostringstream out;
    out << "des (" << initial << ", " << edges.size() << ", " << states << ")\n";
    for (const auto& [s, l, d] : edges) out << '(' << s << ", \"" << l << "\", " << d << ")\n";
    return out.str();
  }
};

// Rule with the given (process, action) participants in an n-process network.
inline RuleSpec make_rule(std::size_t n, std::initializer_list<std::pair<std::size_t, std::string>> items,
                          std::string result) {
  RuleSpec r;
  r.items.assign(n, std::nullopt);
  for (const auto& [p, a] : items) r.items[p] = a;
  r.result = std::move(result);
  return r;
}

}  // namespace detail

/// One producer and two consumers; `send` pairs with `rec` of either consumer.
inline GeneratedModel producer_consumer() {
  GeneratedModel m;
  m.name = "producer-consumer";
  m.network_file = "net.exp";
  m.files["producer.aut"] = "des (0, 2, 2)\n(0, \"gen_work\", 1)\n(1, \"send\", 0)\n";
  m.files["consumer.aut"] = "des (0, 3, 2)\n(0, \"rec\", 1)\n(1, \"work\", 1)\n(1, \"i\", 0)\n";
  m.files["net.exp"] =
      "par using\n"
      "    send * rec *  _  -> trans,\n"
      "    send *  _  * rec -> trans\n"
      "in\n"
      "    \"producer.aut\"\n"
      "    ||\n"
      "    \"consumer.aut\"\n"
      "    ||\n"
      "    \"consumer.aut\"\n"
      "end par\n";
  return m;
}

/// Ring of `nodes` processes passing a single token forward. A node without
/// the token steps through three local states by internal moves and can then
/// receive; the holder does one internal step before it may pass the token.
/// Reachable states: 2 * N * 3^(N-1).
inline GeneratedModel gen_token_ring(std::uint32_t nodes) {
  if (nodes < 2 || nodes > 16) throw std::invalid_argument("token ring needs 2..16 nodes");
  // 0,1,2: idle without token; 3: just received; 4: ready to pass.
  detail::AutBuilder node;
  node.states = 5;
  node.edge(0, "i", 1);
  node.edge(1, "i", 2);
  node.edge(2, "rec", 3);
  node.edge(3, "i", 4);
  node.edge(4, "send", 0);

  GeneratedModel m;
  m.name = "token-ring-" + std::to_string(nodes);
  node.initial = 0;
  m.files["node.aut"] = node.text();
  node.initial = 3;
  m.files["node_token.aut"] = node.text();

  NetworkDescription desc;
  for (std::uint32_t k = 0; k < nodes; ++k) desc.process_files.push_back(k == 0 ? "node_token.aut" : "node.aut");
  for (std::uint32_t k = 0; k < nodes; ++k) {
    desc.rules.push_back(detail::make_rule(nodes, {{k, "send"}, {(k + 1) % nodes, "rec"}}, "pass"));
  }
  m.files[m.network_file] = unparse_network(desc);
  return m;
}

/// Gas station with one operator, two pumps and `customers` customers.
/// Customers prepay the operator for a specific pump, walk over, pump, and
/// collect their change from the operator. The operator tracks each pump
/// (idle, prepaid, busy, charged) and only takes a prepayment for an idle pump.
inline GeneratedModel gen_gas_station(std::uint32_t customers) {
  if (customers < 1 || customers > 12) throw std::invalid_argument("gas station needs 1..12 customers");
  const char* pump_tag[2] = {"1", "2"};

  // Operator: state = 4 * status(pump1) + status(pump2), status in
  // {0 idle, 1 prepaid, 2 busy, 3 charged}.
  detail::AutBuilder op;
  op.states = 16;
  for (std::uint32_t s1 = 0; s1 < 4; ++s1) {
    for (std::uint32_t s2 = 0; s2 < 4; ++s2) {
      const std::uint32_t st[2] = {s1, s2};
      for (int k = 0; k < 2; ++k) {
        std::uint32_t next[2] = {s1, s2};
        next[k] = (st[k] + 1) % 4;
        static const char* step[4] = {"prepay", "activate", "charge", "change"};
        op.edge(4 * s1 + s2, std::string(step[st[k]]) + pump_tag[k], 4 * next[0] + next[1]);
      }
    }
  }

  detail::AutBuilder pump;
  pump.states = 4;
  pump.edge(0, "activate", 1);
  pump.edge(1, "start", 2);
  pump.edge(2, "finish", 3);
  pump.edge(3, "charge", 0);

  // Customer: 0 idle, 1 arriving, 2 at the counter; per pump k the states
  // 3+4k paid, 4+4k at the pump, 5+4k pumping, 6+4k waiting for change.
  detail::AutBuilder cust;
  cust.states = 11;
  cust.edge(0, "idle", 1);
  cust.edge(1, "arrive", 2);
  for (std::uint32_t k = 0; k < 2; ++k) {
    const std::string t = pump_tag[k];
    const std::uint32_t base = 3 + 4 * k;
    cust.edge(2, "prepay" + t, base);
    cust.edge(base, "walk" + t, base + 1);
    cust.edge(base + 1, "start" + t, base + 2);
    cust.edge(base + 2, "finish" + t, base + 3);
    cust.edge(base + 3, "change" + t, 0);
  }

  GeneratedModel m;
  m.name = "gas-station-" + std::to_string(customers);
  m.files["operator.aut"] = op.text();
  m.files["pump.aut"] = pump.text();
  m.files["customer.aut"] = cust.text();

  const std::size_t n = 3 + customers;
  NetworkDescription desc;
  desc.process_files = {"operator.aut", "pump.aut", "pump.aut"};
  for (std::uint32_t c = 0; c < customers; ++c) desc.process_files.push_back("customer.aut");
  for (std::size_t k = 0; k < 2; ++k) {
    const std::string t = pump_tag[k];
    const std::size_t p = 1 + k;
    desc.rules.push_back(detail::make_rule(n, {{0, "activate" + t}, {p, "activate"}}, "activate" + t));
    desc.rules.push_back(detail::make_rule(n, {{p, "charge"}, {0, "charge" + t}}, "charge" + t));
    for (std::size_t c = 3; c < n; ++c) {
      desc.rules.push_back(detail::make_rule(n, {{c, "prepay" + t}, {0, "prepay" + t}}, "prepay" + t));
      desc.rules.push_back(detail::make_rule(n, {{c, "start" + t}, {p, "start"}}, "start" + t));
      desc.rules.push_back(detail::make_rule(n, {{c, "finish" + t}, {p, "finish"}}, "finish" + t));
      desc.rules.push_back(detail::make_rule(n, {{0, "change" + t}, {c, "change" + t}}, "change" + t));
    }
  }
  m.files[m.network_file] = unparse_network(desc);
  return m;
}

/// Dining philosophers who always pick up the left fork first; deadlocks when
/// every philosopher holds a left fork.
inline GeneratedModel dining_philosophers(std::uint32_t count) {
  if (count < 2 || count > 10) throw std::invalid_argument("philosophers needs 2..10 seats");
  detail::AutBuilder phil;
  phil.states = 5;
  phil.edge(0, "take_left", 1);
  phil.edge(1, "take_right", 2);
  phil.edge(2, "eat", 3);
  phil.edge(3, "put_left", 4);
  phil.edge(4, "put_right", 0);
  detail::AutBuilder fork;
  fork.states = 2;
  fork.edge(0, "take", 1);
  fork.edge(1, "put", 0);

  GeneratedModel m;
  m.name = "philosophers-" + std::to_string(count);
  m.files["philosopher.aut"] = phil.text();
  m.files["fork.aut"] = fork.text();
  const std::size_t n = 2 * count;
  NetworkDescription desc;
  for (std::uint32_t i = 0; i < count; ++i) desc.process_files.push_back("philosopher.aut");
  for (std::uint32_t i = 0; i < count; ++i) desc.process_files.push_back("fork.aut");
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t left = count + i;
    const std::size_t right = count + (i + 1) % count;
    desc.rules.push_back(detail::make_rule(n, {{i, "take_left"}, {left, "take"}}, "take"));
    desc.rules.push_back(detail::make_rule(n, {{i, "take_right"}, {right, "take"}}, "take"));
    desc.rules.push_back(detail::make_rule(n, {{i, "put_left"}, {left, "put"}}, "put"));
    desc.rules.push_back(detail::make_rule(n, {{i, "put_right"}, {right, "put"}}, "put"));
  }
  m.files[m.network_file] = unparse_network(desc);
  return m;
}

inline GeneratedModel generate_model(const std::string& kind, std::uint32_t n) {
  if (kind == "gas-station") return gen_gas_station(n);
  if (kind == "token-ring") return gen_token_ring(n);
  if (kind == "philosophers") return dining_philosophers(n);
  throw std::invalid_argument("unknown model kind '" + kind + "'");
}

}  // namespace bmc
