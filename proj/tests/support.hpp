#pragma once

#include <map>
#include <string>

#include "bmc/models.hpp"
#include "bmc/network.hpp"

namespace bmc::test {

// Builds a network from in-memory files; `net` is the network text.
inline Network network_from(std::map<std::string, std::string> files, std::string net) {
  GeneratedModel m;
  m.files = std::move(files);
  m.files[m.network_file] = std::move(net);
  return m.build();
}

inline Network producer_consumer_network() { return producer_consumer().build(); }

inline ActionId action(const Network& net, std::string_view name) {
  auto a = net.find_action(name);
  if (!a) throw std::runtime_error("no action " + std::string(name));
  return *a;
}

}  // namespace bmc::test
