#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmc/aut.hpp"
#include "bmc/network.hpp"

namespace bmc {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LoadedNetwork {
  NetworkDescription description;
  Network network;
};

/// Reads a network file and the automata it names. Process paths are
/// resolved relative to the network file; each distinct file is parsed once.
inline LoadedNetwork load_network(const std::filesystem::path& network_path) {
  const std::string text = read_text_file(network_path);
  NetworkDescription desc;
  try {
    desc = parse_network(text);
  } catch (const ParseError& e) {
    throw InputError(network_path.string() + ": " + e.what());
  }
  const auto base = network_path.parent_path();
  std::map<std::string, Lts> parsed;
  std::vector<Lts> ltss;
  for (const auto& file : desc.process_files) {
    auto it = parsed.find(file);
    if (it == parsed.end()) {
      const auto path = base / file;
      try {
        it = parsed.emplace(file, parse_aut(read_text_file(path))).first;
      } catch (const ParseError& e) {
        throw InputError(path.string() + ": " + e.what());
      }
    }
    ltss.push_back(it->second);
  }
  try {
    Network net = Network::build(desc, std::move(ltss));
    return {std::move(desc), std::move(net)};
  } catch (const NetworkError& e) {
    throw InputError(network_path.string() + ": " + e.what());
  }
}

}  // namespace bmc
