// bmc: command-line front end for exploration, benchmarks and model generation.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bmc/bench.hpp"
#include "bmc/explore.hpp"
#include "bmc/io.hpp"
#include "bmc/models.hpp"
#include "bmc/oracle.hpp"
#include "bmc/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitTableFull = 2;
constexpr int kExitInternal = 3;

struct TableFlags {
  std::uint32_t bucket_size = 32;
  std::uint32_t hash_functions = 8;
  std::uint64_t table_mb = 256;
  std::string layout;
  std::string seed = "default";

  void add_to(CLI::App* app, bool with_bucket = true) {
    if (with_bucket) {
      app->add_option("--bucket-size", bucket_size, "Bucket size in 32-bit words")
          ->check(CLI::IsMember({4, 8, 16, 32}));
    }
    app->add_option("--hash-functions", hash_functions, "Number of hash functions")->check(CLI::Range(1, 64));
    app->add_option("--table-mb", table_mb, "Table budget in MiB (capacity_words = M*2^20/4)")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 20));
    app->add_option("--layout", layout, "Bucket layout")->check(CLI::IsMember({"half", "plain"}));
    app->add_option("--seed", seed, "Hash seed: integer or 'random'");
  }

  std::uint64_t resolve_seed() const {
    if (seed == "default") return bmc::kDefaultSeed;
    if (seed == "random") {
      std::random_device rd;
      return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(seed, &used, 0);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != seed.size() || seed.empty() || seed[0] == '-') {
      throw bmc::InputError("--seed must be a non-negative integer or 'random' (got '" + seed + "')");
    }
    return v;
  }

  bmc::TableConfig config() const {
    bmc::TableConfig t;
    t.bucket_words = bucket_size;
    t.num_hash_functions = hash_functions;
    t.capacity_words = bmc::TableConfig::megabytes(table_mb);
    if (layout == "half") t.layout = bmc::BucketLayout::kHalfBucket;
    if (layout == "plain") t.layout = bmc::BucketLayout::kPlain;
    t.seed = resolve_seed();
    return t;
  }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bmc::InputError("cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// explore

struct ExploreArgs {
  std::string network;
  std::uint32_t workers = 1;
  TableFlags table;
  bool deadlock = false;
  bool json = false;
  bool oracle = false;
  std::string dump_states;
  std::string dump_table;
  std::optional<std::uint64_t> max_iterations;
};

int run_explore(const ExploreArgs& a) {
  bmc::ExploreConfig cfg;
  cfg.workers = a.workers;
  cfg.table = a.table.config();
  cfg.detect_deadlocks = a.deadlock || a.oracle;
  cfg.max_iterations = a.max_iterations;
  const std::string engine = a.oracle ? "oracle" : "parallel";
  if (!a.json) {
    std::cout << "network: " << a.network << '\n';
    bmc::print_config(std::cout, cfg, engine);
    std::cout.flush();
  }

  const bmc::LoadedNetwork loaded = bmc::load_network(a.network);
  for (const auto& w : loaded.network.warnings()) std::cerr << "warning: " << w << '\n';

  bmc::ExplorationReport report;
  if (a.oracle) {
    const auto start = std::chrono::steady_clock::now();
    const bmc::OracleResult r = bmc::sequential_bfs(loaded.network, {!a.dump_states.empty()});
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.states = r.states;
    report.transitions = r.transitions;
    report.deadlock_count = r.deadlocks.size();
    report.deadlocks.assign(r.deadlocks.begin(),
                            r.deadlocks.begin() + std::min(r.deadlocks.size(), bmc::kMaxReportedDeadlocks));
    report.throughput = report.wall_time > 0 ? static_cast<double>(r.states) / report.wall_time : 0.0;
    if (!a.dump_states.empty()) write_file(a.dump_states, r.canonical_dump());
  } else {
    bmc::Explorer explorer(loaded.network, cfg);
    report = explorer.run();
    if (!a.dump_states.empty()) write_file(a.dump_states, bmc::canonical_dump(explorer.table().dump_states()));
    if (!a.dump_table.empty()) {
      std::ofstream out(a.dump_table, std::ios::binary);
      if (!out) throw bmc::InputError("cannot write " + a.dump_table);
      explorer.table().dump_csv(out);
    }
  }

  if (a.json) {
    bmc::Json j;
    j["config"] = bmc::to_json(cfg);
    j["config"]["engine"] = engine;
    j["config"]["network"] = a.network;
    const bmc::Json body = bmc::to_json(report);
    for (const auto& [k, v] : body.items()) j[k] = v;
    std::cout << j.dump(2) << '\n';
  } else {
    bmc::print_report(std::cout, report);
  }
  if (report.outcome == bmc::Outcome::kTableFull) {
    std::cerr << "error: hash table full after " << report.states
              << " states; increase --table-mb or --hash-functions\n";
    return kExitTableFull;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench-hash

struct BenchArgs {
  std::uint64_t total = 1'000'000;
  std::optional<std::uint64_t> dup;
  std::uint32_t vector_len = 1;
  std::uint32_t threads = 1;
  std::optional<std::uint32_t> bucket_size;
  std::uint32_t reps = 5;
  std::string seed = "default";
  std::string csv;
  bool paper_scale = false;
};

int run_bench(const BenchArgs& a) {
  TableFlags seed_flags;
  seed_flags.seed = a.seed;
  bmc::DuplicationSpec spec;
  spec.total = a.paper_scale ? bmc::kLargeScaleTotal : a.total;
  spec.vector_length = a.vector_len;
  spec.seed = seed_flags.resolve_seed();
  const std::vector<std::uint64_t> grid = a.dup ? std::vector<std::uint64_t>{*a.dup} : bmc::default_duplication_grid();
  const std::vector<std::uint32_t> sizes =
      a.bucket_size ? std::vector<std::uint32_t>{*a.bucket_size} : std::vector<std::uint32_t>{4, 8, 16, 32};
  for (auto d : grid) {
    if (d == 0 || d > spec.total) throw bmc::InputError("--dup must be in 1..total");
  }

  std::cout << "config:\n"
            << "  total         " << spec.total << '\n'
            << "  duplication   ";
  for (std::size_t i = 0; i < grid.size(); ++i) std::cout << (i ? "," : "") << grid[i];
  std::cout << "\n  vector_length " << spec.vector_length << '\n'
            << "  threads       " << a.threads << '\n'
            << "  bucket_words  ";
  for (std::size_t i = 0; i < sizes.size(); ++i) std::cout << (i ? "," : "") << sizes[i];
  std::cout << "\n  reps          " << a.reps << '\n'
            << "  seed          " << spec.seed << '\n'
            << "  table         2 slots per vector, 4 if a bucket holds fewer than 4 vectors\n";
  std::cout.flush();

  const auto records = bmc::duplication_sweep(spec, grid, sizes, a.threads, a.reps);
  if (a.csv.empty()) {
    bmc::write_bench_csv(std::cout, records);
  } else {
    std::ofstream out(a.csv, std::ios::binary);
    if (!out) throw bmc::InputError("cannot write " + a.csv);
    bmc::write_bench_csv(out, records);
    std::cout << "wrote " << records.size() << " rows to " << a.csv << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string network;
  std::uint32_t reps = 5;
  std::uint32_t workers = 1;
  TableFlags table;
  std::string csv;
};

int run_sweep(const SweepArgs& a) {
  bmc::ExploreConfig cfg;
  cfg.workers = a.workers;
  cfg.table = a.table.config();
  std::cout << "network: " << a.network << '\n';
  bmc::print_config(std::cout, cfg, "parallel");
  std::cout << "  bucket sizes       4,8,16,32 (layout per size)\n"
            << "  reps               " << a.reps << '\n';
  std::cout.flush();

  const bmc::LoadedNetwork loaded = bmc::load_network(a.network);
  const std::string model = std::filesystem::path(a.network).parent_path().filename().string().empty()
                                ? std::filesystem::path(a.network).stem().string()
                                : std::filesystem::path(a.network).parent_path().filename().string();
  const auto cells = bmc::bucket_size_sweep(loaded.network, model, cfg, {4, 8, 16, 32}, a.reps);
  if (a.csv.empty()) {
    bmc::write_sweep_csv(std::cout, cells);
  } else {
    std::ofstream out(a.csv, std::ios::binary);
    if (!out) throw bmc::InputError("cannot write " + a.csv);
    bmc::write_sweep_csv(out, cells);
    std::cout << "wrote " << cells.size() << " rows to " << a.csv << '\n';
  }
  std::cout << "states: " << cells.front().states << ", transitions: " << cells.front().transitions << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gen-model

struct GenArgs {
  std::string kind;
  std::uint32_t n = 0;
  std::string out;
};

int run_gen(const GenArgs& a) {
  std::cout << "config:\n  model " << a.kind << "\n  n     " << a.n << "\n  out   " << a.out << '\n';
  bmc::GeneratedModel m;
  try {
    m = bmc::generate_model(a.kind, a.n);
  } catch (const std::invalid_argument& e) {
    throw bmc::InputError(e.what());
  }
  m.write_to(a.out);
  std::cout << "wrote " << m.files.size() << " files; network: "
            << (std::filesystem::path(a.out) / m.network_file).string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bmc: parallel explicit-state reachability for networks of LTSs"};
  app.require_subcommand(1);

  ExploreArgs ex;
  auto* explore = app.add_subcommand("explore", "Explore the state space of a network");
  explore->add_option("network", ex.network, "Network file")->required();
  explore->add_option("--workers", ex.workers, "Worker threads")->check(CLI::Range(1, 1024));
  ex.table.add_to(explore);
  explore->add_flag("--deadlock", ex.deadlock, "Report deadlock states");
  explore->add_flag("--json", ex.json, "Print the report as JSON");
  explore->add_option("--dump-states", ex.dump_states, "Write the sorted state set (hex words) to PATH");
  explore->add_option("--dump-table", ex.dump_table, "Write the raw table as CSV to PATH");
  explore->add_flag("--oracle", ex.oracle, "Use the sequential reference search");
  explore->add_option("--max-iterations", ex.max_iterations, "Stop after this many rounds");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench-hash", "Insert duplication sequences into a fresh table");
  bench->add_option("--total", be.total, "Sequence length")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 34));
  bench->add_option("--dup", be.dup, "Duplication factor (default: 1,10,...,100)");
  bench->add_option("--vector-len", be.vector_len, "Words per vector")->check(CLI::Range(1, 16));
  bench->add_option("--threads", be.threads, "Inserting threads")->check(CLI::Range(1, 1024));
  bench->add_option("--bucket-size", be.bucket_size, "Bucket size (default: 4,8,16,32)")
      ->check(CLI::IsMember({4, 8, 16, 32}));
  bench->add_option("--reps", be.reps, "Repetitions per cell (median reported)")->check(CLI::Range(1, 1000));
  bench->add_option("--seed", be.seed, "Sequence and hash seed: integer or 'random'");
  bench->add_option("--csv", be.csv, "Write CSV to PATH instead of stdout");
  bench->add_flag("--paper-scale", be.paper_scale, "Use 10^8 elements");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Explore once per bucket size and compare runtimes");
  sweep->add_option("network", sw.network, "Network file")->required();
  sweep->add_option("--reps", sw.reps, "Repetitions per bucket size")->check(CLI::Range(1, 1000));
  sweep->add_option("--workers", sw.workers, "Worker threads")->check(CLI::Range(1, 1024));
  sw.table.add_to(sweep, false);
  sweep->add_option("--csv", sw.csv, "Write CSV to PATH instead of stdout");

  GenArgs ge;
  auto* gen = app.add_subcommand("gen-model", "Write a generated benchmark model");
  gen->add_option("kind", ge.kind, "Model family")
      ->required()
      ->check(CLI::IsMember({"gas-station", "token-ring", "philosophers"}));
  gen->add_option("--n", ge.n, "Instance size")->required();
  gen->add_option("--out", ge.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitInput;
  }

  try {
    if (*explore) return run_explore(ex);
    if (*bench) return run_bench(be);
    if (*sweep) return run_sweep(sw);
    if (*gen) return run_gen(ge);
  } catch (const bmc::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const bmc::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const bmc::NetworkError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory; reduce --table-mb\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
