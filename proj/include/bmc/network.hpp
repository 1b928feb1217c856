#pragma once

// Synchronous product of a network of LTSs.
//
// A process label that appears in any synchronization rule column of that
// process is never executed on its own; every other label interleaves freely.
// Successor identity for counting purposes is (mover, action, target), where
// the mover is the process index for an independent step and the rule set
// for a synchronized step. Two processes taking independent steps that happen
// to coincide in the product (e.g. two self-loops with the same label) are
// therefore two transitions, while two rules yielding the same result action
// and target collapse into one.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bmc/aut.hpp"

namespace bmc {

using ActionId = std::uint32_t;
using LocalState = std::uint32_t;
using CompositeState = std::vector<LocalState>;

struct SyncRule {
  /// Per process: the label that must be taken, or nullopt for `_`.
  std::vector<std::optional<LabelId>> participants;
  ActionId result = 0;
  /// False when a named action does not exist in its process.
  bool fireable = true;
  /// Source names, kept for diagnostics.
  std::vector<std::optional<std::string>> names;
};

struct Successor {
  ActionId action = 0;
  CompositeState target;

  friend bool operator==(const Successor&, const Successor&) = default;
};

/// Flat successor storage reused across calls to avoid per-state allocation.
class SuccessorBuffer {
 public:
  void reset(std::size_t width) {
    width_ = width;
    actions_.clear();
    locals_.clear();
  }
  std::size_t size() const noexcept { return actions_.size(); }
  bool empty() const noexcept { return actions_.empty(); }
  ActionId action(std::size_t i) const { return actions_[i]; }
  std::span<const LocalState> target(std::size_t i) const {
    return {locals_.data() + i * width_, width_};
  }
  void push(ActionId a, std::span<const LocalState> t) {
    actions_.push_back(a);
    locals_.insert(locals_.end(), t.begin(), t.end());
  }
  bool contains(std::size_t from, ActionId a, std::span<const LocalState> t) const {
    for (std::size_t i = from; i < size(); ++i) {
      if (actions_[i] != a) continue;
      const LocalState* x = locals_.data() + i * width_;
      std::size_t k = 0;
      while (k < width_ && x[k] == t[k]) ++k;
      if (k == width_) return true;
    }
    return false;
  }

 private:
  std::size_t width_ = 0;
  std::vector<ActionId> actions_;
  std::vector<LocalState> locals_;
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Network {
 public:
  /// Builds the product semantics. `ltss[i]` is the automaton of
  /// `desc.process_files[i]`.
  static Network build(const NetworkDescription& desc, std::vector<Lts> ltss) {
    if (ltss.size() != desc.process_files.size()) {
      throw NetworkError("network lists " + std::to_string(desc.process_files.size()) +
                         " processes but " + std::to_string(ltss.size()) + " automata were given");
    }
    if (ltss.empty()) throw NetworkError("network has no processes");
    Network net;
    net.processes_ = std::move(ltss);
    const std::size_t n = net.processes_.size();

    std::unordered_map<std::string, ActionId> action_ids;
    auto intern = [&](const std::string& name) {
      auto [it, fresh] = action_ids.try_emplace(name, static_cast<ActionId>(net.actions_.size()));
      if (fresh) net.actions_.push_back(name);
      return it->second;
    };

    // Which labels of each process are governed by rules.
    std::vector<std::vector<bool>> synced(n);
    for (std::size_t i = 0; i < n; ++i) synced[i].assign(net.processes_[i].labels.size(), false);

    for (std::size_t r = 0; r < desc.rules.size(); ++r) {
      const RuleSpec& spec = desc.rules[r];
      if (spec.items.size() != n) {
        throw NetworkError("rule " + std::to_string(r + 1) + " has arity " +
                           std::to_string(spec.items.size()) + " but the network has " +
                           std::to_string(n) + " processes");
      }
      SyncRule rule;
      rule.names = spec.items;
      rule.participants.resize(n);
      std::size_t present = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!spec.items[i]) continue;
        ++present;
        const std::string& name = *spec.items[i];
        if (is_internal_action(name)) {
          throw NetworkError("rule " + std::to_string(r + 1) + ", process " + std::to_string(i) +
                             ": the internal action cannot synchronize");
        }
        if (auto id = net.processes_[i].find_label(name)) {
          rule.participants[i] = *id;
          synced[i][*id] = true;
        } else {
          rule.fireable = false;
          net.warnings_.push_back("rule " + std::to_string(r + 1) + ": action '" + name +
                                  "' does not occur in process " + std::to_string(i) +
                                  "; the rule can never fire");
        }
      }
      if (present == 0) {
        throw NetworkError("rule " + std::to_string(r + 1) + " has no participants");
      }
      if (present == 1) {
        net.warnings_.push_back("rule " + std::to_string(r + 1) +
                                " has a single participant and acts as a renaming");
      }
      rule.result = intern(spec.result);
      net.rules_.push_back(std::move(rule));
    }

    net.tables_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Lts& lts = net.processes_[i];
      ProcessTable& tab = net.tables_[i];
      tab.independent.resize(lts.labels.size());
      tab.label_action.assign(lts.labels.size(), 0);
      for (LabelId l = 0; l < lts.labels.size(); ++l) {
        tab.independent[l] = !synced[i][l];
        if (tab.independent[l]) tab.label_action[l] = intern(lts.labels[l]);
      }
      // Independent moves grouped by source, file order, exact duplicates dropped.
      tab.out_begin.assign(lts.num_states + 1, 0);
      for (const auto& t : lts.transitions) ++tab.out_begin[t.src + 1];
      for (std::size_t s = 0; s < lts.num_states; ++s) tab.out_begin[s + 1] += tab.out_begin[s];
      std::vector<Edge> grouped(lts.transitions.size());
      std::vector<std::uint32_t> fill(tab.out_begin.begin(), tab.out_begin.end() - 1);
      for (const auto& t : lts.transitions) grouped[fill[t.src]++] = {t.label, t.dst};
      tab.out.reserve(grouped.size());
      for (std::size_t s = 0; s < lts.num_states; ++s) {
        const auto kept = static_cast<std::uint32_t>(tab.out.size());
        for (std::uint32_t e = tab.out_begin[s]; e < tab.out_begin[s + 1]; ++e) {
          bool dup = std::any_of(tab.out.begin() + kept, tab.out.end(), [&](const Edge& x) {
            return x.label == grouped[e].label && x.dst == grouped[e].dst;
          });
          if (!dup) tab.out.push_back(grouped[e]);
        }
        tab.out_begin[s] = kept;
      }
      tab.out_begin[lts.num_states] = static_cast<std::uint32_t>(tab.out.size());
      // Sorted copy for label lookup during rule firing.
      tab.by_label = tab.out;
      for (std::size_t s = 0; s < lts.num_states; ++s) {
        auto first = tab.by_label.begin() + tab.out_begin[s];
        auto last = tab.by_label.begin() + tab.out_begin[s + 1];
        std::sort(first, last, [](const Edge& a, const Edge& b) {
          return a.label != b.label ? a.label < b.label : a.dst < b.dst;
        });
      }
      // Independent moves only, already mapped to network actions.
      tab.indep_begin.assign(lts.num_states + 1, 0);
      for (std::size_t s = 0; s < lts.num_states; ++s) {
        for (std::uint32_t e = tab.out_begin[s]; e < tab.out_begin[s + 1]; ++e) {
          const Edge& edge = tab.out[e];
          if (tab.independent[edge.label]) tab.indep.push_back({tab.label_action[edge.label], edge.dst});
        }
        tab.indep_begin[s + 1] = static_cast<std::uint32_t>(tab.indep.size());
      }
    }

    std::vector<bool> result_seen(net.actions_.size(), false);
    for (const SyncRule& rule : net.rules_) {
      if (!rule.fireable) continue;
      RulePlan plan;
      plan.result = rule.result;
      plan.shared_result = result_seen[rule.result];
      result_seen[rule.result] = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (rule.participants[i]) plan.parts.push_back({static_cast<std::uint32_t>(i), *rule.participants[i]});
      }
      net.plans_.push_back(std::move(plan));
    }

    // Index each rule under the participant whose label is enabled in the
    // smallest fraction of its process's states; a rule is only examined in
    // states where that participant can move.
    auto enabling_fraction = [&](std::uint32_t i, LabelId l) {
      const ProcessTable& tab = net.tables_[i];
      const auto states = static_cast<double>(net.processes_[i].num_states);
      std::uint64_t count = 0;
      for (std::size_t st = 0; st + 1 < tab.out_begin.size(); ++st) {
        for (std::uint32_t e = tab.out_begin[st]; e < tab.out_begin[st + 1]; ++e) {
          if (tab.by_label[e].label == l) {
            ++count;
            break;
          }
        }
      }
      return static_cast<double>(count) / states;
    };
    std::vector<std::vector<std::vector<std::uint32_t>>> by_state(n);
    for (std::size_t i = 0; i < n; ++i) by_state[i].resize(net.processes_[i].num_states);
    for (std::uint32_t r = 0; r < net.plans_.size(); ++r) {
      const auto& parts = net.plans_[r].parts;
      auto best = parts.front();
      double best_fraction = enabling_fraction(best.first, best.second);
      for (const auto& part : parts) {
        const double f = enabling_fraction(part.first, part.second);
        if (f < best_fraction) {
          best = part;
          best_fraction = f;
        }
      }
      const ProcessTable& tab = net.tables_[best.first];
      for (std::size_t st = 0; st < by_state[best.first].size(); ++st) {
        for (std::uint32_t e = tab.out_begin[st]; e < tab.out_begin[st + 1]; ++e) {
          if (tab.by_label[e].label == best.second) {
            by_state[best.first][st].push_back(r);
            break;
          }
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      ProcessTable& tab = net.tables_[i];
      tab.trigger_begin.assign(by_state[i].size() + 1, 0);
      for (std::size_t st = 0; st < by_state[i].size(); ++st) {
        tab.triggers.insert(tab.triggers.end(), by_state[i][st].begin(), by_state[i][st].end());
        tab.trigger_begin[st + 1] = static_cast<std::uint32_t>(tab.triggers.size());
      }
    }
    return net;
  }

  std::size_t size() const noexcept { return processes_.size(); }
  const Lts& process(std::size_t i) const { return processes_[i]; }
  const std::vector<Lts>& processes() const noexcept { return processes_; }
  const std::vector<SyncRule>& rules() const noexcept { return rules_; }
  const std::vector<std::string>& actions() const noexcept { return actions_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  bool is_independent(std::size_t process, LabelId label) const {
    return tables_[process].independent[label];
  }
  /// Independent label ids of a process, ascending.
  std::vector<LabelId> independent_labels(std::size_t process) const {
    std::vector<LabelId> out;
    for (LabelId l = 0; l < tables_[process].independent.size(); ++l) {
      if (tables_[process].independent[l]) out.push_back(l);
    }
    return out;
  }
  /// Network-level action id of an independent label.
  ActionId action_of(std::size_t process, LabelId label) const {
    return tables_[process].label_action[label];
  }
  std::optional<ActionId> find_action(std::string_view name) const {
    if (is_internal_action(name)) name = kInternalAction;
    for (ActionId a = 0; a < actions_.size(); ++a) {
      if (actions_[a] == name) return a;
    }
    return std::nullopt;
  }

  CompositeState initial_state() const {
    CompositeState s(size());
    for (std::size_t i = 0; i < size(); ++i) s[i] = processes_[i].initial;
    return s;
  }

  bool is_valid(std::span<const LocalState> s) const {
    if (s.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (s[i] >= processes_[i].num_states) return false;
    }
    return true;
  }

  /// Appends all successors of `s` to `out` (which is reset first). Order:
  /// independent moves process by process in file order, then rules in rule
  /// order.
  void successors(std::span<const LocalState> s, SuccessorBuffer& out) const {
    const std::size_t n = size();
    out.reset(n);
    auto& target = scratch_target();
    target.assign(s.begin(), s.end());

    for (std::size_t i = 0; i < n; ++i) {
      const ProcessTable& tab = tables_[i];
      for (std::uint32_t e = tab.indep_begin[s[i]]; e < tab.indep_begin[s[i] + 1]; ++e) {
        target[i] = tab.indep[e].dst;
        out.push(tab.indep[e].action, target);
      }
      target[i] = s[i];
    }

    // Candidate rules in rule order.
    auto& candidates = scratch_candidates();
    candidates.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const ProcessTable& tab = tables_[i];
      candidates.insert(candidates.end(), tab.triggers.begin() + tab.trigger_begin[s[i]],
                        tab.triggers.begin() + tab.trigger_begin[s[i] + 1]);
    }
    std::sort(candidates.begin(), candidates.end());

    const std::size_t first_rule_move = out.size();
    auto& ranges = scratch_ranges();
    for (std::uint32_t rule_index : candidates) {
      const RulePlan& rule = plans_[rule_index];
      ranges.clear();
      bool enabled = true;
      for (const auto& [i, want] : rule.parts) {
        const ProcessTable& tab = tables_[i];
        const Edge* first = tab.by_label.data() + tab.out_begin[s[i]];
        const Edge* last = tab.by_label.data() + tab.out_begin[s[i] + 1];
        const Edge* lo = first;
        while (lo != last && lo->label < want) ++lo;
        const Edge* hi = lo;
        while (hi != last && hi->label == want) ++hi;
        if (lo == hi) {
          enabled = false;
          break;
        }
        ranges.push_back({i, static_cast<std::uint32_t>(lo - tab.by_label.data()),
                          static_cast<std::uint32_t>(hi - tab.by_label.data()), 0});
      }
      if (!enabled) continue;
      for (auto& r : ranges) r.cursor = r.first;
      // Odometer over the participants' candidate edges. Distinct
      // combinations give distinct targets because duplicate edges were
      // dropped at build time, so only rules sharing a result action with an
      // earlier rule need the duplicate check.
      while (true) {
        for (const auto& r : ranges) target[r.process] = tables_[r.process].by_label[r.cursor].dst;
        if (!rule.shared_result || !out.contains(first_rule_move, rule.result, target)) {
          out.push(rule.result, target);
        }
        std::size_t k = ranges.size();
        while (k > 0) {
          auto& r = ranges[k - 1];
          if (++r.cursor < r.last) break;
          r.cursor = r.first;
          --k;
        }
        if (k == 0) break;
      }
      for (const auto& r : ranges) target[r.process] = s[r.process];
    }
  }


  std::vector<Successor> successors(const CompositeState& s) const {
    SuccessorBuffer buf;
    successors(s, buf);
    std::vector<Successor> out;
    out.reserve(buf.size());
    for (std::size_t k = 0; k < buf.size(); ++k) {
      auto t = buf.target(k);
      out.push_back({buf.action(k), CompositeState(t.begin(), t.end())});
    }
    return out;
  }

  bool is_deadlock(std::span<const LocalState> s) const {
    SuccessorBuffer buf;
    successors(s, buf);
    return buf.empty();
  }

 private:
  struct Edge {
    LabelId label;
    StateIndex dst;
  };
  struct IndepEdge {
    ActionId action;
    StateIndex dst;
  };
  struct ProcessTable {
    std::vector<bool> independent;
    std::vector<ActionId> label_action;
    std::vector<std::uint32_t> out_begin;
    std::vector<Edge> out;
    std::vector<Edge> by_label;
    std::vector<std::uint32_t> indep_begin;
    std::vector<IndepEdge> indep;
    std::vector<std::uint32_t> trigger_begin;
    std::vector<std::uint32_t> triggers;
  };
  struct RulePlan {
    std::vector<std::pair<std::uint32_t, LabelId>> parts;
    ActionId result = 0;
    bool shared_result = false;
  };
  struct EdgeRange {
    std::size_t process;
    std::uint32_t first;
    std::uint32_t last;
    std::uint32_t cursor;
  };

  // Per-thread scratch keeps successors() reentrant without allocating.
  static std::vector<LocalState>& scratch_target() {
    thread_local std::vector<LocalState> v;
    return v;
  }
  static std::vector<std::uint32_t>& scratch_candidates() {
    thread_local std::vector<std::uint32_t> v;
    return v;
  }
  static std::vector<EdgeRange>& scratch_ranges() {
    thread_local std::vector<EdgeRange> v;
    return v;
  }

  std::vector<Lts> processes_;
  std::vector<SyncRule> rules_;
  std::vector<RulePlan> plans_;
  std::vector<std::string> actions_;
  std::vector<std::string> warnings_;
  std::vector<ProcessTable> tables_;
};

}  // namespace bmc
