#pragma once

// Parsers for Aldebaran `.aut` automata and the `par using ... end par`
// network description subset.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bmc {

using StateIndex = std::uint32_t;
using LabelId = std::uint32_t;

inline constexpr std::uint32_t kMaxProcessStates = 1u << 20;
inline constexpr std::uint32_t kMaxLabels = 1u << 16;

/// Canonical spelling of the internal (silent) action.
inline constexpr std::string_view kInternalAction = "i";

inline bool is_internal_action(std::string_view name) {
  return name == "i" || name == "tau";
}

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error(format(line, column, what)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(std::size_t line, std::size_t column, const std::string& what) {
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

struct Transition {
  StateIndex src = 0;
  LabelId label = 0;
  StateIndex dst = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// One process automaton. Label ids index `labels`; ids are assigned in order
/// of first appearance in the source file.
struct Lts {
  std::uint32_t num_states = 0;
  StateIndex initial = 0;
  std::vector<std::string> labels;
  std::vector<Transition> transitions;

  std::optional<LabelId> find_label(std::string_view name) const {
    if (is_internal_action(name)) name = kInternalAction;
    for (LabelId id = 0; id < labels.size(); ++id) {
      if (labels[id] == name) return id;
    }
    return std::nullopt;
  }

  friend bool operator==(const Lts&, const Lts&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

class LineCursor {
 public:
  LineCursor(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  void skip_ws() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= line_.size();
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < line_.size() && line_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void expect_word(std::string_view w) {
    skip_ws();
    if (line_.substr(pos_, w.size()) != w) fail("expected '" + std::string(w) + "'");
    pos_ += w.size();
  }
  std::uint64_t number() {
    skip_ws();
    std::uint64_t value = 0;
    const char* first = line_.data() + pos_;
    const char* last = line_.data() + line_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) fail("expected a non-negative integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }
  // Quoted labels run to the closing quote that is followed by a comma;
  // unquoted labels run to the next comma and may not contain whitespace.
  std::string label() {
    skip_ws();
    if (pos_ < line_.size() && line_[pos_] == '"') {
      std::size_t start = pos_ + 1;
      for (std::size_t q = start; q < line_.size(); ++q) {
        if (line_[q] != '"') continue;
        std::size_t after = q + 1;
        while (after < line_.size() && std::isspace(static_cast<unsigned char>(line_[after]))) ++after;
        if (after < line_.size() && line_[after] == ',') {
          pos_ = q + 1;
          return std::string(line_.substr(start, q - start));
        }
      }
      fail("unterminated quoted label");
    }
    std::size_t start = pos_;
    while (pos_ < line_.size() && line_[pos_] != ',') {
      if (std::isspace(static_cast<unsigned char>(line_[pos_]))) break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a label");
    return std::string(line_.substr(start, pos_ - start));
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line_no_, pos_ + 1, what);
  }

 private:
  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an Aldebaran `.aut` file. Both "i" and "tau" denote the internal
/// action and are stored as "i".
inline Lts parse_aut(std::string_view text) {
  auto lines = detail::split_lines(text);
  std::size_t idx = 0;
  while (idx < lines.size() && detail::LineCursor(lines[idx], idx + 1).at_end()) ++idx;
  if (idx == lines.size()) throw ParseError(1, 0, "missing 'des' header");

  Lts lts;
  std::uint64_t ntrans = 0;
  {
    detail::LineCursor cur(lines[idx], idx + 1);
    cur.expect_word("des");
    cur.expect('(');
    std::uint64_t initial = cur.number();
    cur.expect(',');
    ntrans = cur.number();
    cur.expect(',');
    std::uint64_t nstates = cur.number();
    cur.expect(')');
    if (!cur.at_end()) cur.fail("trailing characters after header");
    if (nstates == 0) cur.fail("automaton must have at least one state");
    if (nstates > kMaxProcessStates) {
      cur.fail("too many states: " + std::to_string(nstates) + " (limit " +
               std::to_string(kMaxProcessStates) + ")");
    }
    if (initial >= nstates) {
      cur.fail("initial state " + std::to_string(initial) + " out of range (nstates " +
               std::to_string(nstates) + ")");
    }
    lts.num_states = static_cast<std::uint32_t>(nstates);
    lts.initial = static_cast<StateIndex>(initial);
  }

  std::unordered_map<std::string, LabelId> label_ids;
  lts.transitions.reserve(ntrans);
  for (++idx; idx < lines.size(); ++idx) {
    detail::LineCursor cur(lines[idx], idx + 1);
    if (cur.at_end()) continue;
    cur.expect('(');
    std::uint64_t src = cur.number();
    cur.expect(',');
    std::string label = cur.label();
    cur.expect(',');
    std::uint64_t dst = cur.number();
    cur.expect(')');
    if (!cur.at_end()) cur.fail("trailing characters after transition");
    for (std::uint64_t s : {src, dst}) {
      if (s >= lts.num_states) {
        throw ParseError(idx + 1, 0, "state index " + std::to_string(s) +
                                         " out of range (nstates " +
                                         std::to_string(lts.num_states) + ")");
      }
    }
    if (is_internal_action(label)) label = kInternalAction;
    auto [it, fresh] = label_ids.try_emplace(label, static_cast<LabelId>(lts.labels.size()));
    if (fresh) {
      if (lts.labels.size() >= kMaxLabels) {
        throw ParseError(idx + 1, 0, "too many distinct labels (limit " +
                                         std::to_string(kMaxLabels) + ")");
      }
      lts.labels.push_back(label);
    }
    lts.transitions.push_back(
        {static_cast<StateIndex>(src), it->second, static_cast<StateIndex>(dst)});
  }
  if (lts.transitions.size() != ntrans) {
    throw ParseError(lines.size(), 0,
                     "transition count mismatch: header says " + std::to_string(ntrans) +
                         ", found " + std::to_string(lts.transitions.size()));
  }
  return lts;
}

inline std::string unparse_aut(const Lts& lts) {
  std::ostringstream out;
  out << "des (" << lts.initial << ", " << lts.transitions.size() << ", " << lts.num_states
      << ")\n";
  for (const auto& t : lts.transitions) {
    out << '(' << t.src << ", \"" << lts.labels[t.label] << "\", " << t.dst << ")\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Network description: `par using r1, r2 in "a.aut" || "b.aut" end par`

struct RuleSpec {
  /// One item per process; std::nullopt is `_` (no participation).
  std::vector<std::optional<std::string>> items;
  std::string result;
  std::size_t line = 0;

  friend bool operator==(const RuleSpec&, const RuleSpec&) = default;
};

struct NetworkDescription {
  std::vector<std::string> process_files;
  std::vector<RuleSpec> rules;

  friend bool operator==(const NetworkDescription&, const NetworkDescription&) = default;
};

namespace detail {

struct Token {
  enum class Kind { kIdent, kString, kStar, kArrow, kComma, kPar, kEnd };
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline std::vector<Token> tokenize_network(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    std::size_t tl = line, tc = col;
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      tokens.push_back({Token::Kind::kArrow, "->", tl, tc});
      advance(2);
    } else if (c == '|' && i + 1 < text.size() && text[i + 1] == '|') {
      tokens.push_back({Token::Kind::kPar, "||", tl, tc});
      advance(2);
    } else if (c == '*') {
      tokens.push_back({Token::Kind::kStar, "*", tl, tc});
      advance(1);
    } else if (c == ',') {
      tokens.push_back({Token::Kind::kComma, ",", tl, tc});
      advance(1);
    } else if (c == '"') {
      std::size_t close = text.find('"', i + 1);
      if (close == std::string_view::npos || text.substr(i, close - i).find('\n') != std::string_view::npos) {
        throw ParseError(tl, tc, "unterminated string");
      }
      tokens.push_back({Token::Kind::kString, std::string(text.substr(i + 1, close - i - 1)), tl, tc});
      advance(close - i + 1);
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '/') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
              text[j] == '.' || text[j] == '/')) {
        ++j;
      }
      tokens.push_back({Token::Kind::kIdent, std::string(text.substr(i, j - i)), tl, tc});
      advance(j - i);
    } else {
      throw ParseError(tl, tc, std::string("unexpected character '") + c + "'");
    }
  }
  tokens.push_back({Token::Kind::kEnd, "", line, col});
  return tokens;
}

class NetworkParser {
 public:
  explicit NetworkParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  NetworkDescription parse() {
    NetworkDescription desc;
    keyword("par");
    keyword("using");
    if (!is_keyword("in")) {
      desc.rules.push_back(rule());
      while (cur().kind == Token::Kind::kComma) {
        ++pos_;
        desc.rules.push_back(rule());
      }
    }
    keyword("in");
    desc.process_files.push_back(file());
    while (cur().kind == Token::Kind::kPar) {
      ++pos_;
      desc.process_files.push_back(file());
    }
    keyword("end");
    keyword("par");
    if (cur().kind != Token::Kind::kEnd) fail("unexpected trailing input");

    for (const auto& r : desc.rules) {
      if (r.items.size() != desc.process_files.size()) {
        throw ParseError(r.line, 0,
                         "rule arity " + std::to_string(r.items.size()) + " ≠ " +
                             std::to_string(desc.process_files.size()) + " processes");
      }
    }
    return desc;
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }
  bool is_keyword(std::string_view w) const {
    return cur().kind == Token::Kind::kIdent && cur().text == w;
  }
  void keyword(std::string_view w) {
    if (!is_keyword(w)) fail("expected '" + std::string(w) + "'");
    ++pos_;
  }
  std::string action() {
    if (cur().kind != Token::Kind::kIdent && cur().kind != Token::Kind::kString) {
      fail("expected an action name");
    }
    return tokens_[pos_++].text;
  }
  RuleSpec rule() {
    RuleSpec r;
    r.line = cur().line;
    auto item = [&]() -> std::optional<std::string> {
      if (cur().kind == Token::Kind::kIdent && cur().text == "_") {
        ++pos_;
        return std::nullopt;
      }
      std::string name = action();
      if (is_internal_action(name)) name = kInternalAction;
      return name;
    };
    r.items.push_back(item());
    while (cur().kind == Token::Kind::kStar) {
      ++pos_;
      r.items.push_back(item());
    }
    if (cur().kind != Token::Kind::kArrow) fail("expected '->'");
    ++pos_;
    r.result = action();
    return r;
  }
  std::string file() {
    if (cur().kind != Token::Kind::kString && cur().kind != Token::Kind::kIdent) {
      fail("expected a process file name");
    }
    return tokens_[pos_++].text;
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = cur();
    std::string near = t.kind == Token::Kind::kEnd ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.line, t.column, what + " near " + near);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a network description. Comments run from `--` to end of line.
inline NetworkDescription parse_network(std::string_view text) {
  return detail::NetworkParser(detail::tokenize_network(text)).parse();
}

inline std::string unparse_network(const NetworkDescription& desc) {
  std::ostringstream out;
  out << "par using\n";
  for (std::size_t r = 0; r < desc.rules.size(); ++r) {
    out << "    ";
    const auto& rule = desc.rules[r];
    for (std::size_t i = 0; i < rule.items.size(); ++i) {
      if (i) out << " * ";
      out << (rule.items[i] ? *rule.items[i] : std::string("_"));
    }
    out << " -> " << rule.result << (r + 1 < desc.rules.size() ? ",\n" : "\n");
  }
  out << "in\n";
  for (std::size_t i = 0; i < desc.process_files.size(); ++i) {
    out << (i ? "    ||\n" : "") << "    \"" << desc.process_files[i] << "\"\n";
  }
  out << "end par\n";
  return out.str();
}

}  // namespace bmc
