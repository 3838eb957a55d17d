#include "rbench/suite.hpp"

#include "rbench/error.hpp"
#include "rbench/workloads.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

namespace rbench {

namespace {

using Value = std::variant<std::string, std::int64_t, std::vector<std::string>>;

class LineParser {
public:
  LineParser(std::string_view text, int line) : text_(text), line_(line) {}

  [[noreturn]] void fail(std::string_view what) const {
    throw ParseError(fmt::format("suite line {}: {}", line_, what));
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  std::string key() {
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                   text_[pos_] == '-' || text_[pos_] == '.')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string string_literal() {
    expect('"');
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("dangling escape");
        c = text_[pos_++];
        if (c != '"' && c != '\\') fail(fmt::format("unsupported escape \\{}", c));
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Value value() {
    skip_space();
    if (pos_ >= text_.size()) fail("missing value");
    if (text_[pos_] == '"') return string_literal();
    if (text_[pos_] == '[') {
      ++pos_;
      std::vector<std::string> items;
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return items;
      }
      while (true) {
        items.push_back(string_literal());
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        expect(']');
        return items;
      }
    }
    std::int64_t number = 0;
    const auto* begin = text_.data() + pos_;
    const auto* end = text_.data() + text_.size();
    const auto [ptr, ec] = std::from_chars(begin, end, number);
    if (ec != std::errc{} || ptr == begin) fail("expected a string, integer or string array");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return number;
  }

private:
  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

struct Pending {
  BenchmarkDefinition def;
  bool has_kind = false;
  int line = 0;
};

void finish(const Pending& pending, std::vector<BenchmarkDefinition>& out) {
  auto def = pending.def;
  const auto where = fmt::format("benchmark \"{}\" (line {})", def.id, pending.line);
  if (!pending.has_kind) throw ParseError(fmt::format("{} has no kind", where));
  if (def.kind == BenchmarkKind::builtin) {
    if (def.builtin_name.empty()) throw ParseError(fmt::format("{} has no builtin name", where));
    const auto catalog = builtin_catalog();
    const auto info = std::find_if(catalog.begin(), catalog.end(),
                                   [&](const BuiltinInfo& b) { return b.name == def.builtin_name; });
    if (info == catalog.end()) throw ConfigError(fmt::format("{} names unknown builtin \"{}\"", where, def.builtin_name));
    if (def.size == 0) def.size = info->default_size;
    if (def.size < 1) throw ConfigError(fmt::format("{} has size < 1", where));
  } else if (def.argv.empty()) {
    throw ParseError(fmt::format("{} has no argv", where));
  }
  out.push_back(std::move(def));
}

}  // namespace

std::vector<BenchmarkDefinition> parse_suite(std::string_view text) {
  std::vector<BenchmarkDefinition> suite;
  std::optional<Pending> pending;
  std::set<std::string> ids;

  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    LineParser parser(line, line_no);
    if (parser.at_end()) continue;

    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '[') {
      parser.expect('[');
      const auto header = parser.key();
      parser.expect(']');
      if (!parser.at_end()) parser.fail("trailing characters after table header");
      constexpr std::string_view prefix = "benchmark.";
      if (header.rfind(prefix, 0) != 0 || header.size() == prefix.size()) {
        parser.fail(fmt::format("table header must be [benchmark.<id>], got [{}]", header));
      }
      if (pending) finish(*pending, suite);
      auto id = header.substr(prefix.size());
      if (!ids.insert(id).second) parser.fail(fmt::format("duplicate benchmark id \"{}\"", id));
      pending = Pending{};
      pending->def.id = std::move(id);
      pending->line = line_no;
      continue;
    }

    const auto key = parser.key();
    parser.expect('=');
    const auto value = parser.value();
    if (!parser.at_end()) parser.fail("trailing characters after value");
    if (!pending) parser.fail(fmt::format("key \"{}\" outside a [benchmark.<id>] table", key));

    auto& def = pending->def;
    auto as_string = [&]() -> std::string {
      if (const auto* s = std::get_if<std::string>(&value)) return *s;
      parser.fail(fmt::format("\"{}\" must be a string", key));
    };
    if (key == "kind") {
      const auto kind = as_string();
      if (kind == "builtin") {
        def.kind = BenchmarkKind::builtin;
      } else if (kind == "command") {
        def.kind = BenchmarkKind::command;
      } else {
        parser.fail(fmt::format("unknown kind \"{}\"", kind));
      }
      pending->has_kind = true;
    } else if (key == "name") {
      def.builtin_name = as_string();
    } else if (key == "size") {
      const auto* n = std::get_if<std::int64_t>(&value);
      if (!n) parser.fail("\"size\" must be an integer");
      if (*n < 1) parser.fail("\"size\" must be >= 1");
      def.size = *n;
    } else if (key == "argv") {
      const auto* argv = std::get_if<std::vector<std::string>>(&value);
      if (!argv || argv->empty()) parser.fail("\"argv\" must be a non-empty string array");
      def.argv = *argv;
    } else if (key == "workdir") {
      def.workdir = as_string();
    } else {
      parser.fail(fmt::format("unknown key \"{}\"", key));
    }
  }
  if (pending) finish(*pending, suite);
  if (suite.empty()) throw ParseError("suite defines no benchmarks");
  return suite;
}

std::vector<BenchmarkDefinition> load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError(fmt::format("cannot open suite file {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_suite(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<BenchmarkDefinition> resolve_suite(std::string_view argument) {
  constexpr std::string_view prefix = "builtin:";
  if (argument.rfind(prefix, 0) != 0) return load_suite(std::filesystem::path(argument));
  const auto name = argument.substr(prefix.size());
  auto catalog = builtin_workloads();
  if (name == "all") return catalog;
  const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& b) { return b.id == name; });
  if (it == catalog.end()) throw ConfigError(fmt::format("unknown builtin workload \"{}\"", name));
  return {*it};
}

}  // namespace rbench
