#pragma once

// Suite files list benchmarks in a small TOML subset:
//
//   # comment
//   [benchmark.small_sum]
//   kind = "builtin"
//   name = "sumindex"
//   size = 128
//
//   [benchmark.startup]
//   kind = "command"
//   argv = ["/bin/true"]
//   workdir = "/tmp"
//
// Values are double-quoted strings (\" and \\ escapes), integers, or arrays of
// strings. Ids must be unique; builtin names must exist in the catalog.

#include "rbench/experiment.hpp"

#include <filesystem>
#include <string_view>
#include <vector>

namespace rbench {

std::vector<BenchmarkDefinition> parse_suite(std::string_view text);
std::vector<BenchmarkDefinition> load_suite(const std::filesystem::path& path);

// "builtin:NAME" or "builtin:all" name shipped workloads; anything else is a suite file.
std::vector<BenchmarkDefinition> resolve_suite(std::string_view argument);

}  // namespace rbench
