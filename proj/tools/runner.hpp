#pragma once

// Executes one RunConfig and writes its artifacts.
//
// Every experiment writes <prefix>.json (resolved config, version, results,
// timestamps) and one or more CSV tables. A CSV starts with two comment lines,
// `# lsslab <version>` and `# config: <compact JSON>`, followed by the header
// row and LF-terminated records. Timestamps appear only in the JSON file, so
// reruns of one config produce identical CSV files.

#include <string>
#include <vector>

#include "config.hpp"

namespace lsslab::cli {

struct RunOutput {
  std::vector<std::string> files;  // paths written, JSON first
  std::string summary;             // one line for humans
};

std::string version();

/// Runs the experiment. Library errors are rethrown with the stage that
/// raised them prepended to the message.
RunOutput run(const RunConfig& cfg);

/// Shortest round-trip decimal form; the CSV number format.
std::string format_number(double x);

}  // namespace lsslab::cli
