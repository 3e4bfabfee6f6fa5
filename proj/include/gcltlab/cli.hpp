#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcltlab/limit_harness.hpp"

namespace gcltlab::cli {

enum class Command {
  variance, lln, clt, gheat, capacity, mc, example51, example52, example53, selftest
};

Command parse_command(const std::string& name);
std::string command_name(Command command);

struct Manifest {
  Command command = Command::selftest;
  // Parameter values, kept as JSON so manifests may hold strings, numbers or
  // inline measure sets.
  nlohmann::json parameters = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string output_path;  // empty: write to stdout
};

Manifest manifest_from_json(const nlohmann::json& document);
nlohmann::json manifest_to_json(const Manifest& manifest);

// A rectangular table of already formatted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Locale-independent shortest round-trip formatting.
std::string format_number(double value);

CsvTable convergence_table(const std::vector<ConvergenceRow>& rows, bool timing = true);

void write_csv(const CsvTable& table, std::ostream& out);

// Writes the table to `path` (UTF-8, comma separated, header first).
// Throws ValidationError if the file cannot be opened.
void emit_csv(const CsvTable& table, const std::string& path);

// Parses the measure-set parameter: a builtin name (example51, example52,
// example53:K), a path to a JSON document, or an inline JSON object, all in
// the {"extremes":[{"atoms":[[point,weight],...]},...]} schema.
MeasureSet parse_measure_set(const nlohmann::json& value);
MeasureSet measure_set_from_json(const nlohmann::json& document);

// Executes one manifest. Returns the CSV table; `log` receives
// human-readable progress (selftest lines).
CsvTable execute(const Manifest& manifest, std::ostream& log);

// Full entry point: `gcltlab <command> [--manifest file] [--seed k]
// [--out path] [key=value ...] [--key value ...]`. Exit codes: 0 success,
// 1 selftest failure, 2 validation error, 3 numerical guard violation.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Same, for an already assembled manifest.
int run(const Manifest& manifest, std::ostream& out, std::ostream& err);

}  // namespace gcltlab::cli
