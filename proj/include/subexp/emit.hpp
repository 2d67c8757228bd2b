#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "subexp/harness.hpp"

namespace subexp {

enum class Format { csv, jsonl, table };
Format parse_format(const std::string& name);

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

inline constexpr const char* kRecordsHeader = "experiment,n,trial,error,runtime_ms,converged,seed";

// Shortest text that parses back to the same double.
std::string format_double(double v);
std::string cell_text(const Cell& c);

void emit(const Table& table, Format format, std::ostream& out);
// Empty path or "-" writes to stdout.
void emit_to_path(const Table& table, Format format, const std::string& path);

Table records_table(const std::vector<TrialRecord>& records);
Table aggregates_table(const ExperimentResult& result);
std::vector<TrialRecord> parse_records(std::istream& in, Format format);
std::vector<TrialRecord> read_records_file(const std::string& path);

}  // namespace subexp
