#include "subexp/emit.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "subexp/errors.hpp"

namespace subexp {

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "jsonl" || name == "json-lines") return Format::jsonl;
  if (name == "table") return Format::table;
  throw ConfigError("unknown format '" + name + "' (csv, jsonl, table)");
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw ConfigError("table row width differs from header");
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else return std::to_string(v);
      },
      c);
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_double(v);
          return v;
        } else {
          return v;
        }
      },
      c);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad number '" + s + "'");
  return v;
}

template <typename T>
T parse_int(const std::string& s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad integer '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("bad boolean '" + s + "'");
}

}  // namespace

void emit(const Table& table, Format format, std::ostream& out) {
  switch (format) {
    case Format::csv: {
      for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_escape(table.columns[i]);
      out << "\n";
      for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(cell_text(row[i]));
        out << "\n";
      }
      break;
    }
    case Format::jsonl: {
      for (const auto& row : table.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = cell_json(row[i]);
        out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
      }
      break;
    }
    case Format::table: {
      std::vector<std::size_t> width(table.columns.size());
      std::vector<std::vector<std::string>> text;
      for (std::size_t i = 0; i < table.columns.size(); ++i) width[i] = table.columns[i].size();
      for (const auto& row : table.rows) {
        std::vector<std::string> t;
        for (std::size_t i = 0; i < row.size(); ++i) {
          std::string s = std::holds_alternative<double>(row[i])
                              ? [&] {
                                  std::ostringstream os;
                                  os << std::setprecision(6) << std::get<double>(row[i]);
                                  return os.str();
                                }()
                              : cell_text(row[i]);
          width[i] = std::max(width[i], s.size());
          t.push_back(std::move(s));
        }
        text.push_back(std::move(t));
      }
      auto write_row = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          out << (i ? "  " : "") << cells[i];
          if (i + 1 < cells.size()) out << std::string(width[i] - cells[i].size(), ' ');
        }
        out << "\n";
      };
      write_row(table.columns);
      for (const auto& t : text) write_row(t);
      break;
    }
  }
}

void emit_to_path(const Table& table, Format format, const std::string& path) {
  if (path.empty() || path == "-") {
    emit(table, format, std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write to '" + path + "'");
  emit(table, format, out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

Table records_table(const std::vector<TrialRecord>& records) {
  Table t;
  t.columns = {"experiment", "n", "trial", "error", "runtime_ms", "converged", "seed"};
  for (const auto& r : records) {
    t.add({r.experiment, static_cast<std::int64_t>(r.n), static_cast<std::int64_t>(r.trial), r.error, r.runtime_ms,
           r.converged, r.seed});
  }
  return t;
}

Table aggregates_table(const ExperimentResult& result) {
  Table t;
  t.columns = {"experiment", "n", "count", "median", "q25", "q75"};
  for (const auto& a : result.aggregates) {
    t.add({result.experiment, static_cast<std::int64_t>(a.n), static_cast<std::int64_t>(a.count), a.median, a.q25,
           a.q75});
  }
  return t;
}

std::vector<TrialRecord> parse_records(std::istream& in, Format format) {
  std::vector<TrialRecord> out;
  std::string line;
  if (format == Format::csv) {
    if (!std::getline(in, line)) throw ConfigError("records CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordsHeader) throw ConfigError("records CSV header mismatch: '" + line + "'");
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto f = csv_split(line);
      if (f.size() != 7) throw ConfigError("records CSV row has " + std::to_string(f.size()) + " fields");
      out.push_back({f[0], parse_int<Index>(f[1]), parse_int<int>(f[2]), parse_double(f[3]), parse_double(f[4]),
                     parse_bool(f[5]), parse_int<std::uint64_t>(f[6])});
    }
    return out;
  }
  if (format == Format::jsonl) {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      auto num = [&](const char* key) {
        const auto& v = j.at(key);
        return v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>();
      };
      out.push_back({j.at("experiment").get<std::string>(), j.at("n").get<Index>(), j.at("trial").get<int>(),
                     num("error"), num("runtime_ms"), j.at("converged").get<bool>(),
                     j.at("seed").get<std::uint64_t>()});
    }
    return out;
  }
  throw ConfigError("records can only be parsed from csv or jsonl");
}

std::vector<TrialRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read records file '" + path + "'");
  const bool jsonl = path.size() >= 6 && (path.ends_with(".jsonl") || path.ends_with(".json"));
  return parse_records(in, jsonl ? Format::jsonl : Format::csv);
}

}  // namespace subexp
