#pragma once

#include "cli/config.hpp"

#include <deque>
#include <filesystem>
#include <string>
#include <vector>

namespace psichain::cli {

inline constexpr const char* kReportSchema = "psichain-report/1";

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  // Appends a row; the cell count must match the columns.
  void add(std::vector<std::string> cells);
};

struct Property {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::string kind;
  std::string mode;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version = PSICHAIN_VERSION;
  Json config;
  std::deque<Table> tables;  // stable references across table()
  std::vector<Property> properties;
  std::string status = "complete";  // complete, partial, error
  std::string message;

  Table& table(const std::string& name, std::vector<std::string> columns);
  const Table* find(const std::string& name) const;
  void check(const std::string& name, bool pass, const std::string& detail = "");
  bool all_pass() const;
};

// Fixed formatting so reports are byte-stable.
std::string cell(double v);
std::string cell(std::size_t v);
std::string cell(int v);
std::string cell(bool v);
std::string cell(std::uint64_t v, bool hex);

std::string to_csv(const Table& t);
Json summary_json(const Report& r);
// Writes <prefix>_<table>.csv per table and <prefix>_summary.json.
std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir,
                                                const std::string& prefix);

struct LoadedReport {
  Json summary;
  std::deque<Table> tables;  // stable references across table()
};
// Reads a summary JSON and the CSV tables it lists.
LoadedReport load_report(const std::filesystem::path& summary_path);
Table parse_csv(const std::string& name, const std::string& text);

}  // namespace psichain::cli
