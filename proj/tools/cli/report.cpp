#include "cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace psichain::cli {

void Table::add(std::vector<std::string> cells) {
  if (cells.size() != columns.size())
    throw std::logic_error("table " + name + ": row has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(columns.size()));
  rows.push_back(std::move(cells));
}

Table& Report::table(const std::string& name, std::vector<std::string> columns) {
  for (auto& t : tables)
    if (t.name == name) return t;
  tables.push_back(Table{name, std::move(columns), {}});
  return tables.back();
}

const Table* Report::find(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

void Report::check(const std::string& name, bool pass, const std::string& detail) {
  properties.push_back(Property{name, pass, detail});
}

bool Report::all_pass() const {
  for (const auto& p : properties)
    if (!p.pass) return false;
  return true;
}

std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(std::uint64_t v, bool hex) { return hex ? hex64(v) : std::to_string(v); }

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + quote(t.columns[c]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + quote(row[c]);
    out += "\n";
  }
  return out;
}

Json summary_json(const Report& r) {
  Json j;
  j["schema"] = kReportSchema;
  j["version"] = r.version;
  j["kind"] = r.kind;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["config"] = r.config;
  j["status"] = r.status;
  if (!r.message.empty()) j["message"] = r.message;
  Json tables = Json::array();
  for (const auto& t : r.tables) tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}});
  j["tables"] = tables;
  Json props = Json::array();
  for (const auto& p : r.properties)
    props.push_back({{"name", p.name}, {"pass", p.pass}, {"detail", p.detail}});
  j["properties"] = props;
  j["pass"] = r.all_pass() && r.status == "complete";
  return j;
}

std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir,
                                                const std::string& prefix) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& t : r.tables) {
    const auto path = dir / (prefix + "_" + t.name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_csv(t);
    written.push_back(path);
  }
  auto summary = summary_json(r);
  Json files = Json::array();
  for (const auto& t : r.tables) files.push_back(prefix + "_" + t.name + ".csv");
  summary["files"] = files;
  const auto path = dir / (prefix + "_summary.json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << summary.dump(2) << "\n";
  written.push_back(path);
  return written;
}

Table parse_csv(const std::string& name, const std::string& text) {
  Table t;
  t.name = name;
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(field);
      field.clear();
    } else if (c == '\n') {
      record.push_back(field);
      field.clear();
      records.push_back(std::move(record));
      record.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !record.empty()) {
    record.push_back(field);
    records.push_back(std::move(record));
  }
  if (records.empty()) throw std::runtime_error("csv " + name + " has no header");
  t.columns = records.front();
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.columns.size())
      throw std::runtime_error("csv " + name + " row " + std::to_string(i) + " has the wrong width");
    t.rows.push_back(records[i]);
  }
  return t;
}

LoadedReport load_report(const std::filesystem::path& summary_path) {
  std::ifstream in(summary_path);
  if (!in) throw std::runtime_error("cannot open report " + summary_path.string());
  LoadedReport r;
  try {
    in >> r.summary;
  } catch (const Json::exception&) {
    throw std::runtime_error("report " + summary_path.string() + " is not valid JSON");
  }
  if (!r.summary.is_object() || r.summary.value("schema", "") != kReportSchema)
    throw std::runtime_error("report " + summary_path.string() + " has an unrecognized schema");
  const auto dir = summary_path.parent_path();
  for (const auto& t : r.summary.at("tables")) {
    const auto name = t.at("name").get<std::string>();
    std::string file;
    for (const auto& f : r.summary.value("files", Json::array()))
      if (f.get<std::string>().ends_with("_" + name + ".csv")) file = f.get<std::string>();
    if (file.empty()) throw std::runtime_error("report lists no file for table " + name);
    std::ifstream csv(dir / file, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + (dir / file).string());
    std::stringstream ss;
    ss << csv.rdbuf();
    r.tables.push_back(parse_csv(name, ss.str()));
  }
  return r;
}

}  // namespace psichain::cli
