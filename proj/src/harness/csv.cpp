#include "pdim/harness/csv.hpp"

#include "pdim/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace pdim::harness {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    std::ostringstream os;
    os << "line " << line_no << ": cannot parse '" << s << "' as a number";
    throw InvalidInput(os.str());
  }
  return v;
}

void write_stamp(std::ostream& os, const CsvStamp* stamp) {
  if (stamp) os << "# config_hash=" << stamp->config_hash << " seed=" << stamp->seed << '\n';
}

bool next_data_line(std::istream& is, std::string& line, std::size_t& line_no) {
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericalFailure("number formatting failed");
  return std::string(buf, ptr);
}

void write_returns_csv(std::ostream& os, const ReturnSample& s, const CsvStamp* stamp) {
  s.validate();
  write_stamp(os, stamp);
  for (std::size_t j = 0; j < s.asset_names.size(); ++j)
    os << (j ? "," : "") << s.asset_names[j];
  os << '\n';
  std::string row;
  for (Eigen::Index t = 0; t < s.values.rows(); ++t) {
    row.clear();
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
      if (j) row += ',';
      row += format_double(s.values(t, j));
    }
    row += '\n';
    os << row;
  }
}

void write_returns_csv(const std::string& path, const ReturnSample& s, const CsvStamp* stamp) {
  auto f = open_out(path);
  write_returns_csv(f, s, stamp);
}

ReturnSample read_returns_csv(std::istream& is) {
  const Table t = read_table(is);
  ReturnSample s;
  s.asset_names = t.columns;
  s.values.resize(static_cast<Eigen::Index>(t.rows.size()),
                  static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t j = 0; j < t.columns.size(); ++j)
      s.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = t.rows[r][j];
  s.validate();
  return s;
}

ReturnSample read_returns_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open '" + path + "'");
  return read_returns_csv(f);
}

void write_table(std::ostream& os, const Table& t, const CsvStamp* stamp) {
  write_stamp(os, stamp);
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw InvalidInput("table row has the wrong width");
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_double(row[j]);
    os << '\n';
  }
}

void write_table(const std::string& path, const Table& t, const CsvStamp* stamp) {
  auto f = open_out(path);
  write_table(f, t, stamp);
}

Table read_table(std::istream& is) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  if (!next_data_line(is, line, line_no)) throw InvalidInput("CSV has no header row");
  t.columns = split(line);
  if (t.columns.empty()) throw InvalidInput("CSV header is empty");
  while (next_data_line(is, line, line_no)) {
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      std::ostringstream os;
      os << "line " << line_no << ": expected " << t.columns.size() << " fields, found "
         << cells.size();
      throw InvalidInput(os.str());
    }
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) row[j] = parse_double(cells[j], line_no);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace pdim::harness
