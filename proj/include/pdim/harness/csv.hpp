#pragma once

#include "pdim/comoments.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pdim::harness {

// Provenance written as a leading "# config_hash=... seed=..." line.  Readers
// skip lines starting with '#'.
struct CsvStamp {
  std::string config_hash;
  std::uint64_t seed = 0;
};

// Shortest round-trip decimal form.
std::string format_double(double v);

void write_returns_csv(std::ostream& os, const ReturnSample& s, const CsvStamp* stamp = nullptr);
void write_returns_csv(const std::string& path, const ReturnSample& s,
                       const CsvStamp* stamp = nullptr);
// Header row of asset names, one observation per row.  Throws InvalidInput
// on ragged rows or unparsable numbers.
ReturnSample read_returns_csv(std::istream& is);
ReturnSample read_returns_csv(const std::string& path);

// Generic numeric table with a header row.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table(std::ostream& os, const Table& t, const CsvStamp* stamp = nullptr);
void write_table(const std::string& path, const Table& t, const CsvStamp* stamp = nullptr);
Table read_table(std::istream& is);

}  // namespace pdim::harness
