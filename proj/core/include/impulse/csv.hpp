#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "impulse/bellman.hpp"
#include "impulse/grid.hpp"

namespace impulse::csv {

/// 17 significant digits; "inf"/"-inf"/"nan" for non-finite values.
std::string format(double v);

/// Output file that throws Error on open or write failure.
class Writer {
 public:
  explicit Writer(const std::string& path);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};

Table read(const std::string& path);

/// Parses a cell written by format() (accepts "inf").
double parse_double(const std::string& cell);

/// Value field CSV: x1,...,xd,V,theta_star,action with one row per masked
/// node. `policy` may be empty (theta_star/action are then left blank).
void write_value_field(const std::string& path, const ValueField& field,
                       const std::vector<BackupResult>& policy);

/// Reads node values back into a field on `grid`. Rows are matched to the
/// nearest grid node; every masked node must be present.
std::vector<double> read_value_field(const std::string& path, const Grid& grid);

}  // namespace impulse::csv
