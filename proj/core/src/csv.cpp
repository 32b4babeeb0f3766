#include "impulse/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace impulse::csv {

std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Writer::Writer(const std::string& path) : path_(path), out_(path) {
  if (!out_) throw Error("cannot open " + path + " for writing");
}

void Writer::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) throw Error("write to " + path_ + " failed");
}

void Writer::close() {
  out_.close();
  if (!out_) throw Error("closing " + path_ + " failed");
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error("CSV column '" + name + "' not found");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw Error(path + " is empty");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw Error(path + ":" + std::to_string(lineno) + ": expected " +
                  std::to_string(t.header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

double parse_double(const std::string& cell) {
  if (cell == "inf") return INFINITY;
  if (cell == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw Error("not a number: '" + cell + "'");
  }
  return v;
}

void write_value_field(const std::string& path, const ValueField& field,
                       const std::vector<BackupResult>& policy) {
  const Grid& grid = field.grid();
  Writer w(path);
  std::vector<std::string> header;
  for (std::size_t k = 0; k < grid.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
  header.insert(header.end(), {"V", "theta_star", "action"});
  w.row(header);
  for (std::size_t node : grid.masked()) {
    const State p = grid.point(node);
    std::vector<std::string> cells;
    for (std::size_t k = 0; k < grid.dim(); ++k) cells.push_back(format(p[k]));
    cells.push_back(format(field.values()[node]));
    if (policy.empty()) {
      cells.emplace_back();
      cells.emplace_back();
    } else {
      cells.push_back(format(policy[node].theta.as_double()));
      cells.push_back(std::to_string(policy[node].action.id));
    }
    w.row(cells);
  }
  w.close();
}

std::vector<double> read_value_field(const std::string& path, const Grid& grid) {
  const Table t = read(path);
  const std::size_t v_col = t.column("V");
  std::vector<std::size_t> x_cols;
  for (std::size_t k = 0; k < grid.dim(); ++k) x_cols.push_back(t.column("x" + std::to_string(k + 1)));
  std::vector<double> values(grid.size(), 0.0);
  std::vector<char> seen(grid.size(), 0);
  const double slack = 1e-6 * grid.min_spacing();
  for (const auto& row : t.rows) {
    State x = State::zeros(grid.dim());
    for (std::size_t k = 0; k < grid.dim(); ++k) x[k] = parse_double(row[x_cols[k]]);
    const std::size_t node = grid.nearest(x);
    if (max_norm(grid.point(node) - x) > slack) {
      throw Error(path + ": row at " + to_string(x) + " is not a node of the configured grid");
    }
    values[node] = parse_double(row[v_col]);
    seen[node] = 1;
  }
  for (std::size_t node : grid.masked()) {
    if (!seen[node]) {
      throw Error(path + ": missing value for node " + to_string(grid.point(node)));
    }
  }
  return values;
}

}  // namespace impulse::csv
