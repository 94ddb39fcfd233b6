#include "aoicache/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aoicache {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_run_csv(const std::filesystem::path& path,
                   std::span<const RunRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kRunCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.epoch << ',' << r.rep << ',' << format_double(r.reward) << ','
        << format_double(r.cost) << ',' << format_double(r.aoi) << ','
        << format_double(r.energy_j) << ',' << r.action << ','
        << format_double(r.epsilon) << ',';
    if (r.loss) out << format_double(*r.loss);
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

std::vector<RunRecord> read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRunCsvHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<RunRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 9) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 9 columns");
    }
    RunRecord r;
    r.epoch = std::stoll(cells[0]);
    r.rep = std::stoi(cells[1]);
    r.reward = std::stod(cells[2]);
    r.cost = std::stod(cells[3]);
    r.aoi = std::stod(cells[4]);
    r.energy_j = std::stod(cells[5]);
    r.action = std::stoi(cells[6]);
    r.epsilon = std::stod(cells[7]);
    if (!cells[8].empty()) r.loss = std::stod(cells[8]);
    records.push_back(r);
  }
  return records;
}

}  // namespace aoicache
