#include "neuropop/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace neuropop {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: identical bytes everywhere
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out = open_out(path);
  out << "t,x,pop_rate,mass_in_window,weighted_norm\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << fmt17(trace.times[i]) << ',' << fmt17(trace.x_values[i]) << ','
        << fmt17(trace.pop_rate[i]) << ',' << fmt17(trace.mass[i]) << ','
        << fmt17(trace.weighted_norm[i]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_raster_csv(const std::string& path, const Trace& trace) {
  std::ofstream out = open_out(path);
  out << "neuron_id,spike_time\n";
  for (const auto& [id, t] : trace.raster) out << id << ',' << fmt17(t) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_density_csv(const std::string& path, const DensityGrid& rho) {
  std::ofstream out = open_out(path);
  out << "a_lo,a_hi,m_lo,m_hi,density\n";
  const GridSpec& g = rho.grid;
  for (int i = 0; i < g.n_a; ++i)
    for (int j = 0; j < g.n_m; ++j)
      out << fmt17(g.a_lo(i)) << ',' << fmt17(g.a_lo(i) + g.da()) << ',' << fmt17(g.m_lo(j))
          << ',' << fmt17(g.m_hi(j)) << ',' << fmt17(rho.at(i, j)) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_boundary_csv(const std::string& path, const BoundaryDensity& u) {
  std::ofstream out = open_out(path);
  out << "m_lo,m_hi,u\n";
  for (int k = 0; k < u.cells(); ++k)
    out << fmt17(u.edges[k]) << ',' << fmt17(u.edges[k + 1]) << ',' << fmt17(u.value(k))
        << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_kv_csv(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out = open_out(path);
  out << "key,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace neuropop
