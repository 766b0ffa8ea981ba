#pragma once
// CSV output with 17-significant-digit doubles and deterministic row order.

#include <string>
#include <vector>

#include "neuropop/grid.hpp"
#include "neuropop/stationary.hpp"
#include "neuropop/trace.hpp"

namespace neuropop {

std::string fmt17(double v);

void write_trace_csv(const std::string& path, const Trace& trace);
void write_raster_csv(const std::string& path, const Trace& trace);
void write_density_csv(const std::string& path, const DensityGrid& rho);
void write_boundary_csv(const std::string& path, const BoundaryDensity& u);
void write_kv_csv(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace neuropop
