#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace neuropop {

// Time series shared by the particle and PDE runners.
struct Trace {
  std::vector<double> times;
  std::vector<double> x_values;
  std::vector<double> pop_rate;       // mean firing rate N(t)
  std::vector<double> mass;           // mass inside the truncated window
  std::vector<double> weighted_norm;  // L1(w) norm, w = 1 + m
  std::vector<std::pair<std::uint32_t, double>> raster;  // (neuron id, spike time)

  std::size_t size() const { return times.size(); }
};

struct RecordConfig {
  double stride = 0.1;       // recording interval
  int raster_count = 0;      // record spikes of neurons with id < raster_count
  double window_a_max = 0.0; // mass_in_window bounds; 0 => everything counts
  double window_m_max = 0.0;
};

}  // namespace neuropop
