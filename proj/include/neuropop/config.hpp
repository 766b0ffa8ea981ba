#pragma once
// Flat-sectioned key=value model configs, validation against the model
// assumptions, and a canonical serialization for hashing.

#include <string>
#include <vector>

#include "neuropop/grid.hpp"
#include "neuropop/model.hpp"

namespace neuropop {

struct GridDefaults {
  double a_max = -1.0;
  int n_a = -1;
  int n_m = -1;
  std::string spacing = "uniform";
  double m_min = -1.0;  // lower grid bound (geometric spacing needs > 0)
};

struct ParsedConfig {
  ModelSpec spec;
  InitialSpec initial;
  GridDefaults grid;
  double tail_tol = 1e-8;
  bool m_max_given = false;
  std::vector<std::string> notes;  // assumption-check outcomes
};

ParsedConfig parse_config_text(const std::string& text, const std::string& origin);
ParsedConfig parse_config_file(const std::string& path);

std::string serialize_config(const ParsedConfig& cfg);

// FNV-1a over the canonicalized (sorted section.key=value) content; stable
// under key reordering and comments.
std::string config_hash_hex(const std::string& text);

// Grid built from config defaults; negative/absent fields fall back to
// spec-derived values (a_max from the tail criterion, 400x100 cells).
GridSpec grid_from_config(const ParsedConfig& cfg);

}  // namespace neuropop
