#pragma once
// Run manifest written before any output file: config hash, seed, parameter
// echo and the planned output list, for re-running a directory byte-for-byte.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace neuropop {

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string timestamp;  // filled at write time unless preset
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::string> outputs;
};

// Writes <dir>/run_manifest.json and returns the full path.
std::string write_manifest(const std::string& dir, RunManifest manifest);

}  // namespace neuropop
