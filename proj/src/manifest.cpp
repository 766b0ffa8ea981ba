#include "neuropop/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace neuropop {

std::string write_manifest(const std::string& dir, RunManifest manifest) {
  if (manifest.timestamp.empty()) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    manifest.timestamp = buf;
  }
  nlohmann::json j;
  j["subcommand"] = manifest.subcommand;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["threads"] = manifest.threads;
  j["timestamp"] = manifest.timestamp;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : manifest.parameters) params[k] = v;
  j["parameters"] = params;
  j["outputs"] = manifest.outputs;

  const std::string path = dir + "/run_manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
  return path;
}

}  // namespace neuropop
