#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "gpq/radial_solver.hpp"

namespace test {

// Ground states on the standard radial grid, solved once per q.
inline const gpq::GroundStateRecord& ground(double q) {
  static std::map<double, gpq::GroundStateRecord> cache;
  static std::mutex m;
  std::lock_guard lock(m);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, gpq::find_ground_state(q, gpq::RadialGrid::standard())).first;
  return it->second;
}

inline std::string scratch(const std::string& name) {
  const auto p = std::filesystem::path(GPQ_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p.parent_path());
  return p.string();
}

}  // namespace test
