#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "sonarmvs/geometry.hpp"
#include "sonarmvs/random.hpp"

namespace testing {

inline sonarmvs::SonarIntrinsics small_intrinsics(std::size_t h = 64, std::size_t w = 32,
                                                  std::size_t n = 16) {
  auto k = sonarmvs::SonarIntrinsics::defaults();
  k.range_bins = h;
  k.azimuth_bins = w;
  k.elevation_planes = n;
  return k;
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool rel_near(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sonarmvs_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
