#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sonarmvs/dataset.hpp"
#include "sonarmvs/geometry.hpp"
#include "sonarmvs/pipeline.hpp"

namespace sonarmvs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitData = 4;

inline constexpr std::string_view kGeneratorVersion = "sonarmvs-gen 1";

/// Parses a generation config (JSON). Missing keys keep GenConfig defaults.
/// Throws ConfigError on malformed or invalid values.
GenConfig parse_gen_config(std::string_view json_text);

struct ManifestView {
  std::filesystem::path image;
  Pose pose;  // sensor -> world
};

struct ManifestSample {
  std::string id;
  std::uint64_t seed = 0;
  ManifestView reference;
  std::vector<ManifestView> sources;
  std::filesystem::path gt_depth;
  std::filesystem::path mask;

  /// T_ref^src for every source.
  std::vector<Pose> relative_poses() const;
};

struct Manifest {
  std::filesystem::path root;  // directory holding the manifest; paths are relative to it
  std::string generator_version;
  SceneFamily family = SceneFamily::kTerrain;
  std::uint64_t seed = 0;
  SonarIntrinsics intrinsics;
  std::size_t depth_rows = 0;
  std::vector<ManifestSample> samples;

  const ManifestSample& sample(std::string_view id) const;
};

/// Loads and validates a manifest: quaternions unit-norm to 1e-9 and every
/// referenced file present.
Manifest load_manifest(const std::filesystem::path& path);

struct LoadedSample {
  AcousticImage reference;
  std::vector<AcousticImage> sources;
  std::vector<Pose> relative_poses;
  FrontDepthMap ground_truth;
};

LoadedSample load_sample(const Manifest& m, const ManifestSample& s);
FrontDepthMap load_depth(const Manifest& m, const std::filesystem::path& path);

/// Writes the manifest and per-sample tensors for `config` under `out_dir`.
Manifest generate_dataset(const GenConfig& config, const std::filesystem::path& out_dir,
                          unsigned threads = 0);

/// Entry point of the `sonarmvs` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sonarmvs::cli
