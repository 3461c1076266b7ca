#include <doctest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "helpers.hpp"
#include "sonarmvs/cli.hpp"
#include "sonarmvs/errors.hpp"
#include "sonarmvs/io.hpp"

using namespace sonarmvs;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "sonarmvs");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  io::write_file_atomic(p, text);
  return p.string();
}

const char* kSphereConfig = R"({
  "family": "sphere", "count": 3, "seed": 4,
  "intrinsics": {"range_bins": 128, "azimuth_bins": 32, "elevation_planes": 16},
  "render": {"rays_per_elevation": 256}
})";

Json read_json(const fs::path& p) { return Json::parse(io::read_file(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse_gen_config") {
  const GenConfig d = cli::parse_gen_config("{}");
  CHECK(d.family == SceneFamily::kTerrain);
  CHECK(d.count == 10);
  REQUIRE(d.roll_deltas.size() == 1);
  CHECK(testing::near(d.roll_deltas[0], deg2rad(7.0), 1e-15));

  const GenConfig c = cli::parse_gen_config(
      R"({"family": "sphere", "source_rolls_deg": [7, -7], "intrinsics": {"range_bins": 100}})");
  CHECK(c.family == SceneFamily::kSphere);
  CHECK(c.roll_deltas.size() == 2);
  CHECK(c.intrinsics.range_bins == 100);

  CHECK_THROWS_AS(cli::parse_gen_config(R"({"colour": 1})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_gen_config(R"({"noise": {"speckle": 1}})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_gen_config(R"({"count": "many"})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_gen_config("{"), ConfigError);
  CHECK_THROWS_AS(cli::parse_gen_config(R"({"reflectivity": 0})"), ConfigError);
}

TEST_CASE("gen with zero samples writes an empty manifest") {
  const auto dir = testing::scratch_dir("cli_empty");
  const auto cfg = write_config(dir, R"({"family": "sphere", "count": 0})");
  REQUIRE(run({"gen", "--config", cfg, "--out", (dir / "ds").string()}).code == 0);
  const Json m = read_json(dir / "ds" / "manifest.json");
  CHECK(m.at("samples").empty());
  CHECK(m.at("count") == 0);
}

TEST_CASE("gen is deterministic and records roll poses") {
  const auto dir = testing::scratch_dir("cli_gen");
  const auto cfg = write_config(dir, kSphereConfig);
  REQUIRE(run({"gen", "--config", cfg, "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"gen", "--config", cfg, "--out", (dir / "b").string(), "--threads", "2"}).code == 0);
  CHECK(io::read_file(dir / "a" / "manifest.json") == io::read_file(dir / "b" / "manifest.json"));
  for (const char* f : {"ref.snr", "src_1.snr", "gt_depth.snr", "mask.snr"}) {
    CHECK(io::read_file(dir / "a" / "sample_0002" / f) == io::read_file(dir / "b" / "sample_0002" / f));
  }

  const cli::Manifest m = cli::load_manifest(dir / "a" / "manifest.json");
  REQUIRE(m.samples.size() == 3);
  for (const auto& s : m.samples) {
    REQUIRE(s.sources.size() == 1);
    const Pose rel = s.relative_poses()[0];
    CHECK((rel.rotation() - Pose::roll(-deg2rad(7.0)).rotation()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(rel.translation().norm() < 1e-9);
  }
}

TEST_CASE("reconstruct, eval, baseline and render") {
  const auto dir = testing::scratch_dir("cli_pipeline");
  const auto cfg = write_config(dir, kSphereConfig);
  const std::string ds = (dir / "ds").string();
  const std::string manifest = ds + "/manifest.json";
  REQUIRE(run({"gen", "--config", cfg, "--out", ds}).code == 0);

  const std::string est = (dir / "est").string();
  REQUIRE(run({"reconstruct", "--manifest", manifest, "--all", "--out", est}).code == 0);
  const cli::Manifest m = cli::load_manifest(manifest);
  for (const auto& s : m.samples) {
    const fs::path d = fs::path(est) / s.id;
    REQUIRE(fs::exists(d / "depth.snr"));
    const FrontDepthMap depth = cli::load_depth(m, d / "depth.snr");
    CHECK(io::read_ply(d / "cloud.ply").size() == make_mask(depth).count());
    CHECK(read_json(d / "meta.json").at("sample") == s.id);
  }

  SUBCASE("eval against the ground truth itself is exact") {
    const std::string gt = (dir / "gt").string();
    for (const auto& s : m.samples) {
      fs::create_directories(fs::path(gt) / s.id);
      fs::copy_file(m.root / s.gt_depth, fs::path(gt) / s.id / "depth.snr");
    }
    REQUIRE(run({"eval", "--manifest", manifest, "--estimates", gt}).code == 0);
    const Json r = read_json(fs::path(gt) / "report.json");
    CHECK(r.at("aggregate").at("mae").at("mean") == 0.0);
    CHECK(r.at("aggregate").at("chamfer").at("mean") == 0.0);
    CHECK(fs::exists(fs::path(gt) / "report.txt"));
  }

  SUBCASE("eval aggregates are the per-sample means") {
    const std::string rep = (dir / "rep").string();
    const Result res = run({"eval", "--manifest", manifest, "--estimates", est, "--out", rep});
    REQUIRE(res.code == 0);
    CHECK(res.out.find("mean") != std::string::npos);
    const Json r = read_json(fs::path(rep) / "report.json");
    double mae = 0.0;
    double cd = 0.0;
    for (const auto& s : r.at("samples")) {
      mae += s.at("mae").get<double>();
      cd += s.at("chamfer").get<double>();
    }
    CHECK(testing::near(r.at("aggregate").at("mae").at("mean").get<double>(), mae / 3, 1e-9));
    CHECK(testing::near(r.at("aggregate").at("chamfer").at("mean").get<double>(), cd / 3, 1e-9));

    // Second run, same bytes.
    const std::string rep2 = (dir / "rep2").string();
    REQUIRE(run({"eval", "--manifest", manifest, "--estimates", est, "--out", rep2}).code == 0);
    CHECK(io::read_file(fs::path(rep) / "report.json") == io::read_file(fs::path(rep2) / "report.json"));

    // The occupancy baseline is far worse on the same data.
    const std::string base = (dir / "base").string();
    REQUIRE(run({"baseline", "--manifest", manifest, "--all", "--out", base}).code == 0);
    const Json b = read_json(fs::path(base) / "baseline_report.json");
    CHECK(b.at("aggregate").at("chamfer").at("mean").get<double>() >
          r.at("aggregate").at("chamfer").at("mean").get<double>());
    CHECK(fs::exists(fs::path(base) / "sample_0000" / "baseline.ply"));
  }

  SUBCASE("eval reports missing estimates") {
    fs::remove_all(fs::path(est) / "sample_0001");
    const Result res = run({"eval", "--manifest", manifest, "--estimates", est});
    CHECK(res.code == cli::kExitData);
    CHECK(res.err.find("sample_0001") != std::string::npos);
  }

  SUBCASE("baseline is deterministic") {
    const std::string a = (dir / "b1").string();
    const std::string b = (dir / "b2").string();
    REQUIRE(run({"baseline", "--manifest", manifest, "--sample", "sample_0000", "--out", a}).code == 0);
    REQUIRE(run({"baseline", "--manifest", manifest, "--sample", "sample_0000", "--out", b}).code == 0);
    CHECK(io::read_file(fs::path(a) / "sample_0000" / "baseline.ply") ==
          io::read_file(fs::path(b) / "sample_0000" / "baseline.ply"));
    CHECK(run({"baseline", "--manifest", manifest, "--out", a}).code == cli::kExitConfig);
  }

  SUBCASE("render") {
    const fs::path pgm = dir / "depth.pgm";
    REQUIRE(run({"render", "--input", est + "/sample_0000/depth.snr", "--out", pgm.string()}).code == 0);
    const FrontDepthMap depth = cli::load_depth(m, fs::path(est) / "sample_0000" / "depth.snr");
    std::ostringstream header;
    header << "P5\n" << depth.cols() << ' ' << depth.rows() << "\n65535\n";
    const std::string bytes = io::read_file(pgm);
    CHECK(bytes.rfind(header.str(), 0) == 0);
    CHECK(bytes.size() == header.str().size() + 2 * depth.rows() * depth.cols());

    io::write_tensor(dir / "cube.snr", {{2, 2, 2}, {"a", "b", "c"}, {1, 2, 3, 4, 5, 6, 7, 8}});
    CHECK(run({"render", "--input", (dir / "cube.snr").string(), "--out", pgm.string()}).code ==
          cli::kExitData);
  }
}

TEST_CASE("single-frame datasets") {
  const auto dir = testing::scratch_dir("cli_single");
  const auto cfg = write_config(dir, R"({"family": "sphere", "count": 1, "source_rolls_deg": [],
      "intrinsics": {"range_bins": 64, "azimuth_bins": 16, "elevation_planes": 8},
      "render": {"rays_per_elevation": 64}})");
  const std::string ds = (dir / "ds").string();
  REQUIRE(run({"gen", "--config", cfg, "--out", ds}).code == 0);
  const std::string manifest = ds + "/manifest.json";
  CHECK(cli::load_manifest(manifest).samples.at(0).sources.empty());
  const Result base = run({"baseline", "--manifest", manifest, "--all", "--out", ds + "/base"});
  CHECK(base.code == 0);
  CHECK(fs::exists(fs::path(ds) / "base" / "sample_0000" / "baseline.ply"));
}

TEST_CASE("exit codes") {
  const auto dir = testing::scratch_dir("cli_codes");
  CHECK(run({"gen", "--config", (dir / "nope.json").string(), "--out", dir.string()}).code ==
        cli::kExitIo);
  const auto bad = write_config(dir, R"({"family": "sphere", "bogus": true})");
  CHECK(run({"gen", "--config", bad, "--out", dir.string()}).code == cli::kExitConfig);
  CHECK(run({"gen", "--frobnicate"}).code == cli::kExitConfig);
  CHECK(run({"reconstruct", "--manifest", "m.json", "--out", "x", "--sigma", "1,2"}).code ==
        cli::kExitConfig);
  CHECK(run({"--help"}).code == cli::kExitOk);

  // A manifest whose quaternion is not unit-norm.
  const auto cfg = write_config(dir, R"({"family": "sphere", "count": 1,
      "intrinsics": {"range_bins": 32, "azimuth_bins": 16, "elevation_planes": 8},
      "render": {"rays_per_elevation": 32}})");
  const std::string ds = (dir / "ds").string();
  REQUIRE(run({"gen", "--config", cfg, "--out", ds}).code == 0);
  Json m = read_json(fs::path(ds) / "manifest.json");
  m["samples"][0]["reference"]["pose"]["rotation_wxyz"] = {1.0, 0.1, 0.0, 0.0};
  io::write_file_atomic(fs::path(ds) / "manifest.json", m.dump());
  CHECK(run({"reconstruct", "--manifest", ds + "/manifest.json", "--all", "--out", ds + "/est"}).code ==
        cli::kExitData);
}

}
