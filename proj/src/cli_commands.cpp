#include "sonarmvs/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sonarmvs/errors.hpp"
#include "sonarmvs/io.hpp"
#include "sonarmvs/parallel.hpp"

namespace sonarmvs::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// JSON helpers

void check_keys(const Json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Json intrinsics_to_json(const SonarIntrinsics& k) {
  return Json{{"range_min", k.range_min},
              {"range_max", k.range_max},
              {"azimuth_min", k.azimuth_min},
              {"azimuth_max", k.azimuth_max},
              {"elevation_min", k.elevation_min},
              {"elevation_max", k.elevation_max},
              {"range_bins", k.range_bins},
              {"azimuth_bins", k.azimuth_bins},
              {"elevation_planes", k.elevation_planes}};
}

SonarIntrinsics intrinsics_from_json(const Json& j) {
  check_keys(j, "intrinsics",
             {"range_min", "range_max", "azimuth_min", "azimuth_max", "elevation_min",
              "elevation_max", "azimuth_fov_deg", "elevation_fov_deg", "range_bins",
              "azimuth_bins", "elevation_planes"});
  SonarIntrinsics k = SonarIntrinsics::defaults();
  read_opt(j, "range_min", k.range_min);
  read_opt(j, "range_max", k.range_max);
  if (j.contains("azimuth_fov_deg")) {
    const double half = 0.5 * deg2rad(j.at("azimuth_fov_deg").get<double>());
    k.azimuth_min = -half;
    k.azimuth_max = half;
  }
  if (j.contains("elevation_fov_deg")) {
    const double half = 0.5 * deg2rad(j.at("elevation_fov_deg").get<double>());
    k.elevation_min = -half;
    k.elevation_max = half;
  }
  read_opt(j, "azimuth_min", k.azimuth_min);
  read_opt(j, "azimuth_max", k.azimuth_max);
  read_opt(j, "elevation_min", k.elevation_min);
  read_opt(j, "elevation_max", k.elevation_max);
  read_opt(j, "range_bins", k.range_bins);
  read_opt(j, "azimuth_bins", k.azimuth_bins);
  read_opt(j, "elevation_planes", k.elevation_planes);
  k.validate();
  return k;
}

Json pose_to_json(const Pose& p) {
  const Eigen::Quaterniond q = p.quaternion();
  return Json{{"rotation_wxyz", {q.w(), q.x(), q.y(), q.z()}},
              {"translation", {p.translation().x(), p.translation().y(), p.translation().z()}}};
}

Pose pose_from_json(const Json& j) {
  const auto q = j.at("rotation_wxyz").get<std::vector<double>>();
  const auto t = j.at("translation").get<std::vector<double>>();
  if (q.size() != 4 || t.size() != 3) throw DataError("pose needs 4 quaternion and 3 translation values");
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  if (std::abs(quat.norm() - 1.0) > 1e-9) throw DataError("pose quaternion is not unit-norm");
  return Pose::from_quaternion(quat, Vec3(t[0], t[1], t[2]));
}

std::string sample_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%04zu", index);
  return buf;
}

std::vector<double> parse_triple(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("--") + what + " expects three comma-separated numbers");
    }
  }
  if (v.size() != 3) throw ConfigError(std::string("--") + what + " expects three values a,b,c");
  return v;
}

std::size_t as_factor(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw ConfigError(std::string("--") + what + " factors must be integers >= 1");
  }
  return static_cast<std::size_t>(v);
}

// ---------------------------------------------------------------------------
// Depth maps and images on disk

io::Tensor image_tensor(const AcousticImage& img) {
  return io::tensor_from_raster(img.intensity, "range", "azimuth");
}

AcousticImage load_image(const Manifest& m, const fs::path& path) {
  AcousticImage img{m.intrinsics, io::raster_from_tensor(io::read_tensor(m.root / path))};
  if (img.intensity.rows() != m.intrinsics.range_bins ||
      img.intensity.cols() != m.intrinsics.azimuth_bins) {
    throw DataError(path.string() + ": image dimensions do not match the intrinsics");
  }
  return img;
}

FrontDepthMap depth_from_raster(const SonarIntrinsics& k, Raster<double> r) {
  FrontDepthMap d = FrontDepthMap::filled(k, r.rows(), r.cols(), 0.0);
  d.depth = std::move(r);
  return d;
}

// ---------------------------------------------------------------------------
// Reports

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};

// Population standard deviation over the finite values.
Stat mean_std(const std::vector<double>& values) {
  Stat s;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      s.mean += v;
      ++n;
    }
  }
  if (n == 0) return {std::nan(""), std::nan("")};
  s.mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) var += (v - s.mean) * (v - s.mean);
  }
  s.std = std::sqrt(var / static_cast<double>(n));
  return s;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string format_cell(double v) {
  if (!std::isfinite(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string text_table(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << r[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << r[c];
      }
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

// ---------------------------------------------------------------------------
// Sample selection and parallel execution

std::vector<const ManifestSample*> select_samples(const Manifest& m, const std::string& id,
                                                  bool all) {
  if (all == !id.empty()) throw ConfigError("pass exactly one of --sample ID or --all");
  std::vector<const ManifestSample*> out;
  if (all) {
    for (const auto& s : m.samples) out.push_back(&s);
  } else {
    out.push_back(&m.sample(id));
  }
  return out;
}

// Runs fn over samples on a bounded pool. Failures are reported per sample and
// the most severe exit code is returned.
template <typename Fn>
int for_each_sample(const std::vector<const ManifestSample*>& samples, unsigned threads,
                    std::ostream& err, Fn&& fn) {
  std::vector<int> codes(samples.size(), kExitOk);
  std::vector<std::string> messages(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    try {
      fn(*samples[i]);
    } catch (const ConfigError& e) {
      codes[i] = kExitConfig;
      messages[i] = e.what();
    } catch (const IoError& e) {
      codes[i] = kExitIo;
      messages[i] = e.what();
    } catch (const std::exception& e) {
      codes[i] = kExitData;
      messages[i] = e.what();
    }
  });
  int code = kExitOk;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (codes[i] != kExitOk) {
      err << samples[i]->id << ": " << messages[i] << '\n';
      if (code == kExitOk || codes[i] < code) code = codes[i];
    }
  }
  return code;
}

Json params_to_json(const ReconstructParams& p, std::size_t sources) {
  return Json{{"feature_mode", to_string(p.feature_mode)},
              {"downsample", p.downsample},
              {"planes", p.planes},
              {"sigma", {p.sigma.range, p.sigma.elevation, p.sigma.azimuth}},
              {"tau", p.tau},
              {"temperature_scale", p.temperature_scale},
              {"localize", p.localize},
              {"elevation_width", p.elevation_width},
              {"upsample", {p.upsample.range, p.upsample.elevation, p.upsample.azimuth}},
              {"signal_floor", p.signal_floor},
              {"min_peak_score", p.min_peak_score},
              {"warp", p.warp},
              {"sources", sources}};
}

std::vector<AcousticImage> first_n(std::vector<AcousticImage> v, std::size_t n) {
  if (n != 0 && n < v.size()) v.resize(n);
  return v;
}

std::vector<Pose> first_n(std::vector<Pose> v, std::size_t n) {
  if (n != 0 && n < v.size()) v.resize(n);
  return v;
}

// ---------------------------------------------------------------------------
// Commands

struct CommonOptions {
  std::string manifest;
  std::string out;
  std::string sample;
  bool all = false;
  unsigned threads = 0;
  std::size_t sources = 0;
};

int cmd_gen(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed, unsigned threads, std::ostream& out) {
  GenConfig config = parse_gen_config(io::read_file(config_path));
  if (seed) config.seed = *seed;
  const Manifest m = generate_dataset(config, out_dir, threads);
  out << "wrote " << m.samples.size() << " samples to " << (fs::path(out_dir) / "manifest.json").string()
      << '\n';
  return kExitOk;
}

int cmd_reconstruct(const CommonOptions& o, const ReconstructParams& params, std::ostream& out,
                    std::ostream& err) {
  const Manifest m = load_manifest(o.manifest);
  const auto samples = select_samples(m, o.sample, o.all);
  const fs::path out_dir = o.out;
  ReconstructParams inner = params;
  inner.threads = samples.size() > 1 ? 1 : o.threads;
  const int code = for_each_sample(samples, samples.size() > 1 ? o.threads : 1, err,
                                   [&](const ManifestSample& s) {
    const auto start = std::chrono::steady_clock::now();
    const LoadedSample data = load_sample(m, s);
    const auto sources = first_n(data.sources, o.sources);
    const auto poses = first_n(data.relative_poses, o.sources);
    const Reconstruction r = reconstruct(data.reference, sources, poses,
                                         data.ground_truth.elevation, data.ground_truth.azimuth,
                                         inner);
    // The cloud is built from the float depths actually written, so it agrees
    // with whatever is later read back from depth.snr.
    const io::Tensor tensor = io::tensor_from_raster(r.depth.depth, "elevation", "azimuth");
    FrontDepthMap stored = r.depth;
    stored.depth = io::raster_from_tensor(tensor);
    const PointCloud cloud = depth_map_to_point_cloud(stored, make_mask(stored));
    const fs::path dir = out_dir / s.id;
    io::write_tensor(dir / "depth.snr", tensor);
    io::write_ply(dir / "cloud.ply", cloud);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json meta{{"sample", s.id},
              {"params", params_to_json(params, sources.size())},
              {"tau", r.tau},
              {"points", cloud.size()},
              {"seconds", seconds}};
    io::write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
  });
  if (code == kExitOk) out << "reconstructed " << samples.size() << " samples into " << o.out << '\n';
  return code;
}

int cmd_eval(const CommonOptions& o, const std::string& estimates, std::ostream& out,
             std::ostream& err) {
  const Manifest m = load_manifest(o.manifest);
  const fs::path est_dir = fs::absolute(estimates);
  std::vector<std::string> missing;
  std::vector<const ManifestSample*> present;
  for (const auto& s : m.samples) {
    if (fs::exists(est_dir / s.id / "depth.snr")) {
      present.push_back(&s);
    } else {
      missing.push_back(s.id);
    }
  }
  const double nan = std::nan("");
  std::vector<DepthMetrics> metrics(present.size(), DepthMetrics{nan, nan, 0, 0});
  int code = for_each_sample(present, o.threads, err, [&](const ManifestSample& s) {
    const FrontDepthMap gt = load_depth(m, s.gt_depth);
    const FrontDepthMap est = load_depth(m, est_dir / s.id / "depth.snr");
    if (est.rows() != gt.rows() || est.cols() != gt.cols()) {
      throw DataError(s.id + ": estimate and ground-truth depth maps differ in shape");
    }
    const auto slot = std::find(present.begin(), present.end(), &s) - present.begin();
    metrics[static_cast<std::size_t>(slot)] = evaluate_depth(est, gt, 1);
  });

  Json per_sample = Json::array();
  std::vector<double> maes;
  std::vector<double> cds;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < present.size(); ++i) {
    const DepthMetrics& d = metrics[i];
    maes.push_back(d.mae);
    cds.push_back(d.chamfer);
    per_sample.push_back(Json{{"id", present[i]->id},
                              {"mae", number_or_null(d.mae)},
                              {"chamfer", number_or_null(d.chamfer)},
                              {"estimate_points", d.estimate_points},
                              {"truth_points", d.truth_points}});
    rows.push_back({present[i]->id, format_cell(d.mae), format_cell(d.chamfer)});
  }
  const Stat mae_stat = mean_std(maes);
  const Stat cd_stat = mean_std(cds);
  rows.push_back({"mean", format_cell(mae_stat.mean), format_cell(cd_stat.mean)});
  rows.push_back({"std", format_cell(mae_stat.std), format_cell(cd_stat.std)});

  Json report{{"manifest", fs::path(o.manifest).filename().string()},
              {"count", present.size()},
              {"missing", missing},
              {"mae_scale", kMaeScale},
              {"chamfer_scale", kChamferScale},
              {"aggregate",
               {{"mae", {{"mean", number_or_null(mae_stat.mean)}, {"std", number_or_null(mae_stat.std)}}},
                {"chamfer",
                 {{"mean", number_or_null(cd_stat.mean)}, {"std", number_or_null(cd_stat.std)}}}}},
              {"samples", per_sample}};
  const std::string table = text_table({"sample", "MAE", "CD"}, rows);
  const fs::path report_dir = o.out.empty() ? est_dir : fs::path(o.out);
  io::write_file_atomic(report_dir / "report.json", report.dump(2) + "\n");
  io::write_file_atomic(report_dir / "report.txt", table);
  out << table;
  if (!missing.empty()) {
    err << "missing estimates for " << missing.size() << " samples:";
    for (const auto& id : missing) err << ' ' << id;
    err << '\n';
    if (code == kExitOk) code = kExitData;
  }
  return code;
}

int cmd_baseline(const CommonOptions& o, const BaselineParams& params, std::ostream& out,
                 std::ostream& err) {
  const Manifest m = load_manifest(o.manifest);
  const auto samples = select_samples(m, o.sample, o.all);
  const fs::path out_dir = o.out;
  std::vector<double> cds(samples.size(), std::nan(""));
  BaselineParams inner = params;
  inner.threads = samples.size() > 1 ? 1 : o.threads;
  const int code = for_each_sample(samples, samples.size() > 1 ? o.threads : 1, err,
                                   [&](const ManifestSample& s) {
    const LoadedSample data = load_sample(m, s);
    const auto sources = first_n(data.sources, o.sources);
    const auto poses = first_n(data.relative_poses, o.sources);
    const PointCloud cloud = baseline_reconstruct(data.reference, sources, poses, inner);
    io::write_ply(out_dir / s.id / "baseline.ply", cloud);
    const auto slot = std::find(samples.begin(), samples.end(), &s) - samples.begin();
    cds[static_cast<std::size_t>(slot)] = cloud_chamfer(cloud, data.ground_truth, 1);
  });
  Json per_sample = Json::array();
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    per_sample.push_back(Json{{"id", samples[i]->id}, {"chamfer", number_or_null(cds[i])}});
    rows.push_back({samples[i]->id, format_cell(cds[i])});
  }
  const Stat cd = mean_std(cds);
  rows.push_back({"mean", format_cell(cd.mean)});
  rows.push_back({"std", format_cell(cd.std)});
  Json report{{"manifest", fs::path(o.manifest).filename().string()},
              {"count", samples.size()},
              {"params",
               {{"cell_size", params.cell_size}, {"surface_threshold", params.surface_threshold}}},
              {"chamfer_scale", kChamferScale},
              {"aggregate",
               {{"chamfer", {{"mean", number_or_null(cd.mean)}, {"std", number_or_null(cd.std)}}}}},
              {"samples", per_sample}};
  const std::string table = text_table({"sample", "CD"}, rows);
  io::write_file_atomic(out_dir / "baseline_report.json", report.dump(2) + "\n");
  io::write_file_atomic(out_dir / "baseline_report.txt", table);
  out << table;
  return code;
}

int cmd_render(const std::string& input, const std::string& output, std::ostream& out) {
  const io::Tensor t = io::read_tensor(input);
  if (t.dims.size() != 2) throw DataError("render expects a rank-2 tensor");
  io::write_pgm16(output, io::raster_from_tensor(t));
  out << "wrote " << output << '\n';
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config, manifest and dataset

GenConfig parse_gen_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"family", "count", "seed", "intrinsics", "roll_delta_deg", "source_rolls_deg",
              "noise", "render", "placement", "terrain", "sphere", "mesh", "reflectivity"});
  GenConfig c;
  if (j.contains("family")) c.family = parse_scene_family(j.at("family").get<std::string>());
  try {
    read_opt(j, "count", c.count);
    read_opt(j, "seed", c.seed);
    if (j.contains("intrinsics")) c.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    if (j.contains("roll_delta_deg")) c.roll_deltas = {deg2rad(j.at("roll_delta_deg").get<double>())};
    if (j.contains("source_rolls_deg")) {
      c.roll_deltas.clear();
      for (double d : j.at("source_rolls_deg").get<std::vector<double>>()) c.roll_deltas.push_back(deg2rad(d));
    }
    if (j.contains("noise")) {
      const Json& n = j.at("noise");
      check_keys(n, "noise", {"speckle_scale", "additive_sigma"});
      read_opt(n, "speckle_scale", c.noise.speckle_scale);
      read_opt(n, "additive_sigma", c.noise.additive_sigma);
    }
    if (j.contains("render")) {
      const Json& r = j.at("render");
      check_keys(r, "render", {"rays_per_elevation", "depth_rows", "lambertian", "spherical_spreading"});
      read_opt(r, "rays_per_elevation", c.render.rays_per_elevation);
      read_opt(r, "depth_rows", c.render.depth_rows);
      read_opt(r, "lambertian", c.render.lambertian);
      read_opt(r, "spherical_spreading", c.render.spherical_spreading);
    }
    if (j.contains("placement")) {
      const Json& p = j.at("placement");
      check_keys(p, "placement", {"height", "pitch_deg", "placement_radius"});
      read_opt(p, "height", c.placement.height);
      read_opt(p, "pitch_deg", c.placement.pitch_deg);
      read_opt(p, "placement_radius", c.placement.placement_radius);
    }
    if (j.contains("terrain")) {
      const Json& t = j.at("terrain");
      check_keys(t, "terrain", {"octaves", "amplitude", "extent", "samples"});
      read_opt(t, "octaves", c.terrain.octaves);
      read_opt(t, "amplitude", c.terrain.amplitude);
      read_opt(t, "extent", c.terrain.extent);
      read_opt(t, "samples", c.terrain.samples);
    }
    if (j.contains("sphere")) {
      const Json& s = j.at("sphere");
      check_keys(s, "sphere", {"radius_min", "radius_max"});
      read_opt(s, "radius_min", c.sphere.radius_min);
      read_opt(s, "radius_max", c.sphere.radius_max);
    }
    if (j.contains("mesh")) {
      const Json& m = j.at("mesh");
      check_keys(m, "mesh", {"blocks", "extent"});
      read_opt(m, "blocks", c.mesh.blocks);
      read_opt(m, "extent", c.mesh.extent);
    }
    read_opt(j, "reflectivity", c.reflectivity);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (c.noise.speckle_scale < 0.0 || c.noise.additive_sigma < 0.0) {
    throw ConfigError("noise scales must be >= 0");
  }
  if (!(c.reflectivity > 0.0 && c.reflectivity <= 1.0)) {
    throw ConfigError("reflectivity must be in (0, 1]");
  }
  return c;
}

std::vector<Pose> ManifestSample::relative_poses() const {
  std::vector<Pose> out;
  for (const auto& v : sources) out.push_back(v.pose.inverse() * reference.pose);
  return out;
}

const ManifestSample& Manifest::sample(std::string_view id) const {
  for (const auto& s : samples) {
    if (s.id == id) return s;
  }
  throw ConfigError("no sample '" + std::string(id) + "' in the manifest");
}

Manifest load_manifest(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(io::read_file(path));
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": not valid JSON: " + e.what());
  }
  Manifest m;
  m.root = path.parent_path();
  try {
    m.generator_version = j.at("generator_version").get<std::string>();
    m.family = parse_scene_family(j.at("family").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    m.depth_rows = j.at("depth_rows").get<std::size_t>();
    std::set<std::string> ids;
    for (const Json& s : j.at("samples")) {
      ManifestSample ms;
      ms.id = s.at("id").get<std::string>();
      if (!ids.insert(ms.id).second) throw DataError("duplicate sample id " + ms.id);
      ms.seed = s.at("seed").get<std::uint64_t>();
      ms.reference = {s.at("reference").at("image").get<std::string>(),
                      pose_from_json(s.at("reference").at("pose"))};
      for (const Json& v : s.at("sources")) {
        ms.sources.push_back({v.at("image").get<std::string>(), pose_from_json(v.at("pose"))});
      }
      ms.gt_depth = s.at("gt_depth").get<std::string>();
      ms.mask = s.at("mask").get<std::string>();
      m.samples.push_back(std::move(ms));
    }
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": malformed manifest: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  for (const auto& s : m.samples) {
    std::vector<fs::path> files{s.reference.image, s.gt_depth, s.mask};
    for (const auto& v : s.sources) files.push_back(v.image);
    for (const auto& f : files) {
      if (!fs::exists(m.root / f)) throw IoError("manifest references missing file " + (m.root / f).string());
    }
  }
  return m;
}

FrontDepthMap load_depth(const Manifest& m, const fs::path& path) {
  const fs::path full = path.is_absolute() ? path : m.root / path;
  return depth_from_raster(m.intrinsics, io::raster_from_tensor(io::read_tensor(full)));
}

LoadedSample load_sample(const Manifest& m, const ManifestSample& s) {
  LoadedSample out;
  out.reference = load_image(m, s.reference.image);
  for (const auto& v : s.sources) out.sources.push_back(load_image(m, v.image));
  out.relative_poses = s.relative_poses();
  out.ground_truth = load_depth(m, s.gt_depth);
  if (out.ground_truth.rows() != m.depth_rows ||
      out.ground_truth.cols() != m.intrinsics.azimuth_bins) {
    throw DataError(s.id + ": ground-truth depth dimensions do not match the manifest");
  }
  return out;
}

Manifest generate_dataset(const GenConfig& config, const fs::path& out_dir, unsigned threads) {
  config.intrinsics.validate();
  Manifest m;
  m.root = out_dir;
  m.generator_version = std::string(kGeneratorVersion);
  m.family = config.family;
  m.seed = config.seed;
  m.intrinsics = config.intrinsics;
  m.depth_rows = config.render.depth_rows ? config.render.depth_rows
                                          : config.intrinsics.elevation_planes;
  m.samples.resize(config.count);
  GenConfig inner = config;
  inner.render.threads = config.count > 1 ? 1 : threads;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  parallel_for(config.count, config.count > 1 ? threads : 1, [&](std::size_t i) {
    const SampleSpec spec = make_sample(inner, i);
    const ViewSet views = render_sample(inner, spec);
    ManifestSample& s = m.samples[i];
    s.id = sample_id(i);
    s.seed = spec.seed;
    const fs::path dir = s.id;
    s.reference = {dir / "ref.snr", views.world_poses[0]};
    io::write_tensor(out_dir / s.reference.image, image_tensor(views.reference));
    for (std::size_t v = 0; v < views.sources.size(); ++v) {
      ManifestView mv{dir / ("src_" + std::to_string(v + 1) + ".snr"), views.world_poses[v + 1]};
      io::write_tensor(out_dir / mv.image, image_tensor(views.sources[v]));
      s.sources.push_back(std::move(mv));
    }
    s.gt_depth = dir / "gt_depth.snr";
    s.mask = dir / "mask.snr";
    io::write_tensor(out_dir / s.gt_depth,
                     io::tensor_from_raster(views.ground_truth.depth, "elevation", "azimuth"));
    const DepthMask mask = make_mask(views.ground_truth);
    Raster<double> mask_values(mask.mask.rows(), mask.mask.cols());
    for (std::size_t x = 0; x < mask_values.size(); ++x) mask_values.storage()[x] = mask.mask.storage()[x];
    io::write_tensor(out_dir / s.mask, io::tensor_from_raster(mask_values, "elevation", "azimuth"));
  });

  Json samples = Json::array();
  for (const auto& s : m.samples) {
    Json sources = Json::array();
    for (std::size_t v = 0; v < s.sources.size(); ++v) {
      sources.push_back(Json{{"image", s.sources[v].image.generic_string()},
                             {"roll_delta_deg", rad2deg(config.roll_deltas[v])},
                             {"pose", pose_to_json(s.sources[v].pose)}});
    }
    samples.push_back(Json{{"id", s.id},
                           {"seed", s.seed},
                           {"reference",
                            {{"image", s.reference.image.generic_string()},
                             {"pose", pose_to_json(s.reference.pose)}}},
                           {"sources", sources},
                           {"gt_depth", s.gt_depth.generic_string()},
                           {"mask", s.mask.generic_string()}});
  }
  Json manifest{{"generator_version", m.generator_version},
                {"family", to_string(m.family)},
                {"seed", m.seed},
                {"count", config.count},
                {"intrinsics", intrinsics_to_json(m.intrinsics)},
                {"depth_rows", m.depth_rows},
                {"noise",
                 {{"speckle_scale", config.noise.speckle_scale},
                  {"additive_sigma", config.noise.additive_sigma}}},
                {"rays_per_elevation", config.render.rays_per_elevation
                                           ? config.render.rays_per_elevation
                                           : 4 * m.depth_rows},
                {"conventions",
                 "x forward, y toward +azimuth, z toward +elevation; azimuth 0 on the acoustic "
                 "axis; poses map sensor to world; grids sample both extents"},
                {"samples", samples}};
  io::write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return m;
}

// ---------------------------------------------------------------------------
// Command line

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sonar elevation plane-sweep reconstruction", "sonarmvs"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string estimates;
  std::string feature_mode = "patch-stats";
  std::string sigma_text;
  std::string upsample_text;
  std::string input;
  ReconstructParams params;
  BaselineParams baseline;
  bool no_warp = false;
  bool no_localize = false;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset from a config file");
  gen->add_option("--config", config_path, "Generation config (JSON)")->required();
  gen->add_option("--out", common.out, "Output directory")->required();
  gen->add_option("--seed", seed, "Override the config seed");
  gen->add_option("--threads", common.threads, "Worker threads (0 = all cores)");

  auto add_selection = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", common.manifest, "Dataset manifest")->required();
    cmd->add_option("--out", common.out, "Output directory")->required();
    cmd->add_option("--sample", common.sample, "Sample id");
    cmd->add_flag("--all", common.all, "Process every sample");
    cmd->add_option("--sources", common.sources, "Use only the first N source views (0 = all)");
    cmd->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
  };

  auto* rec = app.add_subcommand("reconstruct", "Estimate front depth by elevation plane sweeping");
  add_selection(rec);
  rec->add_option("--feature-mode", feature_mode, "intensity | patch-stats | gradient");
  rec->add_option("--downsample", params.downsample, "Feature downsample factor");
  rec->add_option("--planes", params.planes, "Elevation planes (0 = from intrinsics)");
  rec->add_option("--sigma", sigma_text, "Smoothing sigma in bins: range,elevation,azimuth");
  rec->add_option("--tau", params.tau, "Softmax temperature (0 = automatic)");
  rec->add_option("--upsample", upsample_text, "Upsample factors: range,elevation,azimuth");
  rec->add_option("--elevation-width", params.elevation_width, "Localized score width, radians");
  rec->add_option("--signal-floor", params.signal_floor, "Relative intensity floor");
  rec->add_flag("--no-warp", no_warp, "Stack source features unwarped (ablation)");
  rec->add_flag("--no-localize", no_localize, "Use the plain negated-cost score");

  auto* ev = app.add_subcommand("eval", "Score estimates against ground truth");
  ev->add_option("--manifest", common.manifest, "Dataset manifest")->required();
  ev->add_option("--estimates", estimates, "Directory written by reconstruct")->required();
  ev->add_option("--out", common.out, "Report directory (default: the estimates directory)");
  ev->add_option("--threads", common.threads, "Worker threads (0 = all cores)");

  auto* base = app.add_subcommand("baseline", "Occupancy-mapping baseline");
  add_selection(base);
  base->add_option("--cell-size", baseline.cell_size, "Grid cell size in meters (0 = auto)");
  base->add_option("--threshold", baseline.surface_threshold, "Surface log-odds threshold");

  auto* ren = app.add_subcommand("render", "Render a depth tensor as a 16-bit PGM heatmap");
  ren->add_option("--input", input, "Rank-2 tensor file")->required();
  ren->add_option("--out", common.out, "Output PGM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (common.threads != 0) set_default_threads(common.threads);
    if (*gen) return cmd_gen(config_path, common.out, seed, common.threads, out);
    if (*rec || *base) {
      params.feature_mode = parse_feature_mode(feature_mode);
      if (!sigma_text.empty()) {
        const auto s = parse_triple(sigma_text, "sigma");
        params.sigma = {s[0], s[1], s[2]};
        if (s[0] < 0 || s[1] < 0 || s[2] < 0) throw ConfigError("--sigma values must be >= 0");
      }
      if (!upsample_text.empty()) {
        const auto u = parse_triple(upsample_text, "upsample");
        params.upsample = {as_factor(u[0], "upsample"), as_factor(u[1], "upsample"),
                           as_factor(u[2], "upsample")};
      }
      if (params.tau < 0) throw ConfigError("--tau must be > 0 (or 0 for automatic)");
      params.warp = !no_warp;
      params.localize = !no_localize;
      if (*rec) return cmd_reconstruct(common, params, out, err);
      return cmd_baseline(common, baseline, out, err);
    }
    if (*ev) return cmd_eval(common, estimates, out, err);
    if (*ren) return cmd_render(input, common.out, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace sonarmvs::cli
