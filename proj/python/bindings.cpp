#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "sonarmvs/cli.hpp"
#include "sonarmvs/dataset.hpp"
#include "sonarmvs/errors.hpp"
#include "sonarmvs/io.hpp"
#include "sonarmvs/pipeline.hpp"
#include "sonarmvs/simulator.hpp"

namespace py = pybind11;
using namespace sonarmvs;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const Raster<double>& r) {
  Array out({r.rows(), r.cols()});
  std::copy(r.values().begin(), r.values().end(), out.mutable_data());
  return out;
}

Raster<double> to_raster(const Array& a) {
  if (a.ndim() != 2) throw DataError("expected a 2-D array");
  Raster<double> r(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), r.storage().begin());
  return r;
}

AcousticImage to_image(const Array& a, const SonarIntrinsics& k) {
  AcousticImage img{k, to_raster(a)};
  if (img.intensity.rows() != k.range_bins || img.intensity.cols() != k.azimuth_bins) {
    throw DataError("image shape does not match the intrinsics (range_bins, azimuth_bins)");
  }
  return img;
}

std::vector<AcousticImage> to_images(const std::vector<Array>& v, const SonarIntrinsics& k) {
  std::vector<AcousticImage> out;
  for (const auto& a : v) out.push_back(to_image(a, k));
  return out;
}

// Depth rows/cols span the full elevation and azimuth scope.
FrontDepthMap to_depth(const Array& a, const SonarIntrinsics& k) {
  FrontDepthMap d = FrontDepthMap::filled(k, static_cast<std::size_t>(a.shape(0)),
                                          static_cast<std::size_t>(a.shape(1)), 0.0);
  d.depth = to_raster(a);
  return d;
}

py::array_t<double> cloud_to_array(const PointCloud& c) {
  py::array_t<double> out({c.size(), std::size_t{3}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = c.points[i][j];
  }
  return out;
}

PointCloud array_to_cloud(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw DataError("expected an (N, 3) array");
  PointCloud c;
  auto m = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) c.points.emplace_back(m(i, 0), m(i, 1), m(i, 2));
  return c;
}

py::dict views_to_dict(const ViewSet& v) {
  py::list sources;
  for (const auto& s : v.sources) sources.append(to_array(s.intensity));
  py::dict d;
  d["reference"] = to_array(v.reference.intensity);
  d["sources"] = sources;
  d["relative_poses"] = v.relative_poses;
  d["world_poses"] = v.world_poses;
  d["ground_truth"] = to_array(v.ground_truth.depth);
  d["intrinsics"] = v.reference.intrinsics;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sonarmvs, m) {
  m.doc() = "Plane-sweep front-depth reconstruction for forward-looking sonar";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  py::class_<SonarIntrinsics>(m, "Intrinsics")
      .def(py::init([] { return SonarIntrinsics::defaults(); }))
      .def_readwrite("range_min", &SonarIntrinsics::range_min)
      .def_readwrite("range_max", &SonarIntrinsics::range_max)
      .def_readwrite("azimuth_min", &SonarIntrinsics::azimuth_min)
      .def_readwrite("azimuth_max", &SonarIntrinsics::azimuth_max)
      .def_readwrite("elevation_min", &SonarIntrinsics::elevation_min)
      .def_readwrite("elevation_max", &SonarIntrinsics::elevation_max)
      .def_readwrite("range_bins", &SonarIntrinsics::range_bins)
      .def_readwrite("azimuth_bins", &SonarIntrinsics::azimuth_bins)
      .def_readwrite("elevation_planes", &SonarIntrinsics::elevation_planes)
      .def("validate", &SonarIntrinsics::validate)
      .def("__eq__", [](const SonarIntrinsics& a, const SonarIntrinsics& b) { return a == b; })
      .def("__repr__", [](const SonarIntrinsics& k) {
        std::ostringstream s;
        s << "Intrinsics(r=[" << k.range_min << ", " << k.range_max << "], " << k.range_bins << "x"
          << k.azimuth_bins << ", N=" << k.elevation_planes << ")";
        return s.str();
      });

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](const Mat3& r, const Vec3& t) { return Pose(r, t); }), py::arg("rotation"),
           py::arg("translation"))
      .def_static("roll", &Pose::roll)
      .def_static("pitch", &Pose::pitch)
      .def_static("yaw", &Pose::yaw)
      .def_static("translation_only", [](const Vec3& t) { return Pose::translation(t); })
      .def_static("from_quaternion",
                  [](const std::array<double, 4>& wxyz, const Vec3& t) {
                    return Pose::from_quaternion(
                        Eigen::Quaterniond(wxyz[0], wxyz[1], wxyz[2], wxyz[3]), t);
                  })
      .def_property_readonly("rotation", [](const Pose& p) { return Mat3(p.rotation()); })
      .def_property_readonly("translation", [](const Pose& p) { return Vec3(p.translation()); })
      .def("quaternion",
           [](const Pose& p) {
             const auto q = p.quaternion();
             return std::array<double, 4>{q.w(), q.x(), q.y(), q.z()};
           })
      .def("inverse", &Pose::inverse)
      .def("apply", [](const Pose& p, const Vec3& v) { return Vec3(p.apply(v)); })
      .def("__mul__", [](const Pose& a, const Pose& b) { return a * b; });

  m.def("spherical_to_euclidean",
        [](double r, double theta, double phi) { return spherical_to_euclidean({r, theta, phi}); },
        py::arg("range"), py::arg("azimuth"), py::arg("elevation"));
  m.def("euclidean_to_spherical", [](const Vec3& p) {
    const auto s = euclidean_to_spherical(p);
    return py::make_tuple(s.point.range, s.point.azimuth, s.point.elevation);
  });

  py::class_<Scene>(m, "Scene")
      .def_static("sphere",
                  [](const Vec3& center, double radius, double reflectivity) {
                    Scene s;
                    s.geometry = SphereShape{center, radius};
                    s.reflectivity = reflectivity;
                    return s;
                  },
                  py::arg("center"), py::arg("radius"), py::arg("reflectivity") = 1.0)
      .def_static("terrain", &make_terrain, py::arg("seed"), py::arg("octaves") = 7,
                  py::arg("amplitude") = 0.3, py::arg("extent") = 8.0, py::arg("samples") = 513)
      .def_static("random_sphere", &make_sphere_scene, py::arg("seed"), py::arg("intrinsics"),
                  py::arg("radius_min") = 0.1, py::arg("radius_max") = 0.25)
      .def_static("blocks", &make_block_scene, py::arg("seed"), py::arg("blocks") = 8,
                  py::arg("extent") = 4.0);

  m.def(
      "raycast",
      [](const Scene& scene, const Pose& pose, const SonarIntrinsics& k, std::size_t rays,
         std::size_t depth_rows) {
        RenderOptions o;
        o.rays_per_elevation = rays;
        o.depth_rows = depth_rows;
        const RenderResult r = raycast(scene, pose, k, o);
        return py::make_tuple(to_array(r.image.intensity), to_array(r.depth.depth));
      },
      py::arg("scene"), py::arg("pose"), py::arg("intrinsics"), py::arg("rays_per_elevation") = 256,
      py::arg("depth_rows") = RenderOptions{}.depth_rows,
      "Renders (intensity H x W, front depth E x W) from `pose` (sensor -> world).");

  m.def(
      "generate_views",
      [](const Scene& scene, const Pose& base_pose, const std::vector<double>& roll_deltas_deg,
         const SonarIntrinsics& k, double speckle, double additive, std::uint64_t seed,
         std::size_t rays) {
        std::vector<double> deltas;
        for (double d : roll_deltas_deg) deltas.push_back(deg2rad(d));
        RenderOptions o;
        o.rays_per_elevation = rays;
        return views_to_dict(generate_views(scene, base_pose, deltas, k, {speckle, additive, seed}, o));
      },
      py::arg("scene"), py::arg("base_pose"), py::arg("roll_deltas_deg"), py::arg("intrinsics"),
      py::arg("speckle_scale") = 0.1, py::arg("additive_sigma") = 0.0, py::arg("seed") = 0,
      py::arg("rays_per_elevation") = 256);

  m.def(
      "generate_sample",
      [](const std::string& config_json, std::size_t index) {
        const GenConfig c = cli::parse_gen_config(config_json);
        return views_to_dict(render_sample(c, make_sample(c, index)));
      },
      py::arg("config_json"), py::arg("index"),
      "Renders sample `index` of a generation config given as JSON text.");

  py::class_<ReconstructParams>(m, "ReconstructParams")
      .def(py::init<>())
      .def_property(
          "feature_mode", [](const ReconstructParams& p) { return to_string(p.feature_mode); },
          [](ReconstructParams& p, const std::string& s) { p.feature_mode = parse_feature_mode(s); })
      .def_readwrite("downsample", &ReconstructParams::downsample)
      .def_readwrite("planes", &ReconstructParams::planes)
      .def_property(
          "sigma",
          [](const ReconstructParams& p) {
            return std::array<double, 3>{p.sigma.range, p.sigma.elevation, p.sigma.azimuth};
          },
          [](ReconstructParams& p, const std::array<double, 3>& s) { p.sigma = {s[0], s[1], s[2]}; })
      .def_readwrite("tau", &ReconstructParams::tau)
      .def_readwrite("temperature_scale", &ReconstructParams::temperature_scale)
      .def_readwrite("localize", &ReconstructParams::localize)
      .def_readwrite("elevation_width", &ReconstructParams::elevation_width)
      .def_property(
          "upsample",
          [](const ReconstructParams& p) {
            return std::array<std::size_t, 3>{p.upsample.range, p.upsample.elevation,
                                              p.upsample.azimuth};
          },
          [](ReconstructParams& p, const std::array<std::size_t, 3>& u) {
            p.upsample = {u[0], u[1], u[2]};
          })
      .def_readwrite("signal_floor", &ReconstructParams::signal_floor)
      .def_readwrite("min_peak_score", &ReconstructParams::min_peak_score)
      .def_readwrite("warp", &ReconstructParams::warp)
      .def_readwrite("threads", &ReconstructParams::threads);

  m.def(
      "reconstruct",
      [](const Array& reference, const std::vector<Array>& sources, const std::vector<Pose>& poses,
         const SonarIntrinsics& k, std::size_t depth_rows, const ReconstructParams& params) {
        const AcousticImage ref = to_image(reference, k);
        const std::vector<AcousticImage> src = to_images(sources, k);
        const Axis el{k.elevation_min, k.elevation_max, depth_rows ? depth_rows : k.elevation_planes};
        Reconstruction r;
        {
          py::gil_scoped_release release;
          r = reconstruct(ref, src, poses, el, k.azimuth_axis(), params);
        }
        return py::make_tuple(to_array(r.depth.depth), r.tau);
      },
      py::arg("reference"), py::arg("sources"), py::arg("relative_poses"), py::arg("intrinsics"),
      py::arg("depth_rows") = RenderOptions{}.depth_rows,
      py::arg("params") = ReconstructParams{},
      "Front depth (depth_rows x W) from a reference image and posed sources. "
      "Returns (depth, tau).");

  m.def(
      "baseline",
      [](const Array& reference, const std::vector<Array>& sources, const std::vector<Pose>& poses,
         const SonarIntrinsics& k, double cell_size, double threshold) {
        BaselineParams p;
        p.cell_size = cell_size;
        p.surface_threshold = threshold;
        return cloud_to_array(
            baseline_reconstruct(to_image(reference, k), to_images(sources, k), poses, p));
      },
      py::arg("reference"), py::arg("sources"), py::arg("relative_poses"), py::arg("intrinsics"),
      py::arg("cell_size") = 0.0, py::arg("threshold") = 0.5,
      "Occupancy-mapping baseline; returns surface points (N x 3) in the reference frame.");

  m.def(
      "depth_to_cloud",
      [](const Array& depth, const SonarIntrinsics& k) {
        const FrontDepthMap d = to_depth(depth, k);
        return cloud_to_array(depth_map_to_point_cloud(d, make_mask(d)));
      },
      py::arg("depth"), py::arg("intrinsics"));

  m.def(
      "evaluate",
      [](const Array& estimate, const Array& truth, const SonarIntrinsics& k) {
        const DepthMetrics d = evaluate_depth(to_depth(estimate, k), to_depth(truth, k));
        py::dict out;
        out["mae"] = d.mae;
        out["chamfer"] = d.chamfer;
        out["estimate_points"] = d.estimate_points;
        out["truth_points"] = d.truth_points;
        return out;
      },
      py::arg("estimate"), py::arg("truth"), py::arg("intrinsics"));

  m.def(
      "chamfer",
      [](const Array& a, const Array& b, double gamma, bool brute_force) {
        const PointCloud pa = array_to_cloud(a);
        const PointCloud pb = array_to_cloud(b);
        return brute_force ? chamfer_bruteforce(pa, pb, gamma) : chamfer_fast(pa, pb, gamma);
      },
      py::arg("a"), py::arg("b"), py::arg("gamma") = kChamferScale, py::arg("brute_force") = false);

  m.def(
      "read_tensor",
      [](const std::filesystem::path& p) {
        const io::Tensor t = io::read_tensor(p);
        std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
        py::array_t<float> out(shape);
        std::copy(t.data.begin(), t.data.end(), out.mutable_data());
        return py::make_tuple(out, t.labels);
      },
      py::arg("path"), "Returns (float32 array, dimension labels).");
  m.def(
      "write_tensor",
      [](const std::filesystem::path& p,
         const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
         std::vector<std::string> labels) {
        io::Tensor t;
        for (py::ssize_t i = 0; i < a.ndim(); ++i) t.dims.push_back(static_cast<std::uint64_t>(a.shape(i)));
        if (labels.empty()) labels.resize(t.dims.size());
        t.labels = std::move(labels);
        t.data.assign(a.data(), a.data() + a.size());
        io::write_tensor(p, t);
      },
      py::arg("path"), py::arg("array"), py::arg("labels") = std::vector<std::string>{});
  m.def("read_ply", [](const std::filesystem::path& p) { return cloud_to_array(io::read_ply(p)); });
  m.def("write_ply", [](const std::filesystem::path& p, const Array& a) {
    io::write_ply(p, array_to_cloud(a));
  });

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "sonarmvs");
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in-process; returns (code, stdout, stderr).");
}
