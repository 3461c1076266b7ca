#include "sonarmvs/planesweep.hpp"

#include <algorithm>
#include <cmath>

#include "sonarmvs/errors.hpp"
#include "sonarmvs/parallel.hpp"

namespace sonarmvs {

namespace {

constexpr double kScopeSlack = 1e-9;

Raster<double> box_downsample(const Raster<double>& in, std::size_t f) {
  Raster<double> out(in.rows() / f, in.cols() / f, 0.0);
  const double inv = 1.0 / static_cast<double>(f * f);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      double s = 0.0;
      for (std::size_t dr = 0; dr < f; ++dr) {
        for (std::size_t dc = 0; dc < f; ++dc) s += in(r * f + dr, c * f + dc);
      }
      out(r, c) = s * inv;
    }
  }
  return out;
}

// Axis of a box-downsampled grid: each coarse sample sits at the center of
// its f fine samples.
Axis coarse_axis(const Axis& fine, std::size_t f) {
  const double step = fine.step();
  const double first = fine.first + 0.5 * static_cast<double>(f - 1) * step;
  const std::size_t count = fine.count / f;
  return {first, first + static_cast<double>((count - 1) * f) * step, count};
}

void patch_stats(const Raster<double>& in, Raster<double>& mean, Raster<double>& stddev) {
  const auto rows = static_cast<long>(in.rows());
  const auto cols = static_cast<long>(in.cols());
  mean = Raster<double>(in.rows(), in.cols());
  stddev = Raster<double>(in.rows(), in.cols());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0.0;
      int n = 0;
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long rr = r + dr;
          const long cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          s += in(rr, cc);
          ++n;
        }
      }
      const double m = s / n;
      double v = 0.0;
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long rr = r + dr;
          const long cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          const double d = in(rr, cc) - m;
          v += d * d;
        }
      }
      mean(r, c) = m;
      stddev(r, c) = std::sqrt(v / n);
    }
  }
}

// Central differences in the interior, one-sided at the borders.
void gradients(const Raster<double>& in, Raster<double>& d_range, Raster<double>& d_azimuth) {
  const std::size_t rows = in.rows();
  const std::size_t cols = in.cols();
  d_range = Raster<double>(rows, cols);
  d_azimuth = Raster<double>(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t r0 = r == 0 ? 0 : r - 1;
      const std::size_t r1 = r + 1 == rows ? r : r + 1;
      const std::size_t c0 = c == 0 ? 0 : c - 1;
      const std::size_t c1 = c + 1 == cols ? c : c + 1;
      d_range(r, c) = (in(r1, c) - in(r0, c)) / static_cast<double>(r1 - r0);
      d_azimuth(r, c) = (in(r, c1) - in(r, c0)) / static_cast<double>(c1 - c0);
    }
  }
}

}  // namespace

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "intensity") return FeatureMode::kIntensity;
  if (name == "patch-stats") return FeatureMode::kPatchStats;
  if (name == "gradient") return FeatureMode::kGradient;
  throw ConfigError("unknown feature mode '" + std::string(name) +
                    "' (expected intensity | patch-stats | gradient)");
}

std::string to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kIntensity:
      return "intensity";
    case FeatureMode::kPatchStats:
      return "patch-stats";
    case FeatureMode::kGradient:
      return "gradient";
  }
  return "unknown";
}

FeatureImage extract_features(const AcousticImage& img, FeatureMode mode,
                              std::size_t downsample_factor) {
  const SonarIntrinsics& k = img.intrinsics;
  const std::size_t f = downsample_factor;
  if (f == 0 || k.range_bins % f != 0 || k.azimuth_bins % f != 0) {
    throw ConfigError("downsample factor " + std::to_string(f) + " must divide H=" +
                      std::to_string(k.range_bins) + " and W=" + std::to_string(k.azimuth_bins));
  }
  if (k.range_bins / f < 2 || k.azimuth_bins / f < 2) {
    throw ConfigError("downsample factor leaves fewer than 2 bins");
  }
  FeatureImage out;
  out.downsample_factor = f;
  out.range = coarse_axis(k.range_axis(), f);
  out.azimuth = coarse_axis(k.azimuth_axis(), f);
  out.support = f == 1 ? img.intensity : box_downsample(img.intensity, f);
  switch (mode) {
    case FeatureMode::kIntensity:
      out.channels.push_back(out.support);
      break;
    case FeatureMode::kPatchStats: {
      Raster<double> mean;
      Raster<double> stddev;
      patch_stats(out.support, mean, stddev);
      out.channels.push_back(std::move(mean));
      out.channels.push_back(std::move(stddev));
      break;
    }
    case FeatureMode::kGradient: {
      Raster<double> dr;
      Raster<double> da;
      gradients(out.support, dr, da);
      out.channels.push_back(std::move(dr));
      out.channels.push_back(std::move(da));
      break;
    }
  }
  return out;
}

std::vector<double> elevation_plane_angles(const SonarIntrinsics& k) {
  if (k.elevation_planes < 2) throw ConfigError("elevation plane count must be >= 2");
  std::vector<double> out(k.elevation_planes);
  const double span = k.elevation_max - k.elevation_min;
  const auto denom = static_cast<double>(k.elevation_planes - 1);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = k.elevation_min + static_cast<double>(j) * span / denom;
  }
  return out;
}

WarpedSlice warp_to_plane(const FeatureImage& src, const Pose& ref_to_src, double phi,
                          const SonarIntrinsics& k) {
  const std::size_t rows = src.rows();
  const std::size_t cols = src.cols();
  const std::size_t nch = src.channel_count();
  WarpedSlice out;
  out.channels.assign(nch, Raster<double>(rows, cols, 0.0));
  out.support = Raster<double>(rows, cols, 0.0);
  out.valid = Raster<std::uint8_t>(rows, cols, 0);

  if (ref_to_src.is_exact_identity()) {
    // Projection drops elevation, so every plane of the identity warp is the
    // source raster itself.
    for (std::size_t ch = 0; ch < nch; ++ch) out.channels[ch] = src.channels[ch];
    out.support = src.support;
    out.valid.fill(1);
    return out;
  }

  const Mat3& rot = ref_to_src.rotation();
  const Vec3& trans = ref_to_src.translation();
  const double cos_phi = std::cos(phi);
  const double sin_phi = std::sin(phi);
  const auto max_row = static_cast<double>(rows - 1);
  const auto max_col = static_cast<double>(cols - 1);

  for (std::size_t c = 0; c < cols; ++c) {
    const double theta = src.azimuth.at(static_cast<double>(c));
    const Vec3 unit(cos_phi * std::cos(theta), cos_phi * std::sin(theta), sin_phi);
    const Vec3 dir = rot * unit;
    for (std::size_t i = 0; i < rows; ++i) {
      const double r = src.range.at(static_cast<double>(i));
      const Vec3 p = r * dir + trans;
      const double range = p.norm();
      if (!(range > 0.0)) continue;
      const double rho = std::hypot(p.x(), p.y());
      const double azimuth = std::atan2(p.y(), p.x());
      const double elevation = std::atan2(p.z(), rho);
      if (range < k.range_min - kScopeSlack || range > k.range_max + kScopeSlack ||
          azimuth < k.azimuth_min - kScopeSlack || azimuth > k.azimuth_max + kScopeSlack ||
          elevation < k.elevation_min - kScopeSlack ||
          elevation > k.elevation_max + kScopeSlack) {
        continue;
      }
      const double fr = src.range.index_of(range);
      const double fc = src.azimuth.index_of(azimuth);
      if (fr < -kScopeSlack || fr > max_row + kScopeSlack || fc < -kScopeSlack ||
          fc > max_col + kScopeSlack) {
        continue;
      }
      const double rr = std::clamp(fr, 0.0, max_row);
      const double cc = std::clamp(fc, 0.0, max_col);
      const std::size_t r0 = std::min(static_cast<std::size_t>(rr), rows - 2);
      const std::size_t c0 = std::min(static_cast<std::size_t>(cc), cols - 2);
      const double a = rr - static_cast<double>(r0);
      const double b = cc - static_cast<double>(c0);
      const double w00 = (1 - a) * (1 - b);
      const double w01 = (1 - a) * b;
      const double w10 = a * (1 - b);
      const double w11 = a * b;
      auto sample = [&](const Raster<double>& img) {
        return w00 * img(r0, c0) + w01 * img(r0, c0 + 1) + w10 * img(r0 + 1, c0) +
               w11 * img(r0 + 1, c0 + 1);
      };
      for (std::size_t ch = 0; ch < nch; ++ch) out.channels[ch](i, c) = sample(src.channels[ch]);
      out.support(i, c) = sample(src.support);
      out.valid(i, c) = 1;
    }
  }
  return out;
}

FeatureVolume build_volume(const FeatureImage& frame, const Pose& ref_to_frame,
                           const SonarIntrinsics& k, unsigned threads) {
  const auto planes = elevation_plane_angles(k);
  const std::size_t n = planes.size();
  const std::size_t rows = frame.rows();
  const std::size_t cols = frame.cols();
  FeatureVolume vol;
  vol.channels.assign(frame.channel_count(), Volume<double>(n, rows, cols, 0.0));
  vol.support = Volume<double>(n, rows, cols, 0.0);
  vol.valid = Volume<std::uint8_t>(n, rows, cols, 0);
  vol.range = frame.range;
  vol.elevation = k.elevation_axis();
  vol.azimuth = frame.azimuth;

  const std::size_t plane_size = rows * cols;
  parallel_for(n, threads, [&](std::size_t j) {
    const WarpedSlice slice = warp_to_plane(frame, ref_to_frame, planes[j], k);
    const std::size_t base = j * plane_size;
    for (std::size_t ch = 0; ch < slice.channels.size(); ++ch) {
      std::copy(slice.channels[ch].values().begin(), slice.channels[ch].values().end(),
                vol.channels[ch].values().begin() + static_cast<std::ptrdiff_t>(base));
    }
    std::copy(slice.support.values().begin(), slice.support.values().end(),
              vol.support.values().begin() + static_cast<std::ptrdiff_t>(base));
    std::copy(slice.valid.values().begin(), slice.valid.values().end(),
              vol.valid.values().begin() + static_cast<std::ptrdiff_t>(base));
  });
  return vol;
}

CostVolume aggregate_variance(std::span<const FeatureVolume> volumes,
                              const AggregateOptions& options) {
  if (volumes.size() < 2) throw DataError("aggregate_variance needs at least two volumes");
  const FeatureVolume& first = volumes.front();
  for (const auto& v : volumes) {
    if (!v.valid.same_shape(first.valid) || v.channel_count() != first.channel_count()) {
      throw DataError("aggregate_variance: feature volumes differ in shape");
    }
  }
  const std::size_t n = first.planes();
  const std::size_t rows = first.rows();
  const std::size_t cols = first.cols();
  const std::size_t nch = first.channel_count();
  const std::size_t nviews = volumes.size();

  CostVolume out;
  out.cost = Volume<double>(rows, n, cols, 0.0);
  out.valid_count = Volume<std::uint8_t>(rows, n, cols, 0);
  out.informative = Volume<std::uint8_t>(rows, n, cols, 0);
  out.range = first.range;
  out.elevation = first.elevation;
  out.azimuth = first.azimuth;

  std::vector<std::size_t> members(nviews);
  double max_cost = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t src = first.valid.offset(j, i, c);
        std::size_t count = 0;
        double support = 0.0;
        for (std::size_t v = 0; v < nviews; ++v) {
          if (volumes[v].valid.values()[src]) {
            members[count++] = v;
            support += volumes[v].support.values()[src];
          }
        }
        out.valid_count(i, j, c) = static_cast<std::uint8_t>(std::min<std::size_t>(count, 255));
        if (count < 2) continue;
        if (options.signal_floor > 0.0 &&
            support / static_cast<double>(count) < options.signal_floor) {
          continue;
        }
        // (1/K) sum (v - mean)^2 == (1/K^2) sum_{a<b} (v_a - v_b)^2; the pairwise
        // form is exactly zero whenever all views agree.
        double acc = 0.0;
        for (std::size_t ch = 0; ch < nch; ++ch) {
          const auto vals = [&](std::size_t m) { return volumes[members[m]].channels[ch].values()[src]; };
          for (std::size_t a = 0; a < count; ++a) {
            for (std::size_t b = a + 1; b < count; ++b) {
              const double d = vals(a) - vals(b);
              acc += d * d;
            }
          }
        }
        const double kk = static_cast<double>(count);
        const double cost = acc / (kk * kk) / static_cast<double>(nch);
        out.cost(i, j, c) = cost;
        out.informative(i, j, c) = 1;
        max_cost = std::max(max_cost, cost);
      }
    }
  }
  auto costs = out.cost.values();
  auto informative = out.informative.values();
  for (std::size_t x = 0; x < costs.size(); ++x) {
    if (!informative[x]) costs[x] = max_cost;
  }
  return out;
}

}  // namespace sonarmvs
