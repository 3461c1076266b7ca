#include "sonarmvs/frontdepth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sonarmvs/errors.hpp"

namespace sonarmvs {

namespace {

FrontDepthMap empty_like(const ScoreVolume& s, const SonarIntrinsics& k) {
  return {k, s.elevation, s.azimuth,
          Raster<double>(s.elevation_bins(), s.azimuth_bins(), k.range_max)};
}

void require_same_shape(const FrontDepthMap& a, const FrontDepthMap& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError(std::string(what) + ": depth map shapes differ");
  }
}

}  // namespace

std::size_t DepthMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(mask.values().begin(), mask.values().end(), [](auto v) { return v != 0; }));
}

FrontDepthMap soft_argmax_depth(const ScoreVolume& s, const SonarIntrinsics& k) {
  FrontDepthMap out = empty_like(s, k);
  const std::size_t bins = s.range_bins();
  for (std::size_t e = 0; e < s.elevation_bins(); ++e) {
    for (std::size_t c = 0; c < s.azimuth_bins(); ++c) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t d = 0; d < bins; ++d) peak = std::max(peak, s.score(d, e, c));
      double num = 0.0;
      double den = 0.0;
      for (std::size_t d = 0; d < bins; ++d) {
        const double w = std::exp(s.score(d, e, c) - peak);
        num += w * s.range.at(static_cast<double>(d));
        den += w;
      }
      out.depth(e, c) = num / den;
    }
  }
  return out;
}

FrontDepthMap hard_argmax_depth(const ScoreVolume& s, const SonarIntrinsics& k) {
  FrontDepthMap out = empty_like(s, k);
  for (std::size_t e = 0; e < s.elevation_bins(); ++e) {
    for (std::size_t c = 0; c < s.azimuth_bins(); ++c) {
      std::size_t best = 0;
      for (std::size_t d = 1; d < s.range_bins(); ++d) {
        if (s.score(d, e, c) > s.score(best, e, c)) best = d;  // strict: nearest wins ties
      }
      out.depth(e, c) = s.range.at(static_cast<double>(best));
    }
  }
  return out;
}

FrontDepthMap suppress_unsupported(const FrontDepthMap& depth, const ScoreVolume& s,
                                   double min_peak_score) {
  if (depth.rows() != s.elevation_bins() || depth.cols() != s.azimuth_bins()) {
    throw DataError("suppress_unsupported: depth map and score volume differ in shape");
  }
  FrontDepthMap out = depth;
  for (std::size_t e = 0; e < s.elevation_bins(); ++e) {
    for (std::size_t c = 0; c < s.azimuth_bins(); ++c) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t d = 0; d < s.range_bins(); ++d) peak = std::max(peak, s.score(d, e, c));
      if (peak < min_peak_score) out.depth(e, c) = depth.intrinsics.range_max;
    }
  }
  return out;
}

DepthMask make_mask(const FrontDepthMap& gt) {
  const double lo = gt.intrinsics.range_min;
  const double hi = gt.intrinsics.range_max;
  DepthMask m{Raster<std::uint8_t>(gt.rows(), gt.cols(), 0)};
  for (std::size_t e = 0; e < gt.rows(); ++e) {
    for (std::size_t c = 0; c < gt.cols(); ++c) {
      const double d = gt.depth(e, c);
      m.mask(e, c) = (d > lo && d < hi) ? 1 : 0;
    }
  }
  return m;
}

FrontDepthMap clamp_gt(const FrontDepthMap& gt) {
  FrontDepthMap out = gt;
  for (double& d : out.depth.values()) {
    d = std::clamp(d, gt.intrinsics.range_min, gt.intrinsics.range_max);
  }
  return out;
}

double masked_l1_loss(const FrontDepthMap& est, const FrontDepthMap& gt, double lambda) {
  require_same_shape(est, gt, "masked_l1_loss");
  const DepthMask m = make_mask(gt);
  double sum = 0.0;
  for (std::size_t e = 0; e < gt.rows(); ++e) {
    for (std::size_t c = 0; c < gt.cols(); ++c) {
      const double err = std::abs(est.depth(e, c) - gt.depth(e, c));
      sum += m.mask(e, c) ? lambda * err : err;
    }
  }
  return sum / static_cast<double>(gt.depth.size());
}

FrontDepthMap resample_depth(const FrontDepthMap& depth, const Axis& elevation,
                             const Axis& azimuth) {
  if (depth.elevation == elevation && depth.azimuth == azimuth) return depth;
  FrontDepthMap out{depth.intrinsics, elevation, azimuth,
                    Raster<double>(elevation.count, azimuth.count, 0.0)};
  const auto rows = depth.rows();
  const auto cols = depth.cols();
  auto locate = [](double x, std::size_t n, std::size_t& i0, double& w) {
    x = std::clamp(x, 0.0, static_cast<double>(n - 1));
    i0 = std::min(static_cast<std::size_t>(x), n >= 2 ? n - 2 : 0);
    w = n >= 2 ? x - static_cast<double>(i0) : 0.0;
  };
  for (std::size_t e = 0; e < elevation.count; ++e) {
    std::size_t r0 = 0;
    double wr = 0.0;
    locate(depth.elevation.index_of(elevation.at(static_cast<double>(e))), rows, r0, wr);
    for (std::size_t c = 0; c < azimuth.count; ++c) {
      std::size_t c0 = 0;
      double wc = 0.0;
      locate(depth.azimuth.index_of(azimuth.at(static_cast<double>(c))), cols, c0, wc);
      const std::size_t r1 = std::min(r0 + 1, rows - 1);
      const std::size_t c1 = std::min(c0 + 1, cols - 1);
      out.depth(e, c) = (1 - wr) * ((1 - wc) * depth.depth(r0, c0) + wc * depth.depth(r0, c1)) +
                        wr * ((1 - wc) * depth.depth(r1, c0) + wc * depth.depth(r1, c1));
    }
  }
  return out;
}

}  // namespace sonarmvs
