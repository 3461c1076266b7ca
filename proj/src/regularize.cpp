#include "sonarmvs/regularize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "sonarmvs/errors.hpp"
#include "sonarmvs/parallel.hpp"

namespace sonarmvs {

namespace {

// Half-sample symmetric reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
std::size_t reflect(long i, long n) {
  const long period = 2 * n;
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

// One separable pass along `axis` (0 = range, 1 = elevation, 2 = azimuth).
Volume<double> convolve_axis(const Volume<double>& in, int axis, const std::vector<double>& kernel,
                             unsigned threads) {
  const std::array<std::size_t, 3> dims{in.dim0(), in.dim1(), in.dim2()};
  const std::array<std::size_t, 3> strides{dims[1] * dims[2], dims[2], 1};
  const auto n = static_cast<long>(dims[static_cast<std::size_t>(axis)]);
  const std::size_t stride = strides[static_cast<std::size_t>(axis)];
  const long radius = static_cast<long>(kernel.size() / 2);

  // Enumerate line start offsets over the two other axes.
  std::array<int, 2> others{};
  for (int a = 0, o = 0; a < 3; ++a) {
    if (a != axis) others[static_cast<std::size_t>(o++)] = a;
  }
  const std::size_t outer = dims[static_cast<std::size_t>(others[0])];
  const std::size_t inner = dims[static_cast<std::size_t>(others[1])];

  Volume<double> out(dims[0], dims[1], dims[2], 0.0);
  const auto src = in.values();
  auto dst = out.values();
  parallel_for(outer, threads, [&](std::size_t p) {
    for (std::size_t q = 0; q < inner; ++q) {
      const std::size_t base = p * strides[static_cast<std::size_t>(others[0])] +
                               q * strides[static_cast<std::size_t>(others[1])];
      for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long t = -radius; t <= radius; ++t) {
          acc += kernel[static_cast<std::size_t>(t + radius)] *
                 src[base + reflect(i + t, n) * stride];
        }
        dst[base + static_cast<std::size_t>(i) * stride] = acc;
      }
    }
  });
  return out;
}

double upsample_coord(std::size_t out_index, std::size_t factor) {
  return static_cast<double>(out_index) / static_cast<double>(factor);
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));
    k[static_cast<std::size_t>(t + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

CostVolume smooth_volume(const CostVolume& c, const SmoothingSigma& sigma, unsigned threads) {
  if (sigma.range < 0.0 || sigma.elevation < 0.0 || sigma.azimuth < 0.0) {
    throw ConfigError("smoothing sigma must be >= 0 on every axis");
  }
  CostVolume out = c;
  const std::array<double, 3> sigmas{sigma.range, sigma.elevation, sigma.azimuth};
  if (sigmas[0] == 0.0 && sigmas[1] == 0.0 && sigmas[2] == 0.0) return out;

  const auto flags = c.informative.values();
  const bool all_informative =
      std::all_of(flags.begin(), flags.end(), [](std::uint8_t f) { return f != 0; });

  Volume<double> num = c.cost;
  Volume<double> den;
  if (!all_informative) {
    den = Volume<double>(c.cost.dim0(), c.cost.dim1(), c.cost.dim2(), 0.0);
    auto nv = num.values();
    auto dv = den.values();
    for (std::size_t x = 0; x < nv.size(); ++x) {
      dv[x] = flags[x] ? 1.0 : 0.0;
      nv[x] *= dv[x];
    }
  }
  for (int axis = 0; axis < 3; ++axis) {
    const double s = sigmas[static_cast<std::size_t>(axis)];
    if (s == 0.0) continue;
    const auto kernel = gaussian_kernel(s);
    num = convolve_axis(num, axis, kernel, threads);
    if (!all_informative) den = convolve_axis(den, axis, kernel, threads);
  }

  auto cost = out.cost.values();
  const auto nv = num.values();
  if (all_informative) {
    std::copy(nv.begin(), nv.end(), cost.begin());
    return out;
  }
  const auto dv = den.values();
  double max_cost = 0.0;
  for (std::size_t x = 0; x < cost.size(); ++x) {
    if (!flags[x]) continue;
    cost[x] = nv[x] / dv[x];
    max_cost = std::max(max_cost, cost[x]);
  }
  for (std::size_t x = 0; x < cost.size(); ++x) {
    if (!flags[x]) cost[x] = max_cost;
  }
  return out;
}

double default_temperature(const CostVolume& c) {
  const auto cost = c.cost.values();
  const auto flags = c.informative.values();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t x = 0; x < cost.size(); ++x) {
    if (flags[x] && cost[x] > 0.0) {
      sum += cost[x];
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 1.0;
}

ScoreVolume score_volume(const CostVolume& c, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("temperature tau must be > 0");
  ScoreVolume out{Volume<double>(c.cost.dim0(), c.cost.dim1(), c.cost.dim2()), c.range,
                  c.elevation, c.azimuth};
  const auto in = c.cost.values();
  auto s = out.score.values();
  for (std::size_t x = 0; x < in.size(); ++x) s[x] = -in[x] / tau;
  return out;
}

ScoreVolume localize_elevation(const ScoreVolume& s, const Volume<std::uint8_t>& informative,
                               double width, unsigned threads) {
  if (!(width > 0.0) || !std::isfinite(width)) throw ConfigError("elevation width must be > 0");
  if (s.score.dim0() != informative.dim0() || s.score.dim1() != informative.dim1() ||
      s.score.dim2() != informative.dim2()) {
    throw DataError("localize_elevation: score and informative volumes differ in shape");
  }
  const std::size_t rows = s.range_bins();
  const std::size_t planes = s.elevation_bins();
  const std::size_t cols = s.azimuth_bins();
  ScoreVolume out{Volume<double>(rows, planes, cols, kNoEvidenceScore), s.range, s.elevation,
                  s.azimuth};
  const double inv_two_w2 = 0.5 / (width * width);
  parallel_for(rows, threads, [&](std::size_t d) {
    for (std::size_t c = 0; c < cols; ++c) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < planes; ++j) {
        if (informative(d, j, c)) peak = std::max(peak, s.score(d, j, c));
      }
      if (!std::isfinite(peak)) continue;
      double z = 0.0;
      double mean = 0.0;
      for (std::size_t j = 0; j < planes; ++j) {
        if (!informative(d, j, c)) continue;
        const double w = std::exp(s.score(d, j, c) - peak);
        z += w;
        mean += w * s.elevation.at(static_cast<double>(j));
      }
      mean /= z;
      for (std::size_t j = 0; j < planes; ++j) {
        if (!informative(d, j, c)) continue;
        const double delta = s.elevation.at(static_cast<double>(j)) - mean;
        out.score(d, j, c) = -delta * delta * inv_two_w2;
      }
    }
  });
  return out;
}

ScoreVolume upsample_volume(const ScoreVolume& s, const UpsampleFactors& factors) {
  if (factors.range < 1 || factors.elevation < 1 || factors.azimuth < 1) {
    throw ConfigError("upsample factors must be >= 1");
  }
  if (factors.range == 1 && factors.elevation == 1 && factors.azimuth == 1) return s;
  const std::array<std::size_t, 3> in_dims{s.score.dim0(), s.score.dim1(), s.score.dim2()};
  const std::array<std::size_t, 3> f{factors.range, factors.elevation, factors.azimuth};
  std::array<std::size_t, 3> out_dims{};
  for (std::size_t a = 0; a < 3; ++a) out_dims[a] = (in_dims[a] - 1) * f[a] + 1;

  ScoreVolume out{Volume<double>(out_dims[0], out_dims[1], out_dims[2]),
                  Axis{s.range.first, s.range.last, out_dims[0]},
                  Axis{s.elevation.first, s.elevation.last, out_dims[1]},
                  Axis{s.azimuth.first, s.azimuth.last, out_dims[2]}};

  // Per-axis lower index and weight for each output sample.
  std::array<std::vector<std::size_t>, 3> lower;
  std::array<std::vector<double>, 3> weight;
  for (std::size_t a = 0; a < 3; ++a) {
    lower[a].resize(out_dims[a]);
    weight[a].resize(out_dims[a]);
    for (std::size_t o = 0; o < out_dims[a]; ++o) {
      const double x = upsample_coord(o, f[a]);
      std::size_t i0 = static_cast<std::size_t>(x);
      if (i0 + 1 >= in_dims[a]) i0 = in_dims[a] >= 2 ? in_dims[a] - 2 : 0;
      lower[a][o] = i0;
      weight[a][o] = in_dims[a] >= 2 ? x - static_cast<double>(i0) : 0.0;
    }
  }
  auto at = [&](std::size_t i, std::size_t j, std::size_t k) {
    return s.score(std::min(i, in_dims[0] - 1), std::min(j, in_dims[1] - 1),
                   std::min(k, in_dims[2] - 1));
  };
  for (std::size_t i = 0; i < out_dims[0]; ++i) {
    const std::size_t i0 = lower[0][i];
    const double wi = weight[0][i];
    for (std::size_t j = 0; j < out_dims[1]; ++j) {
      const std::size_t j0 = lower[1][j];
      const double wj = weight[1][j];
      for (std::size_t k = 0; k < out_dims[2]; ++k) {
        const std::size_t k0 = lower[2][k];
        const double wk = weight[2][k];
        double v = 0.0;
        for (int di = 0; di < 2; ++di) {
          const double a = di ? wi : 1.0 - wi;
          if (a == 0.0) continue;
          for (int dj = 0; dj < 2; ++dj) {
            const double b = dj ? wj : 1.0 - wj;
            if (b == 0.0) continue;
            for (int dk = 0; dk < 2; ++dk) {
              const double cw = dk ? wk : 1.0 - wk;
              if (cw == 0.0) continue;
              v += a * b * cw * at(i0 + di, j0 + dj, k0 + dk);
            }
          }
        }
        out.score(i, j, k) = v;
      }
    }
  }
  return out;
}

}  // namespace sonarmvs
