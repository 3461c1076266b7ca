#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sonarmvs/metrics.hpp"
#include "sonarmvs/raster.hpp"

namespace sonarmvs::io {

/// In-memory form of the on-disk tensor format:
///   "SNR1" | dtype u8 (1 = float32) | rank u8 | dims u64 LE x rank |
///   label block length u32 LE | comma-joined axis labels | float32 LE payload
struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<std::string> labels;  // one per axis, may be empty strings
  std::vector<float> data;          // row-major

  std::size_t element_count() const;
};

inline constexpr std::uint8_t kFloat32 = 1;

std::string encode_tensor(const Tensor& t);
/// Throws DataError on a malformed buffer.
Tensor decode_tensor(std::string_view bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor tensor_from_raster(const Raster<double>& r, std::string row_label,
                          std::string col_label);
/// Throws DataError unless the tensor has rank 2.
Raster<double> raster_from_tensor(const Tensor& t);

/// ASCII PLY with float x y z vertex properties. Coordinates are stored as
/// float32 printed with 9 significant digits, which round-trips exactly.
std::string encode_ply(const PointCloud& cloud);
PointCloud decode_ply(std::string_view text);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

/// Binary 16-bit PGM (P5, big-endian samples); min maps to 0 and max to 65535.
/// A constant raster maps to 0 everywhere.
std::string encode_pgm16(const Raster<double>& r);
void write_pgm16(const std::filesystem::path& path, const Raster<double>& r);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace sonarmvs::io
