#include "sonarmvs/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "sonarmvs/errors.hpp"

namespace sonarmvs::io {

namespace {

constexpr std::string_view kMagic = "SNR1";

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string_view take(std::size_t n) {
    need(n);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("tensor file truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::string> split_labels(std::string_view block, std::size_t rank) {
  std::vector<std::string> labels;
  if (rank == 0) return labels;
  std::size_t start = 0;
  while (true) {
    const auto comma = block.find(',', start);
    labels.emplace_back(block.substr(start, comma == std::string_view::npos ? block.npos
                                                                            : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (labels.size() != rank) throw DataError("tensor label count does not match rank");
  return labels;
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::string encode_tensor(const Tensor& t) {
  if (t.dims.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw DataError("tensor rank too large");
  }
  if (t.data.size() != t.element_count()) throw DataError("tensor payload does not match dims");
  if (!t.labels.empty() && t.labels.size() != t.dims.size()) {
    throw DataError("tensor label count does not match rank");
  }
  std::string labels;
  for (std::size_t i = 0; i < t.dims.size(); ++i) {
    if (i > 0) labels.push_back(',');
    if (!t.labels.empty()) {
      if (t.labels[i].find(',') != std::string::npos) {
        throw DataError("tensor labels must not contain commas");
      }
      labels += t.labels[i];
    }
  }
  std::string out;
  out.reserve(kMagic.size() + 2 + 8 * t.dims.size() + 4 + labels.size() + 4 * t.data.size());
  out.append(kMagic);
  out.push_back(static_cast<char>(kFloat32));
  out.push_back(static_cast<char>(t.dims.size()));
  for (auto d : t.dims) put_le<std::uint64_t>(out, d);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(labels.size()));
  out.append(labels);
  for (float f : t.data) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

Tensor decode_tensor(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) throw DataError("not a tensor file (bad magic)");
  const auto dtype = in.get_le<std::uint8_t>();
  if (dtype != kFloat32) throw DataError("unsupported tensor dtype " + std::to_string(dtype));
  const auto rank = in.get_le<std::uint8_t>();
  Tensor t;
  for (std::size_t i = 0; i < rank; ++i) t.dims.push_back(in.get_le<std::uint64_t>());
  const auto label_bytes = in.get_le<std::uint32_t>();
  t.labels = split_labels(in.take(label_bytes), rank);
  const std::size_t n = t.element_count();
  if (in.remaining() != 4 * n) throw DataError("tensor payload length does not match dims");
  t.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.data[i] = std::bit_cast<float>(in.get_le<std::uint32_t>());
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_file_atomic(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Tensor tensor_from_raster(const Raster<double>& r, std::string row_label,
                          std::string col_label) {
  Tensor t;
  t.dims = {r.rows(), r.cols()};
  t.labels = {std::move(row_label), std::move(col_label)};
  t.data.reserve(r.size());
  for (double v : r.values()) t.data.push_back(static_cast<float>(v));
  return t;
}

Raster<double> raster_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2) throw DataError("expected a rank-2 tensor");
  Raster<double> r(t.dims[0], t.dims[1]);
  for (std::size_t i = 0; i < t.data.size(); ++i) r.storage()[i] = t.data[i];
  return r;
}

std::string encode_ply(const PointCloud& cloud) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char line[96];
  for (const Vec3& p : cloud.points) {
    const int n = std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n",
                                static_cast<double>(static_cast<float>(p.x())),
                                static_cast<double>(static_cast<float>(p.y())),
                                static_cast<double>(static_cast<float>(p.z())));
    out.append(line, static_cast<std::size_t>(n));
  }
  return out;
}

PointCloud decode_ply(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw DataError("not a PLY file");
  std::size_t vertices = 0;
  std::vector<std::string> properties;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    if (line == "end_header") break;
    std::istringstream words(line);
    std::string key;
    words >> key;
    if (key == "format") {
      std::string fmt;
      words >> fmt;
      if (fmt != "ascii") throw DataError("only ASCII PLY is supported");
    } else if (key == "element") {
      std::string name;
      words >> name;
      in_vertex = name == "vertex";
      if (in_vertex) words >> vertices;
    } else if (key == "property" && in_vertex) {
      std::string type, name;
      words >> type >> name;
      properties.push_back(name);
    }
  }
  if (properties.size() < 3 || properties[0] != "x" || properties[1] != "y" ||
      properties[2] != "z") {
    throw DataError("PLY vertices must start with x y z");
  }
  PointCloud cloud;
  cloud.points.reserve(vertices);
  for (std::size_t i = 0; i < vertices; ++i) {
    if (!std::getline(in, line)) throw DataError("PLY vertex list truncated");
    float x = 0, y = 0, z = 0;
    if (std::sscanf(line.c_str(), "%f %f %f", &x, &y, &z) != 3) {
      throw DataError("malformed PLY vertex line");
    }
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file_atomic(path, encode_ply(cloud));
}

PointCloud read_ply(const std::filesystem::path& path) { return decode_ply(read_file(path)); }

std::string encode_pgm16(const Raster<double>& r) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : r.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::string out =
      "P5\n" + std::to_string(r.cols()) + " " + std::to_string(r.rows()) + "\n65535\n";
  out.reserve(out.size() + 2 * r.size());
  const double span = hi - lo;
  for (double v : r.values()) {
    const auto level = span > 0.0
                           ? static_cast<std::uint16_t>(std::lround((v - lo) / span * 65535.0))
                           : std::uint16_t{0};
    out.push_back(static_cast<char>(level >> 8));
    out.push_back(static_cast<char>(level & 0xFF));
  }
  return out;
}

void write_pgm16(const std::filesystem::path& path, const Raster<double>& r) {
  write_file_atomic(path, encode_pgm16(r));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

}  // namespace sonarmvs::io
