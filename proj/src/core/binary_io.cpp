#include "mex/core/binary_io.hpp"

#include <fstream>
#include <sstream>

#include "mex/core/hash.hpp"

namespace mex {

void BinaryWriter::matrix(const Eigen::MatrixXd& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
}

void BinaryWriter::vector(const Eigen::VectorXd& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
}

Eigen::MatrixXd BinaryReader::matrix() {
  const auto rows = u64();
  const auto cols = u64();
  if (rows * cols * 8 > remaining()) {
    throw FormatError("matrix extends past end of data");
  }
  Eigen::MatrixXd m(rows, cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) m(r, c) = f64();
  }
  return m;
}

Eigen::VectorXd BinaryReader::vector() {
  const auto n = u64();
  if (n * 8 > remaining()) throw FormatError("vector extends past end of data");
  Eigen::VectorXd v(n);
  for (std::uint64_t i = 0; i < n; ++i) v(i) = f64();
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path);
}

std::string wrap_container(std::string_view magic, std::uint32_t version,
                           std::string_view payload) {
  BinaryWriter w;
  w.raw(magic);
  w.u32(version);
  w.u64(payload.size());
  w.raw(payload);
  w.u64(fnv1a64(payload));
  return w.take();
}

std::string unwrap_container(std::string_view bytes, std::string_view magic,
                             std::uint32_t expected_version,
                             const std::string& what) {
  BinaryReader r(bytes);
  if (r.raw(magic.size()) != magic) {
    throw FormatError(what + ": bad magic, expected " + std::string(magic));
  }
  const auto version = r.u32();
  if (version != expected_version) {
    throw FormatError(what + ": format version " + std::to_string(version) +
                      " found, expected " + std::to_string(expected_version));
  }
  const auto size = r.u64();
  if (r.remaining() < 8 || size != r.remaining() - 8) {
    throw FormatError(what + ": payload size does not match file size");
  }
  std::string payload(r.raw(size));
  if (r.u64() != fnv1a64(payload)) {
    throw FormatError(what + ": checksum mismatch (file is corrupt)");
  }
  return payload;
}

}  // namespace mex
