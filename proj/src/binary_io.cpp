#include "ripple/binary_io.hpp"

#include "ripple/errors.hpp"
#include "ripple/text.hpp"

#include <fstream>
#include <sstream>

namespace ripple {

void BinaryWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void BinaryWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void BinaryWriter::str(std::string_view s) {
  u64(s.size());
  buf_.append(s);
}

void BinaryWriter::matrix(const Eigen::MatrixXd& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) f64(m(i, j));
}

void BinaryReader::need(std::size_t n) const {
  if (data_.size() - pos_ < n) throw FormatError("corrupted artifact: payload truncated");
}

std::uint8_t BinaryReader::u8() {
  need(1);
  return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t BinaryReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
  return v;
}

std::string BinaryReader::str() {
  const std::uint64_t n = u64();
  need(n);
  std::string s(data_.substr(pos_, n));
  pos_ += n;
  return s;
}

Eigen::MatrixXd BinaryReader::matrix() {
  const std::uint64_t rows = u64();
  const std::uint64_t cols = u64();
  if (rows != 0 && cols > (data_.size() - pos_) / 8 / rows) {
    throw FormatError("corrupted artifact: matrix shape exceeds payload");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = f64();
  return m;
}

void BinaryReader::expect_done() const {
  if (!done()) throw FormatError("corrupted artifact: trailing bytes");
}

void write_artifact(const std::filesystem::path& path, std::string_view magic,
                    std::uint32_t version, std::string_view header,
                    const BinaryWriter& payload) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << magic << " v" << version << '\n' << header << '\n';
  BinaryWriter tail;
  tail.u64(payload.bytes().size());
  out.write(tail.bytes().data(), static_cast<std::streamsize>(tail.bytes().size()));
  out.write(payload.bytes().data(), static_cast<std::streamsize>(payload.bytes().size()));
  BinaryWriter sum;
  sum.u64(fnv1a64(payload.bytes()));
  out.write(sum.bytes().data(), static_cast<std::streamsize>(sum.bytes().size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Artifact read_artifact(const std::filesystem::path& path, std::string_view magic,
                       std::uint32_t version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();

  const std::size_t first = data.find('\n');
  if (first == std::string::npos) throw FormatError(path.string() + ": missing header");
  const std::string_view line(data.data(), first);
  const std::string expected_prefix = std::string(magic) + " v";
  if (line.substr(0, expected_prefix.size()) != expected_prefix) {
    throw FormatError(path.string() + ": not a " + std::string(magic) + " file");
  }
  const std::string found_version(line.substr(expected_prefix.size()));
  if (found_version != std::to_string(version)) {
    throw FormatError(path.string() + ": version mismatch (file v" + found_version +
                      ", expected v" + std::to_string(version) + ")");
  }
  const std::size_t second = data.find('\n', first + 1);
  if (second == std::string::npos) throw FormatError(path.string() + ": truncated header");

  Artifact a;
  a.header = data.substr(first + 1, second - first - 1);
  BinaryReader body(std::string_view(data).substr(second + 1));
  const std::uint64_t length = body.u64();
  if (data.size() - (second + 1) - 8 < length + 8) {
    throw FormatError(path.string() + ": corrupted artifact (truncated)");
  }
  a.payload = data.substr(second + 1 + 8, length);
  BinaryReader sum(std::string_view(data).substr(second + 1 + 8 + length));
  if (sum.u64() != fnv1a64(a.payload)) {
    throw FormatError(path.string() + ": corrupted artifact (checksum mismatch)");
  }
  if (!sum.done()) throw FormatError(path.string() + ": corrupted artifact (trailing bytes)");
  return a;
}

}  // namespace ripple
