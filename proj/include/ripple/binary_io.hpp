#pragma once

#include <Eigen/Core>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ripple {

// Little-endian writer for the versioned artifact files. A file is
//   "<MAGIC> v<version>\n" <plain-text header line>
//   u64 payload length, payload bytes, u64 FNV-1a checksum of the payload.
class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s);
  void matrix(const Eigen::MatrixXd& m);

  const std::string& bytes() const noexcept { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view bytes) : data_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str();
  Eigen::MatrixXd matrix();

  bool done() const noexcept { return pos_ == data_.size(); }
  void expect_done() const;

 private:
  void need(std::size_t n) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

void write_artifact(const std::filesystem::path& path, std::string_view magic,
                    std::uint32_t version, std::string_view header,
                    const BinaryWriter& payload);

struct Artifact {
  std::string header;
  std::string payload;
};

// Verifies magic, version, length and checksum.
Artifact read_artifact(const std::filesystem::path& path, std::string_view magic,
                       std::uint32_t version);

}  // namespace ripple
