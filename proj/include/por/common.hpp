#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace por {

// Error kinds map 1:1 onto CLI exit codes (usage=2, data=3, runtime=4).
class Error : public std::runtime_error {
 public:
  enum class Kind { kUsage, kData, kRuntime };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

  static Error usage(const std::string& what) { return Error(Kind::kUsage, what); }
  static Error data(const std::string& what) { return Error(Kind::kData, what); }
  static Error runtime(const std::string& what) { return Error(Kind::kRuntime, what); }

 private:
  Kind kind_;
};

// Deterministic random source. The core engine is std::mt19937_64 (bit-exact
// u64 stream per the standard); all real-valued transforms are done here
// instead of std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi);
  // Standard normal via Box-Muller (one spare cached).
  double normal();

  Eigen::VectorXd normal_vector(int n);
  Eigen::MatrixXd normal_matrix(int rows, int cols);
  Eigen::VectorXd uniform_vector(int n, double lo, double hi);

  // Derive an independent stream (for eval-time sampling that must not
  // disturb the training stream).
  Rng fork(uint64_t salt);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a 64-bit; used for run/config/checkpoint identity hashes.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);
uint64_t fnv1a64_file(const std::string& path);
std::string hex64(uint64_t v);

// CRC32 (IEEE 802.3), used as the corruption footer of binary formats.
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

// Little-endian byte buffer writer/reader for the binary file formats.
class ByteWriter {
 public:
  void u8(uint8_t v);
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void f64(double v);
  void bytes(const void* data, size_t len);
  void str(const std::string& s);  // u32 length + bytes
  const std::vector<uint8_t>& data() const { return buf_; }
  size_t size() const { return buf_.size(); }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}
  explicit ByteReader(const std::vector<uint8_t>& v) : data_(v.data()), len_(v.size()) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  double f64();
  void bytes(void* out, size_t len);
  std::string str();
  size_t offset() const { return off_; }
  size_t remaining() const { return len_ - off_; }

 private:
  void need(size_t n);
  const uint8_t* data_;
  size_t len_;
  size_t off_ = 0;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);

// Fixed-format float printing ("%.17g" round-trips doubles exactly).
std::string format_double(double v, int precision = 17);

}  // namespace por
