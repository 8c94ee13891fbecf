#pragma once

// Little-endian record encoding and checked file streams.

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grem/error.hpp"

namespace grem::io {

namespace fs = std::filesystem;

inline void put_u32(std::uint8_t* out, std::uint32_t v) noexcept {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline void put_u64(std::uint8_t* out, std::uint64_t v) noexcept {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline std::uint32_t get_u32(const std::uint8_t* in) noexcept {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  return v;
}
inline std::uint64_t get_u64(const std::uint8_t* in) noexcept {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

// Append-only byte builder for headers.
class ByteBuilder {
 public:
  ByteBuilder& magic(std::string_view m) {
    bytes_.insert(bytes_.end(), m.begin(), m.end());
    return *this;
  }
  ByteBuilder& u32(std::uint32_t v) {
    std::uint8_t b[4];
    put_u32(b, v);
    bytes_.insert(bytes_.end(), b, b + 4);
    return *this;
  }
  ByteBuilder& u64(std::uint64_t v) {
    std::uint8_t b[8];
    put_u64(b, v);
    bytes_.insert(bytes_.end(), b, b + 8);
    return *this;
  }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Sequential cursor over a byte buffer; throws DataError on overrun.
class ByteCursor {
 public:
  explicit ByteCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(std::string_view m, std::string_view what) {
    need(m.size());
    if (std::memcmp(bytes_.data() + pos_, m.data(), m.size()) != 0)
      throw DataError(std::string(what) + ": bad magic");
    pos_ += m.size();
  }
  std::uint32_t u32() {
    need(4);
    auto v = get_u32(bytes_.data() + pos_);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    auto v = get_u64(bytes_.data() + pos_);
    pos_ += 8;
    return v;
  }
  std::size_t position() const noexcept { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("unexpected end of header");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + p.string());
  return in;
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + p.string());
  return out;
}

inline void write_bytes(std::ostream& out, std::span<const std::uint8_t> bytes, const fs::path& p) {
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + p.string());
}

// Reads exactly n bytes or throws DataError.
inline void read_exact(std::istream& in, std::uint8_t* dst, std::size_t n, const fs::path& p) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw DataError("truncated file: " + p.string());
}

inline std::uintmax_t byte_size(const fs::path& p) {
  std::error_code ec;
  auto n = fs::file_size(p, ec);
  if (ec) throw IoError("cannot stat " + p.string() + ": " + ec.message());
  return n;
}

inline std::vector<std::uint8_t> read_all(const fs::path& p) {
  auto in = open_in(p);
  std::vector<std::uint8_t> bytes(byte_size(p));
  if (!bytes.empty()) read_exact(in, bytes.data(), bytes.size(), p);
  return bytes;
}

inline void write_all(const fs::path& p, std::span<const std::uint8_t> bytes) {
  auto out = open_out(p);
  write_bytes(out, bytes, p);
  out.close();
  if (!out) throw IoError("close failed: " + p.string());
}

}  // namespace grem::io
