#pragma once

// Labels file (little-endian):
//   "GRPL" | version u32 = 1 | num_nodes u64 | num_parts u32 | num_nodes x u32 label
// 0xFFFFFFFF marks an unassigned node.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "grem/io_util.hpp"
#include "grem/types.hpp"

namespace grem {

inline constexpr std::string_view kLabelsMagic = "GRPL";
inline constexpr std::uint32_t kLabelsVersion = 1;
inline constexpr std::size_t kLabelsHeaderBytes = 4 + 4 + 8 + 4;

struct Labeling {
  std::uint32_t num_parts = 0;
  std::vector<std::uint32_t> labels;

  // Node count per part; unassigned nodes are not counted.
  std::vector<Count> sizes() const {
    std::vector<Count> s(num_parts, 0);
    for (auto l : labels)
      if (l != kNoLabel && l < num_parts) ++s[l];
    return s;
  }
};

inline void write_labels(const std::filesystem::path& p, std::span<const std::uint32_t> labels,
                         std::uint32_t num_parts) {
  io::ByteBuilder b;
  b.magic(kLabelsMagic).u32(kLabelsVersion).u64(labels.size()).u32(num_parts);
  std::vector<std::uint8_t> bytes(b.bytes().begin(), b.bytes().end());
  bytes.resize(kLabelsHeaderBytes + 4 * labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kNoLabel && labels[i] >= num_parts)
      throw DataError("label " + std::to_string(labels[i]) + " out of range for " + std::to_string(num_parts) +
                      " parts");
    io::put_u32(bytes.data() + kLabelsHeaderBytes + 4 * i, labels[i]);
  }
  io::write_all(p, bytes);
}

inline Labeling read_labels(const std::filesystem::path& p) {
  auto bytes = io::read_all(p);
  io::ByteCursor c(bytes);
  c.expect_magic(kLabelsMagic, p.string());
  if (auto v = c.u32(); v != kLabelsVersion) throw DataError("unsupported labels version " + std::to_string(v));
  const Count n = c.u64();
  Labeling out;
  out.num_parts = c.u32();
  if (bytes.size() != kLabelsHeaderBytes + 4 * n) throw DataError("labels file length mismatch: " + p.string());
  out.labels.resize(n);
  for (Count i = 0; i < n; ++i) {
    out.labels[i] = io::get_u32(bytes.data() + kLabelsHeaderBytes + 4 * i);
    if (out.labels[i] != kNoLabel && out.labels[i] >= out.num_parts)
      throw DataError("label out of range in " + p.string());
  }
  return out;
}

}  // namespace grem
