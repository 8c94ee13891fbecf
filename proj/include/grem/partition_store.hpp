#pragma once

// Partitioned storage layout.
//
// Bucket file: "GRPB" | version u32 = 1 | p u32 | id-width flag u32 | num_edges u64
//   then the p x p edge buckets concatenated in row-major order. Bucket (i, j)
//   holds the directed edges whose source is in partition i and destination
//   in partition j, in input order.
// Index sidecar (<bucket file>.index): p x p (byte offset u64, edge count u64).
// Feature layout sidecar (<feature file>.layout): "GRPF" | record_width u32 |
//   num_nodes u64 | num_nodes x u64 slot | p u32 | p x (start slot u64, count u64).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "grem/edge_stream.hpp"
#include "grem/error.hpp"
#include "grem/io_util.hpp"
#include "grem/labels.hpp"
#include "grem/types.hpp"

namespace grem {

inline constexpr std::string_view kBucketMagic = "GRPB";
inline constexpr std::uint32_t kBucketVersion = 1;
inline constexpr std::size_t kBucketHeaderBytes = 4 + 4 + 4 + 4 + 8;
inline constexpr std::string_view kLayoutMagic = "GRPF";

inline fs::path bucket_index_path(const fs::path& bucket_file) { return bucket_file.string() + ".index"; }
inline fs::path feature_layout_path(const fs::path& feature_file) { return feature_file.string() + ".layout"; }

struct BucketEntry {
  std::uint64_t offset = 0;
  std::uint64_t count = 0;
};

struct BucketIndex {
  std::uint32_t p = 0;
  IdWidth id_width = IdWidth::u32;
  std::vector<BucketEntry> entries;  // row-major p x p
  Count total_edges = 0;

  const BucketEntry& at(std::uint32_t i, std::uint32_t j) const {
    if (i >= p || j >= p) throw UsageError("bucket index out of range");
    return entries[static_cast<std::size_t>(i) * p + j];
  }
};

namespace detail {

inline std::vector<std::uint8_t> encode_bucket_header(std::uint32_t p, IdWidth w, Count edges) {
  io::ByteBuilder b;
  b.magic(kBucketMagic).u32(kBucketVersion).u32(p).u32(w == IdWidth::u64 ? 1u : 0u).u64(edges);
  return {b.bytes().begin(), b.bytes().end()};
}

}  // namespace detail

// Scatters every edge of `input` into bucket (label[src], label[dst]) in one
// streaming pass. Per-bucket buffers spill to a scratch file when full and
// are gathered in row-major order at the end.
inline BucketIndex write_buckets(const EdgeFile& input, std::span<const std::uint32_t> labels, std::uint32_t p,
                                 const fs::path& out, std::size_t buffer_edges_total = std::size_t{1} << 20) {
  if (p < 1) throw UsageError("bucket store needs at least one partition");
  if (labels.size() != input.meta.num_nodes) throw DataError("labels do not cover the graph");
  const IdWidth w = input.meta.id_width;
  const std::size_t rec = edge_record_bytes(w);
  const std::size_t buckets = static_cast<std::size_t>(p) * p;
  const std::size_t per_bucket = std::max<std::size_t>(16, buffer_edges_total / buckets);

  struct Segment {
    std::uint64_t offset;
    std::uint64_t count;
  };
  std::vector<std::vector<Edge>> bufs(buckets);
  std::vector<std::vector<Segment>> segments(buckets);
  BucketIndex index;
  index.p = p;
  index.id_width = w;
  index.entries.assign(buckets, {});

  const fs::path spill_path = out.string() + ".spill";
  std::fstream spill;
  std::uint64_t spill_end = 0;
  std::vector<std::uint8_t> scratch;
  struct RemoveSpill {
    const fs::path& p;
    ~RemoveSpill() {
      std::error_code ec;
      fs::remove(p, ec);
    }
  } remove_spill{spill_path};

  auto spill_bucket = [&](std::size_t b) {
    if (!spill.is_open()) {
      spill.open(spill_path, std::ios::binary | std::ios::in | std::ios::out | std::ios::trunc);
      if (!spill) throw IoError("cannot create spill file: " + spill_path.string());
    }
    scratch.resize(bufs[b].size() * rec);
    for (std::size_t i = 0; i < bufs[b].size(); ++i) {
      detail::put_id(scratch.data() + i * rec, bufs[b][i].src, w);
      detail::put_id(scratch.data() + i * rec + id_bytes(w), bufs[b][i].dst, w);
    }
    spill.seekp(static_cast<std::streamoff>(spill_end));
    io::write_bytes(spill, scratch, spill_path);
    segments[b].push_back({spill_end, bufs[b].size()});
    spill_end += scratch.size();
    bufs[b].clear();
  };

  EdgeReader reader(input);
  std::vector<Edge> block;
  while (reader.read(block, 1 << 16) > 0) {
    for (const Edge& e : block) {
      const auto a = labels[e.src], c = labels[e.dst];
      if (a >= p || c >= p)
        throw DataError("unlabeled endpoint in edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ")");
      const std::size_t b = static_cast<std::size_t>(a) * p + c;
      bufs[b].push_back(e);
      ++index.entries[b].count;
      if (bufs[b].size() >= per_bucket) spill_bucket(b);
    }
    block.clear();
  }
  index.total_edges = reader.consumed();

  auto os = io::open_out(out);
  io::write_bytes(os, detail::encode_bucket_header(p, w, index.total_edges), out);
  std::uint64_t offset = kBucketHeaderBytes;
  for (std::size_t b = 0; b < buckets; ++b) {
    index.entries[b].offset = offset;
    for (const Segment& s : segments[b]) {
      scratch.resize(s.count * rec);
      spill.seekg(static_cast<std::streamoff>(s.offset));
      io::read_exact(spill, scratch.data(), scratch.size(), spill_path);
      io::write_bytes(os, scratch, out);
    }
    scratch.resize(bufs[b].size() * rec);
    for (std::size_t i = 0; i < bufs[b].size(); ++i) {
      detail::put_id(scratch.data() + i * rec, bufs[b][i].src, w);
      detail::put_id(scratch.data() + i * rec + id_bytes(w), bufs[b][i].dst, w);
    }
    io::write_bytes(os, scratch, out);
    bufs[b] = {};
    offset += index.entries[b].count * rec;
  }
  os.close();
  if (!os) throw IoError("write failed: " + out.string());

  std::vector<std::uint8_t> idx(buckets * 16);
  for (std::size_t b = 0; b < buckets; ++b) {
    io::put_u64(idx.data() + 16 * b, index.entries[b].offset);
    io::put_u64(idx.data() + 16 * b + 8, index.entries[b].count);
  }
  io::write_all(bucket_index_path(out), idx);
  return index;
}

// Read side of a bucket file. The index is validated against the file header
// and length on open; reads are counted for access-pattern checks.
class BucketStore {
 public:
  explicit BucketStore(const fs::path& path) : path_(path) {
    auto in = io::open_in(path_);
    std::uint8_t raw[kBucketHeaderBytes];
    io::read_exact(in, raw, kBucketHeaderBytes, path_);
    io::ByteCursor c({raw, kBucketHeaderBytes});
    c.expect_magic(kBucketMagic, path_.string());
    if (auto v = c.u32(); v != kBucketVersion) throw DataError("unsupported bucket file version " + std::to_string(v));
    index_.p = c.u32();
    const auto flag = c.u32();
    if (flag > 1) throw DataError("bad id-width flag in " + path_.string());
    index_.id_width = flag ? IdWidth::u64 : IdWidth::u32;
    index_.total_edges = c.u64();
    const std::size_t rec = edge_record_bytes(index_.id_width);

    const auto idx = io::read_all(bucket_index_path(path_));
    const std::size_t buckets = static_cast<std::size_t>(index_.p) * index_.p;
    if (idx.size() != buckets * 16) throw DataError("bucket index does not match bucket file: " + path_.string());
    index_.entries.resize(buckets);
    std::uint64_t expect = kBucketHeaderBytes;
    Count sum = 0;
    for (std::size_t b = 0; b < buckets; ++b) {
      index_.entries[b] = {io::get_u64(idx.data() + 16 * b), io::get_u64(idx.data() + 16 * b + 8)};
      if (index_.entries[b].offset != expect)
        throw DataError("bucket index offsets inconsistent with bucket file: " + path_.string());
      expect += index_.entries[b].count * rec;
      sum += index_.entries[b].count;
    }
    if (sum != index_.total_edges || io::byte_size(path_) != expect)
      throw DataError("bucket index does not match bucket file: " + path_.string());
    in_ = std::move(in);
  }

  const BucketIndex& index() const noexcept { return index_; }

  // One seek and one contiguous read.
  std::vector<Edge> read(std::uint32_t i, std::uint32_t j) {
    const BucketEntry& e = index_.at(i, j);
    const IdWidth w = index_.id_width;
    const std::size_t rec = edge_record_bytes(w);
    std::vector<std::uint8_t> raw(e.count * rec);
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(e.offset));
    if (!raw.empty()) io::read_exact(in_, raw.data(), raw.size(), path_);
    ++reads_;
    std::vector<Edge> out(e.count);
    for (std::size_t k = 0; k < e.count; ++k)
      out[k] = {detail::get_id(raw.data() + k * rec, w), detail::get_id(raw.data() + k * rec + id_bytes(w), w)};
    return out;
  }

  // All edges among a set of partitions: |parts|^2 bucket reads.
  std::vector<Edge> read_partitions(std::span<const std::uint32_t> parts) {
    std::vector<Edge> out;
    for (auto i : parts)
      for (auto j : parts) {
        auto b = read(i, j);
        out.insert(out.end(), b.begin(), b.end());
      }
    return out;
  }

  std::size_t reads() const noexcept { return reads_; }

 private:
  fs::path path_;
  std::ifstream in_;
  BucketIndex index_;
  std::size_t reads_ = 0;
};

inline std::vector<Edge> read_bucket(const fs::path& store, std::uint32_t i, std::uint32_t j) {
  BucketStore s(store);
  return s.read(i, j);
}

struct FeatureExtent {
  std::uint64_t start = 0;
  std::uint64_t count = 0;
};

struct FeatureLayout {
  std::uint32_t record_width = 0;
  std::vector<std::uint64_t> permutation;  // node id -> record slot
  std::vector<FeatureExtent> extents;      // per partition

  Count num_nodes() const noexcept { return permutation.size(); }
};

inline void write_layout(const fs::path& p, const FeatureLayout& layout) {
  io::ByteBuilder b;
  b.magic(kLayoutMagic).u32(layout.record_width).u64(layout.permutation.size());
  for (auto s : layout.permutation) b.u64(s);
  b.u32(static_cast<std::uint32_t>(layout.extents.size()));
  for (const auto& e : layout.extents) b.u64(e.start).u64(e.count);
  io::write_all(p, b.bytes());
}

inline FeatureLayout read_layout(const fs::path& p) {
  auto bytes = io::read_all(p);
  io::ByteCursor c(bytes);
  c.expect_magic(kLayoutMagic, p.string());
  FeatureLayout l;
  l.record_width = c.u32();
  const Count n = c.u64();
  if (bytes.size() < 16 + 8 * n) throw DataError("truncated feature layout: " + p.string());
  l.permutation.resize(n);
  for (auto& s : l.permutation) s = c.u64();
  l.extents.resize(c.u32());
  for (auto& e : l.extents) e = {c.u64(), c.u64()};
  if (c.position() != bytes.size()) throw DataError("trailing bytes in feature layout: " + p.string());
  return l;
}

// Stable grouping: partition 0's records first, each partition in ascending
// node id. Writes the grouped file and its layout sidecar.
inline FeatureLayout reorder_features(const fs::path& features, const Labeling& labeling, std::uint32_t record_width,
                                      const fs::path& out) {
  if (record_width == 0) throw UsageError("record width must be positive");
  const Count n = labeling.labels.size();
  if (io::byte_size(features) != n * record_width)
    throw DataError("feature file length " + std::to_string(io::byte_size(features)) + " != num_nodes * width " +
                    std::to_string(n * record_width));
  FeatureLayout layout;
  layout.record_width = record_width;
  layout.extents.assign(labeling.num_parts, {});
  for (auto l : labeling.labels) {
    if (l >= labeling.num_parts) throw DataError("every node needs a partition label to group features");
    ++layout.extents[l].count;
  }
  std::uint64_t start = 0;
  for (auto& e : layout.extents) {
    e.start = start;
    start += e.count;
  }
  layout.permutation.resize(n);
  std::vector<std::uint64_t> cursor(labeling.num_parts);
  for (std::size_t i = 0; i < cursor.size(); ++i) cursor[i] = layout.extents[i].start;
  for (Count v = 0; v < n; ++v) layout.permutation[v] = cursor[labeling.labels[v]]++;

  auto in = io::open_in(features);
  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + out.string());
  std::vector<std::uint8_t> rec(record_width);
  for (Count v = 0; v < n; ++v) {
    io::read_exact(in, rec.data(), record_width, features);
    os.seekp(static_cast<std::streamoff>(layout.permutation[v] * record_width));
    io::write_bytes(os, rec, out);
  }
  os.close();
  if (!os) throw IoError("write failed: " + out.string());
  write_layout(feature_layout_path(out), layout);
  return layout;
}

inline std::vector<std::uint8_t> read_feature(const fs::path& grouped, const FeatureLayout& layout, NodeId node) {
  if (node >= layout.num_nodes()) throw UsageError("node out of range");
  auto in = io::open_in(grouped);
  in.seekg(static_cast<std::streamoff>(layout.permutation[node] * layout.record_width));
  std::vector<std::uint8_t> rec(layout.record_width);
  io::read_exact(in, rec.data(), rec.size(), grouped);
  return rec;
}

}  // namespace grem
