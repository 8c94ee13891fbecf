#pragma once

// External-memory edge list I/O.
//
// Binary edge file (little-endian):
//   "GRPE" | version u32 = 1 | flags u32 (bit 0: 64-bit ids) | num_nodes u64 | num_edges u64
//   followed by num_edges (src, dst) pairs of u32 or u64.
// Text edge file: one "src dst" pair per line, '#' lines are comments. A
// leading "# nodes N edges M" comment, when present, supplies num_nodes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "grem/error.hpp"
#include "grem/io_util.hpp"
#include "grem/types.hpp"

namespace grem {

namespace fs = std::filesystem;

enum class EdgeFormat { text, binary };

inline constexpr std::string_view kEdgeMagic = "GRPE";
inline constexpr std::uint32_t kEdgeVersion = 1;
inline constexpr std::size_t kEdgeHeaderBytes = 4 + 4 + 4 + 8 + 8;

namespace detail {

inline std::vector<std::uint8_t> encode_edge_header(const GraphMeta& m) {
  io::ByteBuilder b;
  b.magic(kEdgeMagic).u32(kEdgeVersion).u32(m.id_width == IdWidth::u64 ? 1u : 0u);
  b.u64(m.num_nodes).u64(m.num_edges);
  return {b.bytes().begin(), b.bytes().end()};
}

inline bool has_edge_magic(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + p.string());
  char m[4] = {};
  in.read(m, 4);
  return in.gcount() == 4 && std::string_view(m, 4) == kEdgeMagic;
}

inline GraphMeta read_binary_meta(const fs::path& p) {
  auto in = io::open_in(p);
  std::uint8_t raw[kEdgeHeaderBytes];
  in.read(reinterpret_cast<char*>(raw), kEdgeHeaderBytes);
  if (static_cast<std::size_t>(in.gcount()) != kEdgeHeaderBytes)
    throw DataError("truncated edge file header: " + p.string());
  io::ByteCursor c({raw, kEdgeHeaderBytes});
  c.expect_magic(kEdgeMagic, p.string());
  if (auto v = c.u32(); v != kEdgeVersion)
    throw DataError("unsupported edge file version " + std::to_string(v));
  const auto flags = c.u32();
  if (flags & ~1u) throw DataError("unknown edge file flags: " + p.string());
  GraphMeta m;
  m.id_width = (flags & 1u) ? IdWidth::u64 : IdWidth::u32;
  m.num_nodes = c.u64();
  m.num_edges = c.u64();
  m.validate();
  const auto expected = kEdgeHeaderBytes + m.num_edges * edge_record_bytes(m.id_width);
  const auto actual = io::byte_size(p);
  if (actual < expected) throw DataError("truncated edge file (payload shorter than header claims): " + p.string());
  if (actual > expected) throw DataError("edge file has trailing bytes: " + p.string());
  return m;
}

inline void put_id(std::uint8_t* out, NodeId id, IdWidth w) noexcept {
  if (w == IdWidth::u32)
    io::put_u32(out, static_cast<std::uint32_t>(id));
  else
    io::put_u64(out, id);
}

inline NodeId get_id(const std::uint8_t* in, IdWidth w) noexcept {
  return w == IdWidth::u32 ? io::get_u32(in) : io::get_u64(in);
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Parses "src dst"; returns nullopt for blank and comment lines.
inline std::optional<Edge> parse_edge_line(std::string_view line, std::size_t line_no) {
  line = trim(line);
  if (line.empty() || line.front() == '#') return std::nullopt;
  auto fail = [&]() -> DataError {
    return DataError("malformed edge at line " + std::to_string(line_no) + ": '" + std::string(line) + "'");
  };
  Edge e;
  const char* p = line.data();
  const char* end = p + line.size();
  auto r1 = std::from_chars(p, end, e.src);
  if (r1.ec != std::errc{} || r1.ptr == end || (*r1.ptr != ' ' && *r1.ptr != '\t')) throw fail();
  p = r1.ptr;
  while (p != end && (*p == ' ' || *p == '\t')) ++p;
  auto r2 = std::from_chars(p, end, e.dst);
  if (r2.ec != std::errc{} || r2.ptr != end) throw fail();
  return e;
}

// Reads "# nodes N ..." from a comment line.
inline std::optional<Count> parse_nodes_comment(std::string_view line) {
  line = trim(line);
  constexpr std::string_view prefix = "# nodes ";
  if (line.substr(0, prefix.size()) != prefix) return std::nullopt;
  line.remove_prefix(prefix.size());
  Count n = 0;
  auto r = std::from_chars(line.data(), line.data() + line.size(), n);
  if (r.ec != std::errc{}) return std::nullopt;
  return n;
}

}  // namespace detail

struct EdgeFile {
  fs::path path;
  GraphMeta meta;
  EdgeFormat format = EdgeFormat::binary;

  // Opens a binary or text edge file. For text input without a nodes comment,
  // num_nodes is taken from the hint or inferred as max id + 1.
  static EdgeFile open(const fs::path& p, std::optional<Count> num_nodes_hint = std::nullopt) {
    if (!fs::exists(p)) throw IoError("no such file: " + p.string());
    if (detail::has_edge_magic(p)) {
      EdgeFile f{p, detail::read_binary_meta(p), EdgeFormat::binary};
      if (num_nodes_hint && *num_nodes_hint != f.meta.num_nodes)
        throw DataError("num_nodes hint disagrees with binary header: " + p.string());
      return f;
    }
    return scan_text(p, num_nodes_hint);
  }

 private:
  static EdgeFile scan_text(const fs::path& p, std::optional<Count> hint) {
    auto in = io::open_in(p);
    std::string line;
    std::size_t line_no = 0;
    Count edges = 0;
    NodeId max_id = 0;
    bool any = false;
    std::optional<Count> declared;
    while (std::getline(in, line)) {
      ++line_no;
      if (!any && edges == 0 && !declared) declared = detail::parse_nodes_comment(line);
      auto e = detail::parse_edge_line(line, line_no);
      if (!e) continue;
      ++edges;
      max_id = std::max({max_id, e->src, e->dst});
      any = true;
    }
    if (in.bad()) throw IoError("read failed: " + p.string());
    GraphMeta m;
    m.num_edges = edges;
    if (hint)
      m.num_nodes = *hint;
    else if (declared)
      m.num_nodes = *declared;
    else
      m.num_nodes = any ? max_id + 1 : 1;
    if (any && max_id >= m.num_nodes)
      throw DataError("edge id " + std::to_string(max_id) + " exceeds num_nodes " + std::to_string(m.num_nodes));
    m.id_width = width_for(m.num_nodes);
    m.validate();
    return EdgeFile{p, m, EdgeFormat::text};
  }
};

// Buffered writer for the binary edge format. The header is patched with
// the final edge count by finish().
class EdgeWriter {
 public:
  EdgeWriter(const fs::path& p, Count num_nodes, IdWidth width)
      : path_(p), out_(io::open_out(p)), width_(width), rec_(edge_record_bytes(width)) {
    meta_.num_nodes = num_nodes;
    meta_.id_width = width;
    meta_.validate();
    auto h = detail::encode_edge_header(meta_);
    io::write_bytes(out_, h, path_);
    buf_.reserve(kBufferRecords * rec_);
  }
  EdgeWriter(const fs::path& p, Count num_nodes) : EdgeWriter(p, num_nodes, width_for(num_nodes)) {}

  EdgeWriter(const EdgeWriter&) = delete;
  EdgeWriter& operator=(const EdgeWriter&) = delete;
  ~EdgeWriter() {
    if (!finished_) {
      try {
        finish();
      } catch (...) {
      }
    }
  }

  void write(const Edge& e) {
    meta_.check_edge(e);
    const auto at = buf_.size();
    buf_.resize(at + rec_);
    detail::put_id(buf_.data() + at, e.src, width_);
    detail::put_id(buf_.data() + at + id_bytes(width_), e.dst, width_);
    ++meta_.num_edges;
    if (buf_.size() >= kBufferRecords * rec_) flush();
  }
  void write(std::span<const Edge> edges) {
    for (const Edge& e : edges) write(e);
  }

  EdgeFile finish() {
    if (!finished_) {
      flush();
      out_.seekp(0);
      io::write_bytes(out_, detail::encode_edge_header(meta_), path_);
      out_.close();
      if (!out_) throw IoError("close failed: " + path_.string());
      finished_ = true;
    }
    return EdgeFile{path_, meta_, EdgeFormat::binary};
  }

  Count edges_written() const noexcept { return meta_.num_edges; }

 private:
  static constexpr std::size_t kBufferRecords = 1 << 14;

  void flush() {
    io::write_bytes(out_, buf_, path_);
    buf_.clear();
  }

  fs::path path_;
  std::ofstream out_;
  GraphMeta meta_;
  IdWidth width_;
  std::size_t rec_;
  std::vector<std::uint8_t> buf_;
  bool finished_ = false;
};

// Sequential reader over either edge format.
class EdgeReader {
 public:
  explicit EdgeReader(const EdgeFile& f) : file_(f), in_(io::open_in(f.path)) {
    if (f.format == EdgeFormat::binary) in_.seekg(static_cast<std::streamoff>(kEdgeHeaderBytes));
  }

  // Appends up to max_edges edges to out; returns how many were read.
  std::size_t read(std::vector<Edge>& out, std::size_t max_edges) {
    const std::size_t want =
        static_cast<std::size_t>(std::min<Count>(max_edges, file_.meta.num_edges - consumed_));
    if (want == 0) return 0;
    if (file_.format == EdgeFormat::binary)
      read_binary(out, want);
    else
      read_text(out, want);
    consumed_ += want;
    return want;
  }

  Count consumed() const noexcept { return consumed_; }
  const EdgeFile& file() const noexcept { return file_; }

 private:
  void read_binary(std::vector<Edge>& out, std::size_t want) {
    const IdWidth w = file_.meta.id_width;
    const std::size_t rec = edge_record_bytes(w);
    constexpr std::size_t kBlock = 1 << 14;
    raw_.resize(std::min(want, kBlock) * rec);
    std::size_t left = want;
    while (left > 0) {
      const std::size_t n = std::min(left, kBlock);
      io::read_exact(in_, raw_.data(), n * rec, file_.path);
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* r = raw_.data() + i * rec;
        Edge e{detail::get_id(r, w), detail::get_id(r + id_bytes(w), w)};
        file_.meta.check_edge(e);
        out.push_back(e);
      }
      left -= n;
    }
  }

  void read_text(std::vector<Edge>& out, std::size_t want) {
    std::string line;
    std::size_t got = 0;
    while (got < want) {
      if (!std::getline(in_, line)) throw DataError("text edge file shorter than scanned: " + file_.path.string());
      ++line_no_;
      auto e = detail::parse_edge_line(line, line_no_);
      if (!e) continue;
      file_.meta.check_edge(*e);
      out.push_back(*e);
      ++got;
    }
  }

  EdgeFile file_;
  std::ifstream in_;
  Count consumed_ = 0;
  std::size_t line_no_ = 0;
  std::vector<std::uint8_t> raw_;
};

inline std::vector<Edge> read_all_edges(const EdgeFile& f) {
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(f.meta.num_edges));
  EdgeReader r(f);
  r.read(edges, static_cast<std::size_t>(f.meta.num_edges));
  return edges;
}

inline EdgeFile write_binary_edges(const fs::path& p, Count num_nodes, std::span<const Edge> edges,
                                   std::optional<IdWidth> width = std::nullopt) {
  EdgeWriter w(p, num_nodes, width.value_or(width_for(num_nodes)));
  w.write(edges);
  return w.finish();
}

inline EdgeFile write_text_edges(const fs::path& p, Count num_nodes, std::span<const Edge> edges) {
  GraphMeta m{num_nodes, 0, width_for(num_nodes)};
  m.validate();
  auto out = io::open_out(p);
  out << "# nodes " << num_nodes << " edges " << edges.size() << '\n';
  for (const Edge& e : edges) {
    m.check_edge(e);
    out << e.src << ' ' << e.dst << '\n';
  }
  out.close();
  if (!out) throw IoError("write failed: " + p.string());
  m.num_edges = edges.size();
  return EdgeFile{p, m, EdgeFormat::text};
}

// Rewrites input in the target format, preserving edge order. The id width
// of a binary output defaults to the input's.
inline EdgeFile convert(const EdgeFile& input, const fs::path& output, EdgeFormat target,
                        std::optional<IdWidth> width = std::nullopt) {
  if (fs::exists(output) && fs::equivalent(input.path, output))
    throw UsageError("convert output must differ from input");
  EdgeReader reader(input);
  std::vector<Edge> block;
  constexpr std::size_t kBlock = 1 << 16;
  if (target == EdgeFormat::binary) {
    const IdWidth w = width.value_or(input.meta.id_width);
    if (w == IdWidth::u32 && input.meta.num_nodes > (Count{1} << 32))
      throw DataError("node ids overflow 32-bit width");
    EdgeWriter writer(output, input.meta.num_nodes, w);
    while (reader.read(block, kBlock) > 0) {
      writer.write(block);
      block.clear();
    }
    return writer.finish();
  }
  auto out = io::open_out(output);
  out << "# nodes " << input.meta.num_nodes << " edges " << input.meta.num_edges << '\n';
  while (reader.read(block, kBlock) > 0) {
    for (const Edge& e : block) out << e.src << ' ' << e.dst << '\n';
    block.clear();
  }
  out.close();
  if (!out) throw IoError("write failed: " + output.string());
  GraphMeta m = input.meta;
  m.id_width = width_for(m.num_nodes);
  return EdgeFile{output, m, EdgeFormat::text};
}

struct ShuffleStats {
  Count buckets = 0;
  std::size_t peak_resident_bytes = 0;
};

namespace detail {

// Raw fixed-width records without a header, used for shuffle spill files.
inline constexpr std::size_t kRawBlock = 4096;

inline void write_raw(std::ofstream& out, std::span<const Edge> edges, IdWidth w, const fs::path& p,
                      std::vector<std::uint8_t>& scratch) {
  const std::size_t rec = edge_record_bytes(w);
  for (std::size_t at = 0; at < edges.size(); at += kRawBlock) {
    const std::size_t n = std::min(kRawBlock, edges.size() - at);
    scratch.resize(n * rec);
    for (std::size_t i = 0; i < n; ++i) {
      put_id(scratch.data() + i * rec, edges[at + i].src, w);
      put_id(scratch.data() + i * rec + id_bytes(w), edges[at + i].dst, w);
    }
    io::write_bytes(out, scratch, p);
  }
}

inline void read_raw(std::ifstream& in, std::vector<Edge>& out, std::size_t n, IdWidth w, const fs::path& p,
                     std::vector<std::uint8_t>& scratch) {
  const std::size_t rec = edge_record_bytes(w);
  for (std::size_t at = 0; at < n; at += kRawBlock) {
    const std::size_t k = std::min(kRawBlock, n - at);
    scratch.resize(k * rec);
    io::read_exact(in, scratch.data(), k * rec, p);
    for (std::size_t i = 0; i < k; ++i)
      out.push_back({get_id(scratch.data() + i * rec, w), get_id(scratch.data() + i * rec + id_bytes(w), w)});
  }
}

class ShuffleRun {
 public:
  ShuffleRun(std::size_t budget_edges, IdWidth w, ShuffleStats& stats)
      : budget_(budget_edges), width_(w), stats_(stats) {}

  using Source = std::function<void(std::vector<Edge>&, std::size_t)>;

  // Emits a uniformly random permutation of the n edges produced by `source`.
  void run(const Source& source, Count n, EdgeWriter& out, std::mt19937_64& rng, const fs::path& spill_base,
           int depth) {
    if (n <= budget_) {
      std::vector<Edge> all;
      all.reserve(static_cast<std::size_t>(n));
      note(static_cast<std::size_t>(n));
      source(all, static_cast<std::size_t>(n));
      std::shuffle(all.begin(), all.end(), rng);
      out.write(all);
      return;
    }
    const Count buckets = ceil_div(2 * n, budget_);
    const std::size_t read_block = budget_ / 2;
    const std::size_t per_bucket = static_cast<std::size_t>((budget_ / 2) / buckets);
    if (per_bucket < 1)
      throw UsageError("memory budget too small for " + std::to_string(buckets) + " shuffle buckets");
    note(read_block + per_bucket * static_cast<std::size_t>(buckets));
    stats_.buckets += buckets;

    std::vector<fs::path> paths;
    std::vector<std::ofstream> files;
    std::vector<std::vector<Edge>> bufs(static_cast<std::size_t>(buckets));
    std::vector<Count> counts(static_cast<std::size_t>(buckets), 0);
    for (Count b = 0; b < buckets; ++b) {
      paths.push_back(spill_base.string() + "." + std::to_string(depth) + "." + std::to_string(b) + ".tmp");
      files.push_back(io::open_out(paths.back()));
    }
    struct Cleanup {
      std::vector<fs::path>& p;
      ~Cleanup() {
        for (auto& x : p) {
          std::error_code ec;
          fs::remove(x, ec);
        }
      }
    } cleanup{paths};

    std::uniform_int_distribution<Count> pick(0, buckets - 1);
    std::vector<Edge> block;
    Count left = n;
    while (left > 0) {
      const auto take = static_cast<std::size_t>(std::min<Count>(left, read_block));
      block.clear();
      source(block, take);
      for (const Edge& e : block) {
        const auto b = static_cast<std::size_t>(pick(rng));
        bufs[b].push_back(e);
        ++counts[b];
        if (bufs[b].size() >= per_bucket) {
          write_raw(files[b], bufs[b], width_, paths[b], scratch_);
          bufs[b].clear();
        }
      }
      left -= take;
    }
    for (std::size_t b = 0; b < bufs.size(); ++b) {
      write_raw(files[b], bufs[b], width_, paths[b], scratch_);
      bufs[b] = {};
      files[b].close();
      if (!files[b]) throw IoError("spill write failed (disk full?): " + paths[b].string());
    }
    block = {};

    for (std::size_t b = 0; b < paths.size(); ++b) {
      auto in = io::open_in(paths[b]);
      auto reader = [&](std::vector<Edge>& dst, std::size_t k) { read_raw(in, dst, k, width_, paths[b], scratch_); };
      run(reader, counts[b], out, rng, paths[b], depth + 1);
    }
  }

 private:
  void note(std::size_t resident_edges) {
    stats_.peak_resident_bytes = std::max(stats_.peak_resident_bytes, resident_edges * sizeof(Edge));
  }

  std::size_t budget_;
  IdWidth width_;
  ShuffleStats& stats_;
  std::vector<std::uint8_t> scratch_;
};

}  // namespace detail

inline constexpr std::size_t kIoBlockBytes = 4096;

// Two-pass external shuffle: scatter edges to random spill buckets, then
// shuffle each bucket in memory and append. Buckets that still exceed the
// budget are shuffled recursively. Output is a binary edge file.
inline EdgeFile external_shuffle(const EdgeFile& input, const fs::path& output, std::size_t memory_budget,
                                 std::uint64_t rng_seed, ShuffleStats* stats = nullptr) {
  if (memory_budget < kIoBlockBytes)
    throw UsageError("memory budget must be at least " + std::to_string(kIoBlockBytes) + " bytes");
  if (fs::exists(output) && fs::equivalent(input.path, output))
    throw UsageError("shuffle output must differ from input");
  ShuffleStats local;
  ShuffleStats& st = stats ? *stats : local;
  st = {};
  std::mt19937_64 rng(rng_seed);
  EdgeReader reader(input);
  EdgeWriter writer(output, input.meta.num_nodes, input.meta.id_width);
  detail::ShuffleRun runner(memory_budget / sizeof(Edge), input.meta.id_width, st);
  auto source = [&](std::vector<Edge>& dst, std::size_t k) { reader.read(dst, k); };
  runner.run(source, input.meta.num_edges, writer, rng, output, 0);
  if (st.buckets == 0) st.buckets = 1;
  return writer.finish();
}

struct ChunkPlan {
  Count chunk_size = 1;
  Count num_chunks = 0;

  static ChunkPlan by_edges(Count num_edges, Count chunk_edges) {
    if (chunk_edges < 1) throw UsageError("chunk size must be at least one edge");
    return {chunk_edges, ceil_div(num_edges, chunk_edges)};
  }

  // Chunk of ceil(frac * |E|) edges, at least one.
  static ChunkPlan by_fraction(Count num_edges, double frac) {
    if (!(frac > 0.0 && frac <= 1.0)) throw UsageError("chunk fraction must be in (0, 1]");
    auto size = static_cast<Count>(std::ceil(frac * static_cast<double>(num_edges) - 1e-9));
    return by_edges(num_edges, std::max<Count>(size, 1));
  }
};

// Yields the chunks of an edge file in order. With prefetch enabled, the next
// chunk is read and indexed on a background thread, so at most two chunks are
// resident at once.
class ChunkStream {
 public:
  ChunkStream(const EdgeFile& file, ChunkPlan plan, ResidentMeter* meter = nullptr, bool prefetch = true)
      : reader_(file), plan_(plan), meter_(meter), prefetch_(prefetch) {}

  ChunkStream(const ChunkStream&) = delete;
  ChunkStream& operator=(const ChunkStream&) = delete;

  ~ChunkStream() {
    if (pending_.valid()) pending_.wait();
  }

  std::optional<EdgeChunk> next() {
    std::optional<EdgeChunk> chunk;
    if (pending_.valid())
      chunk = pending_.get();
    else
      chunk = load(next_index_++);
    if (chunk && prefetch_ && next_index_ < plan_.num_chunks) {
      const std::size_t i = next_index_++;
      pending_ = std::async(std::launch::async, [this, i] { return load(i); });
    }
    return chunk;
  }

  const ChunkPlan& plan() const noexcept { return plan_; }

 private:
  std::optional<EdgeChunk> load(std::size_t index) {
    if (index >= plan_.num_chunks) return std::nullopt;
    const Count remaining = reader_.file().meta.num_edges - reader_.consumed();
    const auto n = static_cast<std::size_t>(std::min(plan_.chunk_size, remaining));
    ResidentLease lease(meter_, n);
    std::vector<Edge> edges;
    edges.reserve(n);
    reader_.read(edges, n);
    return EdgeChunk(index, std::move(edges), std::move(lease));
  }

  EdgeReader reader_;
  ChunkPlan plan_;
  ResidentMeter* meter_;
  bool prefetch_;
  std::size_t next_index_ = 0;
  std::future<std::optional<EdgeChunk>> pending_;
};

}  // namespace grem
