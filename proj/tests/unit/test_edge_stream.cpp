#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "grem/edge_stream.hpp"
#include "support/random_graphs.hpp"
#include "support/temp_dir.hpp"

namespace grem {
namespace {

using testing::TempDir;

std::vector<Edge> sorted(std::vector<Edge> e) {
  std::sort(e.begin(), e.end());
  return e;
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

TEST(Convert, TextToBinaryWithGivenNodeCount) {
  TempDir dir;
  write_file(dir / "g.txt", "0 1\n1 2\n");
  auto in = EdgeFile::open(dir / "g.txt", 3);
  EXPECT_EQ(in.format, EdgeFormat::text);
  auto out = convert(in, dir / "g.bin", EdgeFormat::binary);
  auto reopened = EdgeFile::open(dir / "g.bin");
  EXPECT_EQ(reopened.format, EdgeFormat::binary);
  EXPECT_EQ(reopened.meta.num_nodes, 3u);
  EXPECT_EQ(reopened.meta.num_edges, 2u);
  EXPECT_EQ(read_all_edges(reopened), (std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_EQ(out.meta, reopened.meta);
}

TEST(Convert, EmptyEdgeList) {
  TempDir dir;
  auto f = write_binary_edges(dir / "e.bin", 5, {});
  auto reopened = EdgeFile::open(dir / "e.bin");
  EXPECT_EQ(reopened.meta.num_nodes, 5u);
  EXPECT_EQ(reopened.meta.num_edges, 0u);
  EXPECT_EQ(io::byte_size(dir / "e.bin"), kEdgeHeaderBytes);
  EXPECT_EQ(f.meta, reopened.meta);
}

TEST(Convert, TextInfersNodeCount) {
  TempDir dir;
  write_file(dir / "g.txt", "# a comment\n3 7\n\n 2   1 \n");
  auto f = EdgeFile::open(dir / "g.txt");
  EXPECT_EQ(f.meta.num_nodes, 8u);
  EXPECT_EQ(read_all_edges(f), (std::vector<Edge>{{3, 7}, {2, 1}}));
}

TEST(Convert, TextNodesCommentWins) {
  TempDir dir;
  write_file(dir / "g.txt", "# nodes 20 edges 1\n0 1\n");
  EXPECT_EQ(EdgeFile::open(dir / "g.txt").meta.num_nodes, 20u);
}

TEST(Convert, MalformedLineReportsLineNumber) {
  TempDir dir;
  write_file(dir / "g.txt", "0 1\n1 x\n");
  try {
    EdgeFile::open(dir / "g.txt");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Convert, IdBeyondNodeCountIsRejected) {
  TempDir dir;
  write_file(dir / "g.txt", "0 5\n");
  EXPECT_THROW(EdgeFile::open(dir / "g.txt", 3), DataError);
}

TEST(Convert, NarrowWidthOverflowIsRejected) {
  TempDir dir;
  const std::vector<Edge> e{{0, (NodeId{1} << 33)}};
  EXPECT_THROW(write_binary_edges(dir / "g.bin", (Count{1} << 34), e, IdWidth::u32), DataError);
}

TEST(Convert, RoundTripBinaryTextBinary) {
  TempDir dir;
  auto edges = testing::random_edges(100, 1000, 7);
  auto a = write_binary_edges(dir / "a.bin", 100, edges);
  auto t = convert(a, dir / "a.txt", EdgeFormat::text);
  auto b = convert(EdgeFile::open(dir / "a.txt"), dir / "b.bin", EdgeFormat::binary);
  EXPECT_EQ(read_all_edges(b), edges);
  EXPECT_EQ(io::read_all(dir / "a.bin"), io::read_all(dir / "b.bin"));
  (void)t;
}

TEST(Convert, SixtyFourBitIds) {
  TempDir dir;
  const Count n = (Count{1} << 33);
  const std::vector<Edge> e{{n - 1, 0}, {5, n - 2}};
  write_binary_edges(dir / "w.bin", n, e);
  auto f = EdgeFile::open(dir / "w.bin");
  EXPECT_EQ(f.meta.id_width, IdWidth::u64);
  EXPECT_EQ(read_all_edges(f), e);
}

TEST(EdgeFile, TruncatedPayloadIsRejected) {
  TempDir dir;
  write_binary_edges(dir / "g.bin", 10, testing::random_edges(10, 5, 1));
  auto bytes = io::read_all(dir / "g.bin");
  bytes.resize(bytes.size() - 3);
  io::write_all(dir / "g.bin", bytes);
  EXPECT_THROW(EdgeFile::open(dir / "g.bin"), DataError);
}

TEST(EdgeFile, MissingFileIsIoError) {
  EXPECT_THROW(EdgeFile::open("/nonexistent/graph.bin"), IoError);
}

TEST(Shuffle, IsAPermutation) {
  TempDir dir;
  auto edges = testing::random_edges(10, 10, 3);
  auto in = write_binary_edges(dir / "in.bin", 10, edges);
  auto out = external_shuffle(in, dir / "out.bin", 1 << 16, 42);
  EXPECT_EQ(sorted(read_all_edges(out)), sorted(edges));
}

TEST(Shuffle, DeterministicPerSeed) {
  TempDir dir;
  auto in = write_binary_edges(dir / "in.bin", 50, testing::random_edges(50, 5000, 3));
  external_shuffle(in, dir / "a.bin", 4096, 9);
  external_shuffle(in, dir / "b.bin", 4096, 9);
  external_shuffle(in, dir / "c.bin", 4096, 10);
  EXPECT_EQ(io::read_all(dir / "a.bin"), io::read_all(dir / "b.bin"));
  EXPECT_NE(io::read_all(dir / "a.bin"), io::read_all(dir / "c.bin"));
}

TEST(Shuffle, MultiBucketRespectsBudget) {
  TempDir dir;
  auto edges = testing::random_edges(1000, 20000, 5);
  auto in = write_binary_edges(dir / "in.bin", 1000, edges);
  ShuffleStats stats;
  const std::size_t budget = 8192;
  auto out = external_shuffle(in, dir / "out.bin", budget, 1, &stats);
  EXPECT_GT(stats.buckets, 1u);
  EXPECT_LE(stats.peak_resident_bytes, budget);
  EXPECT_EQ(sorted(read_all_edges(out)), sorted(edges));
  // Spill files are cleaned up.
  std::size_t files = 0;
  for ([[maybe_unused]] auto& e : fs::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 2u);
}

TEST(Shuffle, BudgetBelowOneBlockIsRejected) {
  TempDir dir;
  auto in = write_binary_edges(dir / "in.bin", 4, testing::random_edges(4, 4, 1));
  EXPECT_THROW(external_shuffle(in, dir / "out.bin", 1024, 1), UsageError);
}

TEST(Shuffle, BudgetTooSmallForBucketsIsRejected) {
  TempDir dir;
  auto in = write_binary_edges(dir / "in.bin", 100, testing::random_edges(100, 200000, 1));
  EXPECT_THROW(external_shuffle(in, dir / "out.bin", 4096, 1), UsageError);
}

// Position of a marked edge over 1000 seeds; chi-squared with 9 degrees of
// freedom, critical value 21.666 at alpha = 0.01.
TEST(Shuffle, MarkedEdgePositionIsUniform) {
  TempDir dir;
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 10; ++i) edges.push_back({i, i + 1});
  auto in = write_binary_edges(dir / "in.bin", 11, edges);
  std::array<int, 10> hits{};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto out = external_shuffle(in, dir / "out.bin", 4096, seed);
    auto got = read_all_edges(out);
    hits[std::find(got.begin(), got.end(), Edge{0, 1}) - got.begin()]++;
  }
  double chi2 = 0;
  for (int h : hits) chi2 += (h - 100.0) * (h - 100.0) / 100.0;
  EXPECT_LT(chi2, 21.666);
}

// Same statistic when every shuffle takes the multi-bucket path.
TEST(Shuffle, MarkedEdgePositionIsUniformAcrossBuckets) {
  TempDir dir;
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 600; ++i) edges.push_back({i, i + 1});
  auto in = write_binary_edges(dir / "in.bin", 601, edges);
  std::array<int, 10> hits{};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    ShuffleStats st;
    auto out = external_shuffle(in, dir / "out.bin", 4096, seed, &st);
    ASSERT_GT(st.buckets, 1u);
    auto got = read_all_edges(out);
    const auto pos = std::find(got.begin(), got.end(), Edge{0, 1}) - got.begin();
    hits[static_cast<std::size_t>(pos / 60)]++;
  }
  double chi2 = 0;
  for (int h : hits) chi2 += (h - 100.0) * (h - 100.0) / 100.0;
  EXPECT_LT(chi2, 21.666);
}

TEST(ChunkPlan, Arithmetic) {
  auto p = ChunkPlan::by_edges(7, 3);
  EXPECT_EQ(p.num_chunks, 3u);
  EXPECT_EQ(ChunkPlan::by_edges(7, 100).num_chunks, 1u);
  EXPECT_EQ(ChunkPlan::by_fraction(1000, 0.01).chunk_size, 10u);
  EXPECT_EQ(ChunkPlan::by_fraction(5, 0.01).chunk_size, 1u);
  EXPECT_THROW(ChunkPlan::by_edges(7, 0), UsageError);
  EXPECT_THROW(ChunkPlan::by_fraction(7, 0.0), UsageError);
}

TEST(ChunkStream, YieldsChunksInOrder) {
  TempDir dir;
  auto edges = testing::random_edges(10, 7, 2);
  auto f = write_binary_edges(dir / "g.bin", 10, edges);
  for (bool prefetch : {false, true}) {
    ChunkStream s(f, ChunkPlan::by_edges(7, 3), nullptr, prefetch);
    std::vector<std::size_t> sizes;
    std::vector<Edge> all;
    while (auto c = s.next()) {
      EXPECT_EQ(c->index(), sizes.size());
      sizes.push_back(c->edges().size());
      all.insert(all.end(), c->edges().begin(), c->edges().end());
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 1}));
    EXPECT_EQ(all, edges);
  }
}

TEST(ChunkStream, FullChunk) {
  TempDir dir;
  auto f = write_binary_edges(dir / "g.bin", 10, testing::random_edges(10, 7, 2));
  ChunkStream s(f, ChunkPlan::by_edges(7, 7));
  ASSERT_TRUE(s.next().has_value());
  EXPECT_FALSE(s.next().has_value());
}

TEST(ChunkStream, ResidentEdgesStayWithinTwoChunks) {
  TempDir dir;
  auto f = write_binary_edges(dir / "g.bin", 1000, testing::random_edges(1000, 1000000, 4));
  ResidentMeter meter;
  ChunkStream s(f, ChunkPlan::by_edges(1000000, 10000), &meter, true);
  std::size_t chunks = 0;
  while (auto c = s.next()) ++chunks;
  EXPECT_EQ(chunks, 100u);
  EXPECT_LE(meter.peak(), 20000u);
  EXPECT_GE(meter.peak(), 10000u);
  EXPECT_EQ(meter.current(), 0u);
}

TEST(ChunkStream, TextInput) {
  TempDir dir;
  write_file(dir / "g.txt", "0 1\n1 2\n2 3\n");
  ChunkStream s(EdgeFile::open(dir / "g.txt"), ChunkPlan::by_edges(3, 2));
  auto a = s.next();
  auto b = s.next();
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->edges().size(), 2u);
  EXPECT_EQ(b->edges()[0], (Edge{2, 3}));
  EXPECT_FALSE(s.next());
}

}  // namespace
}  // namespace grem
