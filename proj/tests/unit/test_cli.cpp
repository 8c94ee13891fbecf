#include <gtest/gtest.h>

#include <algorithm>
#include <json.hpp>
#include <random>
#include <sstream>

#include "grem/edge_stream.hpp"
#include "grem/labels.hpp"
#include "grem/partition_store.hpp"
#include "support/cli_runner.hpp"
#include "support/random_graphs.hpp"
#include "support/temp_dir.hpp"

namespace grem {
namespace {

using json = nlohmann::json;
using testing::run_cli;
using testing::TempDir;

std::string q(const fs::path& p) { return testing::shell_quote(p.string()); }

json run_json(const std::string& args) {
  auto r = run_cli(args + " --json");
  EXPECT_EQ(r.exit_code, 0) << args;
  return r.exit_code == 0 ? json::parse(r.out) : json::object();
}

void two_cliques(const TempDir& dir) {
  ASSERT_EQ(run_cli("generate clique-union --blocks 2 --block-size 16 --bridges 1 -o " + q(dir / "g.bin") +
                    " --labels-out " + q(dir / "truth.lab"))
                .exit_code,
            0);
}

TEST(Cli, TwoCliquesFullChunkCutsOneEdge) {
  TempDir dir;
  two_cliques(dir);
  auto r = run_json("partition " + q(dir / "g.bin") + " --parts 2 --chunk-frac 1.0 -o " + q(dir / "l.lab"));
  EXPECT_EQ(r["cut_edges"], 1);
  EXPECT_EQ(r["partition_sizes"], json::array({16, 16}));
  EXPECT_TRUE(fs::exists(dir / "l.lab.manifest.json"));
  EXPECT_EQ(r["manifest"]["command"], "partition");
  EXPECT_EQ(r["manifest"]["outputs"].size(), 1u);
}

TEST(Cli, NoRefineMatchesRefineOnOneChunk) {
  TempDir dir;
  two_cliques(dir);
  run_json("partition " + q(dir / "g.bin") + " --chunk-frac 1.0 -o " + q(dir / "a.lab"));
  run_json("partition " + q(dir / "g.bin") + " --chunk-frac 1.0 --no-refine -o " + q(dir / "b.lab"));
  EXPECT_EQ(io::read_all(dir / "a.lab"), io::read_all(dir / "b.lab"));
}

TEST(Cli, RerunGivesSameLabelDigest) {
  TempDir dir;
  run_cli("generate sbm --blocks 2 --block-size 300 --p-in 0.05 --p-out 0.002 --rng-seed 3 -o " + q(dir / "raw.bin"));
  run_cli("shuffle " + q(dir / "raw.bin") + " --rng-seed 4 -o " + q(dir / "g.bin"));
  const std::string flags = " --parts 4 --chunk-frac 0.1 --capacity-slack 0.1 --rng-seed 9 --seed-algo random";
  auto a = run_json("partition " + q(dir / "g.bin") + flags + " -o " + q(dir / "a.lab"));
  auto b = run_json("partition " + q(dir / "g.bin") + flags + " -o " + q(dir / "b.lab"));
  EXPECT_EQ(a["manifest"]["outputs"][(dir / "a.lab").string()], b["manifest"]["outputs"][(dir / "b.lab").string()]);
  EXPECT_EQ(a["manifest"]["inputs"], b["manifest"]["inputs"]);
  EXPECT_EQ(a["manifest"]["config"], b["manifest"]["config"]);
}

TEST(Cli, PredictAtFullChunkIsTwiceTheCut) {
  TempDir dir;
  two_cliques(dir);
  auto r = run_json("predict " + q(dir / "g.bin") + " --labels " + q(dir / "truth.lab") + " --xs 1.0 --multiplier 1");
  ASSERT_EQ(r["curve"].size(), 1u);
  EXPECT_EQ(r["curve"][0]["expected_cuts"].get<double>(), 2.0 * r["reference_cut_edges"].get<double>());
}

TEST(Cli, PredictCsvColumns) {
  TempDir dir;
  two_cliques(dir);
  auto r = run_cli("predict " + q(dir / "g.bin") + " --labels " + q(dir / "truth.lab") + " --xs 0.1,0.5,1.0");
  ASSERT_EQ(r.exit_code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,expected_cuts,expected_cut_fraction,multiplier");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Cli, PredictDoubledDrawsNeverWorse) {
  TempDir dir;
  run_cli("generate sbm --blocks 2 --block-size 200 --p-in 0.05 --p-out 0.005 --rng-seed 1 -o " + q(dir / "g.bin") +
          " --labels-out " + q(dir / "truth.lab"));
  auto r = run_json("predict " + q(dir / "g.bin") + " --labels " + q(dir / "truth.lab") +
                    " --xs 0.01,0.05,0.1,0.2,0.5,0.9 --multiplier 1,2");
  const auto& c = r["curve"];
  ASSERT_EQ(c.size(), 12u);
  for (std::size_t i = 0; i < 6; ++i)
    EXPECT_LE(c[i + 6]["expected_cuts"].get<double>(), c[i]["expected_cuts"].get<double>()) << i;
}

TEST(Cli, PredictNonIncreasingForMajorityConsistentLabels) {
  TempDir dir;
  two_cliques(dir);
  auto r = run_json("predict " + q(dir / "g.bin") + " --labels " + q(dir / "truth.lab") +
                    " --xs 0.02,0.05,0.1,0.2,0.3,0.5,0.7,1.0");
  const auto& c = r["curve"];
  for (std::size_t i = 1; i < c.size(); ++i)
    EXPECT_LE(c[i]["expected_cuts"].get<double>(), c[i - 1]["expected_cuts"].get<double>()) << i;
}

TEST(Cli, PredictRejectsNonBisection) {
  TempDir dir;
  run_cli("generate clique-union --blocks 4 --block-size 4 -o " + q(dir / "g.bin") + " --labels-out " +
          q(dir / "l.lab"));
  EXPECT_EQ(run_cli("predict " + q(dir / "g.bin") + " --labels " + q(dir / "l.lab")).exit_code, 3);
}

TEST(Cli, CutStatsOfSingleLabelIsZero) {
  TempDir dir;
  two_cliques(dir);
  write_labels(dir / "same.lab", std::vector<std::uint32_t>(32, 0), 2);
  auto r = run_json("cut-stats " + q(dir / "g.bin") + " --labels " + q(dir / "same.lab"));
  EXPECT_EQ(r["cut_fraction"], 0.0);
  EXPECT_EQ(r["cut_edges"], 0);
}

TEST(Cli, BucketsRoundTrip) {
  TempDir dir;
  auto edges = testing::random_edges(200, 2000, 5);
  auto f = write_binary_edges(dir / "g.bin", 200, edges);
  std::mt19937_64 rng(5);
  std::vector<std::uint32_t> labels(200);
  for (auto& l : labels) l = static_cast<std::uint32_t>(rng() % 4);
  write_labels(dir / "l.lab", labels, 4);
  auto r = run_json("buckets " + q(f.path) + " --labels " + q(dir / "l.lab") + " -o " + q(dir / "b.grpb") +
                    " --buffer-edges 100");
  EXPECT_EQ(r["edges"], 2000);
  BucketStore store(dir / "b.grpb");
  std::vector<Edge> all;
  for (std::uint32_t i = 0; i < 4; ++i)
    for (std::uint32_t j = 0; j < 4; ++j)
      for (const Edge& e : store.read(i, j)) {
        EXPECT_EQ(labels[e.src], i);
        EXPECT_EQ(labels[e.dst], j);
        all.push_back(e);
      }
  std::sort(all.begin(), all.end());
  std::sort(edges.begin(), edges.end());
  EXPECT_EQ(all, edges);
}

TEST(Cli, FeaturesRoundTrip) {
  TempDir dir;
  std::vector<std::uint8_t> recs(10 * 3);
  for (std::size_t i = 0; i < recs.size(); ++i) recs[i] = static_cast<std::uint8_t>(i);
  io::write_all(dir / "f.bin", recs);
  write_labels(dir / "l.lab", std::vector<std::uint32_t>{1, 0, 1, 0, 1, 0, 1, 0, 1, 0}, 2);
  run_json("features " + q(dir / "f.bin") + " --labels " + q(dir / "l.lab") + " --record-width 3 -o " +
           q(dir / "g.bin"));
  auto layout = read_layout(feature_layout_path(dir / "g.bin"));
  for (NodeId v = 0; v < 10; ++v) {
    auto rec = read_feature(dir / "g.bin", layout, v);
    EXPECT_EQ(rec, std::vector<std::uint8_t>(recs.begin() + static_cast<long>(3 * v),
                                             recs.begin() + static_cast<long>(3 * v + 3)));
  }
}

TEST(Cli, PlanWithOneWorkerIsOneLine) {
  auto r = run_cli("plan --parts 4 --workers 1");
  ASSERT_EQ(r.exit_code, 0);
  ASSERT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
  ASSERT_EQ(r.out.substr(0, 3), "0: ");
  std::string ids = r.out.substr(3);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, "\n,,,0123");
}

TEST(Cli, PlanReplicationAndCommEstimate) {
  TempDir dir;
  run_cli("generate sbm --blocks 2 --block-size 100 --p-in 0.1 --p-out 0.01 -o " + q(dir / "g.bin") +
          " --labels-out " + q(dir / "l.lab"));
  ASSERT_EQ(run_cli("plan --labels " + q(dir / "l.lab") + " --workers 2 -o " + q(dir / "plan.txt")).exit_code, 0);
  auto some = run_json("comm-estimate " + q(dir / "g.bin") + " --labels " + q(dir / "l.lab") + " --plan " +
                       q(dir / "plan.txt") + " --seeds 50");
  EXPECT_GT(some["remote"].get<int>(), 0);
  ASSERT_EQ(run_cli("plan --labels " + q(dir / "l.lab") + " --workers 2 --replicate 200 --graph " + q(dir / "g.bin") +
                    " -o " + q(dir / "full.txt"))
                .exit_code,
            0);
  auto none = run_json("comm-estimate " + q(dir / "g.bin") + " --labels " + q(dir / "l.lab") + " --plan " +
                       q(dir / "full.txt") + " --seeds 50");
  EXPECT_EQ(none["remote"], 0);
  EXPECT_GT(none["local"].get<int>(), 0);
}

TEST(Cli, ConvertRoundTrip) {
  TempDir dir;
  auto f = write_binary_edges(dir / "g.bin", 30, testing::random_edges(30, 100, 2));
  ASSERT_EQ(run_cli("convert " + q(f.path) + " --to text -o " + q(dir / "g.txt")).exit_code, 0);
  ASSERT_EQ(run_cli("convert " + q(dir / "g.txt") + " --to binary -o " + q(dir / "h.bin")).exit_code, 0);
  EXPECT_EQ(io::read_all(dir / "g.bin"), io::read_all(dir / "h.bin"));
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  two_cliques(dir);
  EXPECT_EQ(run_cli("").exit_code, 2);
  EXPECT_EQ(run_cli("partition").exit_code, 2);
  EXPECT_EQ(run_cli("partition " + q(dir / "g.bin") + " -o " + q(dir / "l.lab") + " --chunk-frac 0.5 --chunk-edges 3")
                .exit_code,
            2);
  EXPECT_EQ(run_cli("partition " + q(dir / "g.bin") + " -o " + q(dir / "l.lab") + " --parts 3").exit_code, 2);
  EXPECT_EQ(run_cli("partition " + q(dir / "missing.bin") + " -o " + q(dir / "l.lab")).exit_code, 4);
  io::write_all(dir / "bad.lab", std::vector<std::uint8_t>{'G', 'R', 'P', 'L', 9});
  EXPECT_EQ(run_cli("cut-stats " + q(dir / "g.bin") + " --labels " + q(dir / "bad.lab")).exit_code, 3);
  EXPECT_EQ(run_cli("partition " + q(dir / "g.bin") + " -o " + q(dir / "nodir" / "l.lab")).exit_code, 4);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
}

TEST(Cli, WorkdirFromEnvironment) {
  TempDir dir;
  two_cliques(dir);
  io::write_all(dir / "blocker", std::vector<std::uint8_t>{1});
  const std::string args = "partition " + q(dir / "g.bin") + " --parts 4 -o " + q(dir / "l.lab");
  EXPECT_EQ(run_cli(args, "GREM_WORKDIR=" + q(dir / "blocker")).exit_code, 4);
  EXPECT_EQ(run_cli(args, "GREM_WORKDIR=" + q(dir / "scratch")).exit_code, 0);
  EXPECT_TRUE(fs::is_empty(dir / "scratch"));
}

TEST(Cli, HumanReportListsCutAndSizes) {
  TempDir dir;
  two_cliques(dir);
  auto r = run_cli("partition " + q(dir / "g.bin") + " -o " + q(dir / "l.lab"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("cut_fraction: "), std::string::npos);
  EXPECT_NE(r.out.find("partition_sizes: 16 16"), std::string::npos);
  EXPECT_NE(r.out.find("balance_ratio: "), std::string::npos);
}

}  // namespace
}  // namespace grem
