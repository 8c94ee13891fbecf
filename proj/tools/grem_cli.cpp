// grem: command-line front end for streaming partitioning, cut prediction,
// partitioned storage and placement.

#include <openssl/evp.h>
#include <sys/resource.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grem/cut_theory.hpp"
#include "grem/edge_stream.hpp"
#include "grem/labels.hpp"
#include "grem/partition_store.hpp"
#include "grem/partitioner.hpp"
#include "grem/placement.hpp"
#include "grem/synth.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw grem::IoError("cannot open for hashing: " + p.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw grem::IoError("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad()) throw grem::IoError("read failed while hashing: " + p.string());
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::uint64_t peak_rss_bytes() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return static_cast<std::uint64_t>(ru.ru_maxrss) * 1024;
}

// One command invocation: records config, inputs, outputs and the report.
struct Run {
  std::string command;
  json config = json::object();
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  json report = json::object();
  std::string manifest_path;
  bool as_json = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  json manifest() const {
    json m;
    m["command"] = command;
    m["config"] = config;
    json in = json::object(), out = json::object();
    for (const auto& p : inputs) in[p.string()] = sha256_file(p);
    for (const auto& p : outputs) out[p.string()] = sha256_file(p);
    m["inputs"] = in;
    m["outputs"] = out;
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m["peak_rss_bytes"] = peak_rss_bytes();
    return m;
  }

  void finish() {
    const json m = manifest();
    fs::path mpath = manifest_path;
    if (mpath.empty() && !outputs.empty()) mpath = outputs.front().string() + ".manifest.json";
    if (!mpath.empty()) {
      std::ofstream f(mpath);
      if (!f) throw grem::IoError("cannot write manifest: " + mpath.string());
      f << m.dump(2) << '\n';
      if (!f) throw grem::IoError("write failed: " + mpath.string());
    }
    if (as_json) {
      json all = report;
      all["manifest"] = m;
      if (!mpath.empty()) all["manifest_path"] = mpath.string();
      std::cout << all.dump(2) << '\n';
      return;
    }
    for (const auto& [k, v] : report.items()) {
      std::cout << k << ": ";
      if (v.is_string()) {
        std::cout << v.get<std::string>();
      } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) std::cout << (i ? " " : "") << v[i].dump();
      } else {
        std::cout << v.dump();
      }
      std::cout << '\n';
    }
    if (!mpath.empty()) std::cout << "manifest: " << mpath.string() << '\n';
  }
};

json cut_json(const grem::CutReport& r) {
  json j;
  j["total_edges"] = r.total_edges;
  j["cut_edges"] = r.cut_edges;
  j["cut_fraction"] = r.cut_fraction;
  j["partition_sizes"] = r.partition_sizes;
  j["balance_ratio"] = r.balance_ratio;
  return j;
}

void merge(json& into, const json& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

grem::EdgeFile open_graph(const std::string& path, std::optional<grem::Count> nodes) {
  return grem::EdgeFile::open(path, nodes);
}

std::optional<grem::Count> opt_nodes(grem::Count v) { return v ? std::optional<grem::Count>(v) : std::nullopt; }

fs::path default_workdir(const std::string& flag, const fs::path& output) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GREM_WORKDIR"); env && *env) return env;
  const auto parent = output.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw grem::IoError("cannot open for writing: " + p.string());
  f << s;
  if (!f) throw grem::IoError("write failed: " + p.string());
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw grem::IoError("cannot open: " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct Common {
  bool json = false;
  std::string manifest;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_flag("--json", c.json, "Print the report as JSON");
  sub->add_option("--manifest", c.manifest, "Manifest path (default: <first output>.manifest.json)");
}

Run make_run(const std::string& name, const Common& c) {
  Run r;
  r.command = name;
  r.as_json = c.json;
  r.manifest_path = c.manifest;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming min-edge-cut graph partitioning"};
  app.require_subcommand(1);
  Common common;
  std::function<void()> action;

  // partition
  struct {
    std::string input, output, workdir, seed_algo = "bfs_grow";
    grem::Count parts = 2, chunk_edges = 0, nodes = 0;
    double chunk_frac = 1.0, slack = 0.0;
    bool no_refine = false;
    unsigned passes = 1, seed_passes = 2;
    std::uint64_t rng_seed = 0;
  } pa;
  auto* part = app.add_subcommand("partition", "Partition a graph into --parts parts");
  part->add_option("input", pa.input, "Edge file")->required();
  part->add_option("-o,--output", pa.output, "Labels file")->required();
  part->add_option("--parts", pa.parts, "Number of parts (power of two)")->default_val(2);
  auto* cf = part->add_option("--chunk-frac", pa.chunk_frac, "Chunk size as a fraction of |E|")->default_val(1.0);
  auto* ce = part->add_option("--chunk-edges", pa.chunk_edges, "Chunk size in edges");
  cf->excludes(ce);
  part->add_flag("--no-refine", pa.no_refine, "Keep assignments fixed once made");
  part->add_option("--seed-algo", pa.seed_algo, "Seed bisection for the first chunk")
      ->check(CLI::IsMember({"bfs_grow", "random"}));
  part->add_option("--seed-refine-passes", pa.seed_passes, "Refinement passes of the bfs_grow seed")->default_val(2);
  part->add_option("--capacity-slack", pa.slack, "Capacity slack epsilon")->default_val(0.0);
  part->add_option("--passes", pa.passes, "Passes over the edge stream")->default_val(1);
  part->add_option("--rng-seed", pa.rng_seed, "Seed for randomized steps")->default_val(0);
  part->add_option("--workdir", pa.workdir, "Scratch directory (default: $GREM_WORKDIR or output dir)");
  part->add_option("--nodes", pa.nodes, "Node count for text input");
  add_common(part, common);
  part->callback([&] {
    action = [&] {
      Run run = make_run("partition", common);
      auto g = open_graph(pa.input, opt_nodes(pa.nodes));
      grem::GremConfig cfg;
      cfg.chunk_edges = pa.chunk_edges;
      cfg.chunk_fraction = pa.chunk_frac;
      cfg.capacity_slack = pa.slack;
      cfg.refine = !pa.no_refine;
      cfg.passes = pa.passes;
      cfg.seed.algorithm = pa.seed_algo == "random" ? grem::SeedAlgorithm::random : grem::SeedAlgorithm::bfs_grow;
      cfg.seed.refinement_passes = pa.seed_passes;
      cfg.seed.rng_seed = pa.rng_seed;
      const fs::path out = pa.output;
      auto r = grem::partition(g, pa.parts, cfg, default_workdir(pa.workdir, out));
      grem::write_labels(out, r.labels, static_cast<std::uint32_t>(pa.parts));
      run.config = {{"parts", pa.parts},           {"chunk_edges", pa.chunk_edges},
                    {"chunk_frac", pa.chunk_frac}, {"refine", !pa.no_refine},
                    {"seed_algo", pa.seed_algo},   {"seed_refine_passes", pa.seed_passes},
                    {"capacity_slack", pa.slack},  {"passes", pa.passes},
                    {"rng_seed", pa.rng_seed},     {"nodes", g.meta.num_nodes}};
      run.inputs = {g.path};
      run.outputs = {out};
      run.report["labels"] = out.string();
      merge(run.report, cut_json(r.report));
      run.report["leaf_capacity"] = r.leaf_capacity;
      run.report["chunks"] = cfg.plan_for(g.meta.num_edges).num_chunks;
      run.finish();
    };
  });

  // predict
  struct {
    std::string input, labels, output, ties = "half_credit";
    std::vector<double> xs{0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
    std::vector<double> multipliers{1.0};
    grem::Count nodes = 0;
  } pr;
  auto* pred = app.add_subcommand("predict", "Expected cuts versus chunk fraction for a reference bisection");
  pred->add_option("input", pr.input, "Edge file")->required();
  pred->add_option("--labels", pr.labels, "Reference bisection labels")->required();
  pred->add_option("--xs", pr.xs, "Chunk fractions")->delimiter(',');
  pred->add_option("--multiplier", pr.multipliers, "Draw multipliers (1 one-shot, 2 refined)")->delimiter(',');
  pred->add_option("--ties", pr.ties, "Sampled tie policy")->check(CLI::IsMember({"half_credit", "favor_correct"}));
  pred->add_option("-o,--output", pr.output, "CSV output (default: stdout)");
  pred->add_option("--nodes", pr.nodes, "Node count for text input");
  add_common(pred, common);
  pred->callback([&] {
    action = [&] {
      Run run = make_run("predict", common);
      auto g = open_graph(pr.input, opt_nodes(pr.nodes));
      auto lab = grem::read_labels(pr.labels);
      if (lab.num_parts != 2) throw grem::DataError("reference labels are not a bisection");
      const auto stats = grem::compute_node_stats(g, lab.labels);
      const auto ties = pr.ties == "favor_correct" ? grem::TiePolicy::favor_correct : grem::TiePolicy::half_credit;
      std::ostringstream csv;
      json rows = json::array();
      bool header = true;
      for (double m : pr.multipliers) {
        const auto curve = grem::theory_curve(stats, pr.xs, m, ties);
        grem::write_theory_csv(csv, curve, header);
        header = false;
        for (const auto& p : curve)
          rows.push_back({{"x", p.x},
                          {"expected_cuts", p.expected_cuts},
                          {"expected_cut_fraction", p.expected_cut_fraction},
                          {"multiplier", p.multiplier}});
      }
      run.config = {{"xs", pr.xs}, {"multipliers", pr.multipliers}, {"ties", pr.ties}};
      run.inputs = {g.path, fs::path(pr.labels)};
      const auto ref = grem::count_cuts(g, lab.labels, 2);
      if (!pr.output.empty()) {
        write_text(pr.output, csv.str());
        run.outputs = {fs::path(pr.output)};
        run.report["csv"] = pr.output;
      }
      if (common.json) {
        run.report["curve"] = rows;
      } else if (pr.output.empty()) {
        std::cout << csv.str();
      }
      if (common.json || !pr.output.empty()) {
        run.report["reference_cut_edges"] = ref.cut_edges;
        run.report["reference_cut_fraction"] = ref.cut_fraction;
      }
      run.finish();
    };
  });

  // shuffle
  struct {
    std::string input, output;
    std::size_t budget = std::size_t{256} << 20;
    std::uint64_t rng_seed = 0;
    grem::Count nodes = 0;
  } sh;
  auto* shuf = app.add_subcommand("shuffle", "Uniformly shuffle edge order within a memory budget");
  shuf->add_option("input", sh.input, "Edge file")->required();
  shuf->add_option("-o,--output", sh.output, "Shuffled binary edge file")->required();
  shuf->add_option("--memory-budget", sh.budget, "Bytes of edges held in memory")->default_val(sh.budget);
  shuf->add_option("--rng-seed", sh.rng_seed, "Shuffle seed")->default_val(0);
  shuf->add_option("--nodes", sh.nodes, "Node count for text input");
  add_common(shuf, common);
  shuf->callback([&] {
    action = [&] {
      Run run = make_run("shuffle", common);
      auto g = open_graph(sh.input, opt_nodes(sh.nodes));
      grem::ShuffleStats st;
      auto out = grem::external_shuffle(g, sh.output, sh.budget, sh.rng_seed, &st);
      run.config = {{"memory_budget", sh.budget}, {"rng_seed", sh.rng_seed}};
      run.inputs = {g.path};
      run.outputs = {out.path};
      run.report["output"] = out.path.string();
      run.report["edges"] = out.meta.num_edges;
      run.report["buckets"] = st.buckets;
      run.report["peak_resident_bytes"] = st.peak_resident_bytes;
      run.finish();
    };
  });

  // convert
  struct {
    std::string input, output, to = "binary";
    grem::Count nodes = 0;
  } cv;
  auto* conv = app.add_subcommand("convert", "Convert between text and binary edge files");
  conv->add_option("input", cv.input, "Edge file")->required();
  conv->add_option("-o,--output", cv.output, "Output file")->required();
  conv->add_option("--to", cv.to, "Target format")->check(CLI::IsMember({"binary", "text"}));
  conv->add_option("--nodes", cv.nodes, "Node count for text input");
  add_common(conv, common);
  conv->callback([&] {
    action = [&] {
      Run run = make_run("convert", common);
      auto g = open_graph(cv.input, opt_nodes(cv.nodes));
      auto out = grem::convert(g, cv.output, cv.to == "text" ? grem::EdgeFormat::text : grem::EdgeFormat::binary);
      run.config = {{"to", cv.to}};
      run.inputs = {g.path};
      run.outputs = {out.path};
      run.report["output"] = out.path.string();
      run.report["nodes"] = out.meta.num_nodes;
      run.report["edges"] = out.meta.num_edges;
      run.finish();
    };
  });

  // cut-stats
  struct {
    std::string input, labels;
    grem::Count nodes = 0;
  } cs;
  auto* cuts = app.add_subcommand("cut-stats", "Edge cut of a labeling");
  cuts->add_option("input", cs.input, "Edge file")->required();
  cuts->add_option("--labels", cs.labels, "Labels file")->required();
  cuts->add_option("--nodes", cs.nodes, "Node count for text input");
  add_common(cuts, common);
  cuts->callback([&] {
    action = [&] {
      Run run = make_run("cut-stats", common);
      auto g = open_graph(cs.input, opt_nodes(cs.nodes));
      auto lab = grem::read_labels(cs.labels);
      run.inputs = {g.path, fs::path(cs.labels)};
      merge(run.report, cut_json(grem::count_cuts(g, lab.labels, lab.num_parts)));
      run.finish();
    };
  });

  // buckets
  struct {
    std::string input, labels, output;
    std::size_t buffer = std::size_t{1} << 20;
    grem::Count nodes = 0;
  } bk;
  auto* buck = app.add_subcommand("buckets", "Write the (i, j) edge bucket file of a labeling");
  buck->add_option("input", bk.input, "Edge file")->required();
  buck->add_option("--labels", bk.labels, "Labels file")->required();
  buck->add_option("-o,--output", bk.output, "Bucket file (index sidecar at <output>.index)")->required();
  buck->add_option("--buffer-edges", bk.buffer, "Edges buffered across all buckets")->default_val(bk.buffer);
  buck->add_option("--nodes", bk.nodes, "Node count for text input");
  add_common(buck, common);
  buck->callback([&] {
    action = [&] {
      Run run = make_run("buckets", common);
      auto g = open_graph(bk.input, opt_nodes(bk.nodes));
      auto lab = grem::read_labels(bk.labels);
      auto idx = grem::write_buckets(g, lab.labels, lab.num_parts, bk.output, bk.buffer);
      run.config = {{"buffer_edges", bk.buffer}};
      run.inputs = {g.path, fs::path(bk.labels)};
      run.outputs = {fs::path(bk.output), grem::bucket_index_path(bk.output)};
      run.report["output"] = bk.output;
      run.report["parts"] = idx.p;
      run.report["edges"] = idx.total_edges;
      json counts = json::array();
      for (const auto& e : idx.entries) counts.push_back(e.count);
      run.report["bucket_counts"] = counts;
      run.finish();
    };
  });

  // features
  struct {
    std::string features, labels, output;
    std::uint32_t width = 0;
  } ft;
  auto* feat = app.add_subcommand("features", "Group fixed-width node records by partition");
  feat->add_option("features", ft.features, "Feature file of fixed-width records in node order")->required();
  feat->add_option("--labels", ft.labels, "Labels file")->required();
  feat->add_option("--record-width", ft.width, "Bytes per node record")->required()->check(CLI::PositiveNumber);
  feat->add_option("-o,--output", ft.output, "Grouped file (layout sidecar at <output>.layout)")->required();
  add_common(feat, common);
  feat->callback([&] {
    action = [&] {
      Run run = make_run("features", common);
      auto lab = grem::read_labels(ft.labels);
      auto layout = grem::reorder_features(ft.features, lab, ft.width, ft.output);
      run.config = {{"record_width", ft.width}};
      run.inputs = {fs::path(ft.features), fs::path(ft.labels)};
      run.outputs = {fs::path(ft.output), grem::feature_layout_path(ft.output)};
      run.report["output"] = ft.output;
      run.report["nodes"] = layout.num_nodes();
      json ext = json::array();
      for (const auto& e : layout.extents) ext.push_back({e.start, e.count});
      run.report["extents"] = ext;
      run.finish();
    };
  });

  // plan
  struct {
    std::string labels, graph, output;
    std::uint32_t parts = 0, workers = 1;
    grem::Count replicate = 0;
    std::uint64_t rng_seed = 0;
    grem::Count nodes = 0;
  } pl;
  auto* plan = app.add_subcommand("plan", "Randomly assign partitions to workers");
  auto* pl_parts = plan->add_option("--parts", pl.parts, "Number of partitions");
  auto* pl_labels = plan->add_option("--labels", pl.labels, "Labels file to take the partition count from");
  pl_parts->excludes(pl_labels);
  plan->add_option("--workers", pl.workers, "Number of workers")->required();
  plan->add_option("--rng-seed", pl.rng_seed, "Assignment seed")->default_val(0);
  plan->add_option("--replicate", pl.replicate, "Replicate this many highest-degree nodes on every worker");
  plan->add_option("--graph", pl.graph, "Edge file, required with --replicate");
  plan->add_option("--nodes", pl.nodes, "Node count for text input");
  plan->add_option("-o,--output", pl.output, "Plan file (default: stdout)");
  add_common(plan, common);
  plan->callback([&] {
    action = [&] {
      Run run = make_run("plan", common);
      std::uint32_t p = pl.parts;
      if (!pl.labels.empty()) {
        p = grem::read_labels(pl.labels).num_parts;
        run.inputs.push_back(pl.labels);
      }
      if (p == 0) throw grem::UsageError("one of --parts or --labels is required");
      auto pp = grem::plan_assignment(p, pl.workers, pl.rng_seed);
      if (pl.replicate > 0) {
        if (pl.graph.empty()) throw grem::UsageError("--replicate needs --graph");
        auto g = open_graph(pl.graph, opt_nodes(pl.nodes));
        pp.replicated_nodes = grem::select_replicated(g, pl.replicate);
        run.inputs.push_back(g.path);
      }
      std::ostringstream text;
      grem::write_plan(text, pp);
      run.config = {{"parts", p}, {"workers", pl.workers}, {"replicate", pl.replicate}, {"rng_seed", pl.rng_seed}};
      if (!pl.output.empty()) {
        write_text(pl.output, text.str());
        run.outputs = {fs::path(pl.output)};
        run.report["output"] = pl.output;
      } else if (!common.json) {
        std::cout << text.str();
      }
      if (common.json) {
        run.report["assignment"] = pp.assignment;
        run.report["replicated_nodes"] = pp.replicated_nodes;
      }
      run.finish();
    };
  });

  // comm-estimate
  struct {
    std::string input, labels, plan, output;
    std::vector<std::size_t> fanouts{30, 20, 10};
    std::size_t seeds = 1000;
    std::uint64_t rng_seed = 0;
    grem::Count nodes = 0;
  } cm;
  auto* comm = app.add_subcommand("comm-estimate", "Simulate sampled-neighborhood fetches per worker");
  comm->add_option("input", cm.input, "Edge file")->required();
  comm->add_option("--labels", cm.labels, "Labels file")->required();
  comm->add_option("--plan", cm.plan, "Plan file")->required();
  comm->add_option("--fanouts", cm.fanouts, "Per-hop sample sizes")->delimiter(',');
  comm->add_option("--seeds", cm.seeds, "Number of sampled seed nodes")->default_val(1000);
  comm->add_option("--rng-seed", cm.rng_seed, "Simulation seed")->default_val(0);
  comm->add_option("-o,--output", cm.output, "CSV output (default: stdout)");
  comm->add_option("--nodes", cm.nodes, "Node count for text input");
  add_common(comm, common);
  comm->callback([&] {
    action = [&] {
      Run run = make_run("comm-estimate", common);
      auto g = open_graph(cm.input, opt_nodes(cm.nodes));
      auto lab = grem::read_labels(cm.labels);
      std::istringstream plan_text(read_text(cm.plan));
      auto pp = grem::read_plan(plan_text);
      if (pp.num_parts() != lab.num_parts)
        throw grem::DataError("plan covers " + std::to_string(pp.num_parts()) + " parts, labels have " +
                              std::to_string(lab.num_parts));
      grem::CommConfig cc;
      cc.fanouts = cm.fanouts;
      cc.num_seeds = cm.seeds;
      cc.rng_seed = cm.rng_seed;
      auto traffic = grem::estimate_comm(g, lab.labels, pp, cc);
      std::ostringstream csv;
      grem::write_comm_csv(csv, traffic);
      run.config = {{"fanouts", cm.fanouts}, {"seeds", cm.seeds}, {"rng_seed", cm.rng_seed}};
      run.inputs = {g.path, fs::path(cm.labels), fs::path(cm.plan)};
      grem::Count local = 0, remote = 0;
      for (const auto& t : traffic) local += t.local, remote += t.remote;
      if (!cm.output.empty()) {
        write_text(cm.output, csv.str());
        run.outputs = {fs::path(cm.output)};
        run.report["csv"] = cm.output;
      } else if (!common.json) {
        std::cout << csv.str();
      }
      if (common.json || !cm.output.empty()) {
        run.report["local"] = local;
        run.report["remote"] = remote;
      }
      run.finish();
    };
  });

  // generate
  struct {
    std::string kind, output, labels;
    grem::Count blocks = 2, block_size = 100, bridges = 1, n = 100;
    double p_in = 0.1, p_out = 0.01;
    std::uint64_t rng_seed = 0;
  } gn;
  auto* gen = app.add_subcommand("generate", "Write a synthetic graph and its ground-truth labels");
  gen->add_option("kind", gn.kind, "Graph family")
      ->required()
      ->check(CLI::IsMember({"sbm", "clique-union", "path", "star"}));
  gen->add_option("-o,--output", gn.output, "Binary edge file")->required();
  gen->add_option("--labels-out", gn.labels, "Ground-truth labels file");
  gen->add_option("--blocks", gn.blocks, "Blocks (sbm, clique-union)")->default_val(2);
  gen->add_option("--block-size", gn.block_size, "Nodes per block (sbm, clique-union)")->default_val(100);
  gen->add_option("--bridges", gn.bridges, "Bridges per consecutive block pair (clique-union)")->default_val(1);
  gen->add_option("--p-in", gn.p_in, "Intra-block edge probability (sbm)")->default_val(0.1);
  gen->add_option("--p-out", gn.p_out, "Inter-block edge probability (sbm)")->default_val(0.01);
  gen->add_option("-n,--num-nodes", gn.n, "Nodes (path, star)")->default_val(100);
  gen->add_option("--rng-seed", gn.rng_seed, "Generator seed (sbm)")->default_val(0);
  add_common(gen, common);
  gen->callback([&] {
    action = [&] {
      Run run = make_run("generate", common);
      grem::synth::Generated g;
      if (gn.kind == "sbm") {
        g = grem::synth::generate_sbm({gn.blocks, gn.block_size, gn.p_in, gn.p_out, gn.rng_seed}, gn.output);
        run.config = {{"kind", gn.kind}, {"blocks", gn.blocks},   {"block_size", gn.block_size},
                      {"p_in", gn.p_in}, {"p_out", gn.p_out}, {"rng_seed", gn.rng_seed}};
      } else if (gn.kind == "clique-union") {
        g = grem::synth::generate_clique_union({gn.blocks, gn.block_size, gn.bridges}, gn.output);
        run.config = {
            {"kind", gn.kind}, {"blocks", gn.blocks}, {"block_size", gn.block_size}, {"bridges", gn.bridges}};
      } else if (gn.kind == "path") {
        g = grem::synth::generate_path(gn.n, gn.output);
        run.config = {{"kind", gn.kind}, {"num_nodes", gn.n}};
      } else {
        g = grem::synth::generate_star(gn.n, gn.output);
        run.config = {{"kind", gn.kind}, {"num_nodes", gn.n}};
      }
      run.outputs = {g.file.path};
      if (!gn.labels.empty()) {
        grem::write_labels(gn.labels, g.labels, g.num_blocks);
        run.outputs.emplace_back(gn.labels);
      }
      run.report["output"] = g.file.path.string();
      run.report["nodes"] = g.file.meta.num_nodes;
      run.report["edges"] = g.file.meta.num_edges;
      run.finish();
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    action();
    return 0;
  } catch (const grem::Error& e) {
    std::cerr << "grem: " << e.what() << '\n';
    switch (e.kind()) {
      case grem::ErrorKind::usage: return kExitUsage;
      case grem::ErrorKind::data: return kExitData;
      case grem::ErrorKind::io: return kExitIo;
    }
  } catch (const std::bad_alloc&) {
    std::cerr << "grem: out of memory\n";
  } catch (const std::exception& e) {
    std::cerr << "grem: " << e.what() << '\n';
  }
  return 1;
}
