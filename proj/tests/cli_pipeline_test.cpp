// End-to-end checks of the xclust command line binary.  The binary path
// arrives as argv[1]; everything runs inside a scratch directory.
#include <sys/wait.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "xclust/core.hpp"
#include "xclust/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAILED: " << what << '\n';
  }
}

std::string g_binary;
fs::path g_dir;

int run(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " >" +
                          (g_dir / "stdout.txt").string() + " 2>" +
                          (g_dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string path(const std::string& name) { return (g_dir / name).string(); }

void check_exit_codes() {
  expect(run("bogus-subcommand") == 1, "unknown subcommand exits 1");
  expect(run("gen --instance kmedians-lb") == 1, "missing --k exits 1");
  expect(run("gen --instance mystery --k 3") == 1, "unknown instance exits 1");
  expect(run("gen --instance kmedians-lb --k 4 --d 7 --out-points " +
             path("x.csv") + " --out-centers " + path("y.csv") +
             " --out-meta " + path("z.json")) == 1,
         "kmedians-lb rejects --d");
  expect(run("cluster --objective kmeans --method median-random --centers " +
             path("centers.csv")) == 1,
         "objective/method mismatch exits 1");
  expect(run("cluster --objective kmedians --method median-random") == 1,
         "missing centers and fit-k exits 1");
  expect(run("cluster --objective kmedians --method median-random --centers " +
             path("does_not_exist.csv") + " --out-tree " +
             path("t.json")) == 2,
         "missing centers file exits 2");

  std::ofstream bad(g_dir / "bad.csv");
  bad << "x0,x1\n1.0,zebra\n";
  bad.close();
  expect(run("cluster --objective kmedians --method median-random --centers " +
             path("bad.csv") + " --out-tree " + path("t.json")) == 2,
         "malformed centers csv exits 2");
  expect(run("--help") == 0, "--help exits 0");
}

void check_gen_and_cluster_kmedians() {
  expect(run("gen --instance kmedians-lb --k 4 --seed 7 --out-points " +
             path("points.csv") + " --out-centers " + path("centers.csv") +
             " --out-meta " + path("meta.json")) == 0,
         "gen kmedians-lb runs");
  json meta = load_json(g_dir / "meta.json");
  expect(meta["generator"] == "kmedians-lb", "meta generator");
  expect(meta["k"] == 4, "meta k");
  expect(meta["planted_cost"].contains("kmedians"), "meta planted kmedians");

  expect(run("cluster --objective kmedians --method median-random --centers " +
             path("centers.csv") + " --seed 1 --out-tree " +
             path("tree.json") + " --stats " + path("stats.txt")) == 0,
         "cluster median-random runs");
  const std::string stats = slurp(g_dir / "stats.txt");
  expect(stats.find("wall_ms=") != std::string::npos, "stats carry timing");
  expect(slurp(g_dir / "tree.json").find("wall_ms") == std::string::npos,
         "tree file carries no timing");

  expect(run("eval --tree " + path("tree.json") + " --points " +
             path("points.csv") + " --centers " + path("centers.csv") +
             " --objective kmedians --out-report " + path("report.json")) ==
             0,
         "eval runs");
  json report = load_json(g_dir / "report.json");
  expect(report["objective"] == "kmedians", "report objective");
  expect(report.contains("tree_cost"), "report tree_cost");
  expect(report.contains("ratio"), "report ratio");
  expect(report["ratio"].get<double>() >= 1.0 - 1e-12, "ratio at least one");
  expect(!report.contains("wall_ms"), "report carries no timing");

  // Re-evaluating the written tree reproduces the cost exactly.
  const xclust::ThresholdTree tree = xclust::read_tree_json(g_dir / "tree.json");
  const xclust::PointSet pts = xclust::read_points_csv(g_dir / "points.csv");
  const xclust::PointSet ctr = xclust::read_points_csv(g_dir / "centers.csv");
  const double direct =
      xclust::tree_cost(tree, pts, ctr, xclust::Objective::KMediansL1)
          .total_cost;
  expect(report["tree_cost"].get<double>() == direct,
         "reported cost equals recomputed cost");

  // Reference from the meta file.
  expect(run("eval --tree " + path("tree.json") + " --points " +
             path("points.csv") + " --centers " + path("centers.csv") +
             " --objective kmedians --reference file --reference-file " +
             path("meta.json") + " --out-report " + path("report2.json")) ==
             0,
         "eval with file reference runs");
  json report2 = load_json(g_dir / "report2.json");
  expect(report2["reference_cost"].get<double>() ==
             meta["planted_cost"]["kmedians"].get<double>(),
         "file reference uses planted cost");

  // kcenter evaluation of the same tree.
  expect(run("eval --tree " + path("tree.json") + " --points " +
             path("points.csv") + " --centers " + path("centers.csv") +
             " --objective kcenter --out-report " + path("report3.json")) ==
             0,
         "eval kcenter runs");
  expect(run("eval --tree " + path("tree.json") + " --points " +
             path("points.csv") + " --centers " + path("centers.csv") +
             " --objective kcenter --reference refit") == 1,
         "kcenter refit reference exits 1");
}

void check_mean_random_ignores_points() {
  expect(run("gen --instance blobs --k 3 --d 2 --n 45 --spread 0.4 --seed 9"
             " --out-points " +
             path("bp.csv") + " --out-centers " + path("bc.csv") +
             " --out-meta " + path("bm.json")) == 0,
         "gen blobs runs");
  // A nonexistent points file must not matter for center-only methods.
  expect(run("cluster --objective kmeans --method mean-random --centers " +
             path("bc.csv") + " --points " + path("no_such_points.csv") +
             " --seed 3 --out-tree " + path("bt.json")) == 0,
         "mean-random ignores --points");
  expect(run("cluster --objective kmeans --method mean-sweep --centers " +
             path("bc.csv") + " --points " + path("no_such_points.csv") +
             " --out-tree " + path("bt.json")) == 2,
         "mean-sweep needs a real points file");
}

void check_fit_k_and_compare() {
  expect(run("cluster --objective kmeans --method mean-sweep --points " +
             path("bp.csv") + " --fit-k 3 --seed 5 --out-tree " +
             path("ft.json") + " --out-centers " + path("fc.csv")) == 0,
         "cluster with --fit-k runs");
  expect(fs::exists(g_dir / "fc.csv"), "fitted centers written");
  expect(run("cluster --objective kmeans --method mean-sweep --points " +
             path("bp.csv") + " --fit-k 3 --centers " + path("bc.csv")) == 1,
         "--fit-k with --centers exits 1");

  expect(run("compare --objective kmeans --methods mean-sweep,mean-random,imm"
             " --points " +
             path("bp.csv") + " --centers " + path("bc.csv") +
             " --trials 3 --seed 11 --out-csv " + path("cmp.csv") +
             " --stats " + path("cmp_stats.txt")) == 0,
         "compare runs");
  const std::string csv = slurp(g_dir / "cmp.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  expect(line == "method,trial,seed,cost,ratio,height", "compare csv header");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  expect(rows == 3 * 3 + 2 * 3, "3 trials + mean/stddev per method");
  expect(csv.find("wall_ms") == std::string::npos,
         "compare csv carries no timing");
  expect(slurp(g_dir / "cmp_stats.txt").find("wall_ms=") != std::string::npos,
         "compare stats carry timing");
  // Trial seeds are base + trial.
  expect(csv.find("mean-sweep,0,11,") != std::string::npos, "seed column 11");
  expect(csv.find("mean-sweep,2,13,") != std::string::npos, "seed column 13");
}

void check_2means() {
  expect(run("gen --instance blobs --k 2 --d 3 --n 40 --spread 0.5 --seed 13"
             " --out-points " +
             path("tp.csv") + " --out-centers " + path("tc.csv") +
             " --out-meta " + path("tm.json")) == 0,
         "gen 2-blob instance");
  expect(run("cluster --objective 2means --method 2means-exact --points " +
             path("tp.csv") + " --centers " + path("tc.csv") +
             " --out-tree " + path("tt.json")) == 0,
         "2means-exact runs");
  expect(run("eval --tree " + path("tt.json") + " --points " + path("tp.csv") +
             " --centers " + path("tc.csv") +
             " --objective 2means --reference refit --out-report " +
             path("tr.json")) == 0,
         "2means eval with refit reference");
  json report = load_json(g_dir / "tr.json");
  expect(report["k"] == 2, "2means tree has two leaves");
  expect(report["reference_cost"].get<double>() <=
             report["tree_cost"].get<double>() + 1e-9,
         "refit reference no larger than tree cost");
  expect(run("cluster --objective 2means --method 2means-exact --points " +
             path("tp.csv") + " --centers " + path("tc.csv") +
             " --refit --out-tree " + path("tt2.json")) == 0,
         "2means-exact --refit runs");
  expect(run("cluster --objective kmeans --method mean-sweep --points " +
             path("tp.csv") + " --centers " + path("tc.csv") +
             " --refit --out-tree " + path("tt3.json")) == 1,
         "--refit outside 2means-exact exits 1");
}

void check_imm_pipeline() {
  expect(run("gen --instance imm-adversarial --k 5 --out-points " +
             path("ip.csv") + " --out-centers " + path("ic.csv") +
             " --out-meta " + path("im.json")) == 0,
         "gen imm-adversarial runs");
  expect(run("cluster --objective kmeans --method imm --points " +
             path("ip.csv") + " --centers " + path("ic.csv") +
             " --out-tree " + path("it.json")) == 0,
         "imm cluster runs");
  expect(run("eval --tree " + path("it.json") + " --points " + path("ip.csv") +
             " --centers " + path("ic.csv") +
             " --objective kmedians --reference file --reference-file " +
             path("im.json") + " --out-report " + path("ir.json")) == 0,
         "imm eval runs");
  json report = load_json(g_dir / "ir.json");
  expect(report["tree_cost"].get<double>() == 24.0,
         "imm tree pays 24 on the k=5 chain");
  expect(report["ratio"].get<double>() == 2.0, "imm ratio 2 at k=5");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_pipeline_test <path-to-xclust>\n";
    return 2;
  }
  g_binary = argv[1];
  g_dir = fs::current_path() / "cli_pipeline_work";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  check_exit_codes();
  check_gen_and_cluster_kmedians();
  check_mean_random_ignores_points();
  check_fit_k_and_compare();
  check_2means();
  check_imm_pipeline();

  if (failures == 0) {
    std::cout << "cli pipeline: all checks passed\n";
    fs::remove_all(g_dir);
    return 0;
  }
  std::cout << "cli pipeline: " << failures << " check(s) failed\n";
  return 1;
}
