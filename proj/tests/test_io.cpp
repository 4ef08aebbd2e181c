#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "xclust/core.hpp"
#include "xclust/io.hpp"
#include "xclust/kmedians.hpp"

using namespace xclust;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("xclust_io_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

}  // namespace

TEST_CASE("format_double round trips") {
  for (double v : {1.0 / 3.0, 0.1, -0.0, 1e-300, 12345.0, -2.5e17}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("points csv round trips bit-exactly") {
  TempDir tmp;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  PointSet pts(3);
  std::vector<double> row(3);
  for (int i = 0; i < 50; ++i) {
    for (double& v : row) v = wide(rng) * std::pow(10.0, int(rng() % 9) - 4);
    pts.push_back(row);
  }
  const fs::path file = tmp.path / "pts.csv";
  write_points_csv(file, pts);
  PointSet back = read_points_csv(file);
  REQUIRE(back.size() == pts.size());
  REQUIRE(back.dim() == pts.dim());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t r = 0; r < pts.dim(); ++r) {
      CHECK(back.at(i, r) == pts.at(i, r));
    }
  }
}

TEST_CASE("csv header and cells are validated") {
  TempDir tmp;
  const fs::path file = tmp.path / "bad.csv";

  write_file(file, "x0,x1\n1.0,2.0\n");
  CHECK_NOTHROW(read_points_csv(file));

  write_file(file, "a,b\n1.0,2.0\n");
  CHECK_THROWS_AS(read_points_csv(file), input_error);

  write_file(file, "x0,x1\n1.0,zebra\n");
  CHECK_THROWS_AS(read_points_csv(file), input_error);

  write_file(file, "x0,x1\n1.0\n");
  CHECK_THROWS_AS(read_points_csv(file), input_error);

  write_file(file, "x0,x1\n1.0,2.0,3.0\n");
  CHECK_THROWS_AS(read_points_csv(file), input_error);

  write_file(file, "");
  CHECK_THROWS_AS(read_points_csv(file), input_error);

  CHECK_THROWS_AS(read_points_csv(tmp.path / "missing.csv"), input_error);

  // CRLF line endings and trailing blank lines are fine.
  write_file(file, "x0,x1\r\n1.5,-2.5\r\n\r\n");
  PointSet pts = read_points_csv(file);
  CHECK(pts.size() == 1);
  CHECK(pts.at(0, 1) == -2.5);
}

TEST_CASE("tree json round trips") {
  TempDir tmp;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointSet centers(4);
  std::vector<double> row(4);
  for (int i = 0; i < 9; ++i) {
    for (double& v : row) v = unit(rng);
    centers.push_back(row);
  }
  ThresholdTree tree = build_fast(centers, 123);
  const fs::path file = tmp.path / "tree.json";
  write_tree_json(file, tree);
  ThresholdTree back = read_tree_json(file);

  CHECK(back.k == tree.k);
  CHECK(back.dim == tree.dim);
  REQUIRE(back.nodes.size() == tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    CHECK(back.nodes[i].dim == tree.nodes[i].dim);
    CHECK(back.nodes[i].threshold == tree.nodes[i].threshold);
    CHECK(back.nodes[i].left == tree.nodes[i].left);
    CHECK(back.nodes[i].right == tree.nodes[i].right);
    CHECK(back.nodes[i].center == tree.nodes[i].center);
  }
  REQUIRE(back.splits.size() == tree.splits.size());
  for (std::size_t i = 0; i < tree.splits.size(); ++i) {
    CHECK(back.splits[i].node == tree.splits[i].node);
    CHECK(back.splits[i].threshold == tree.splits[i].threshold);
    CHECK(back.splits[i].left_centers == tree.splits[i].left_centers);
  }
  // Routing is identical after the round trip.
  for (int probe = 0; probe < 50; ++probe) {
    for (double& v : row) v = unit(rng) * 2.0 - 0.5;
    CHECK(back.assign(row) == tree.assign(row));
  }
}

TEST_CASE("malformed tree json is rejected") {
  TempDir tmp;
  const fs::path file = tmp.path / "tree.json";

  write_file(file, "not json at all");
  CHECK_THROWS_AS(read_tree_json(file), input_error);

  write_file(file, R"({"k":1,"d":1,"root":0,"nodes":[{"id":0,"center":0}]})");
  CHECK_THROWS_AS(read_tree_json(file), input_error);  // no format_version

  write_file(file, R"({"format_version":99,"k":1,"d":1,"root":0,)"
                   R"("nodes":[{"id":0,"center":0}]})");
  CHECK_THROWS_AS(read_tree_json(file), input_error);

  // Duplicate node id.
  write_file(file,
             R"({"format_version":1,"k":2,"d":1,"root":0,"nodes":[)"
             R"({"id":0,"dim":0,"threshold":0.5,"left":1,"right":1},)"
             R"({"id":1,"center":0},{"id":1,"center":1}]})");
  CHECK_THROWS_AS(read_tree_json(file), input_error);

  // Leaf count disagrees with k.
  write_file(file,
             R"({"format_version":1,"k":3,"d":1,"root":0,"nodes":[)"
             R"({"id":0,"dim":0,"threshold":0.5,"left":1,"right":2},)"
             R"({"id":1,"center":0},{"id":2,"center":1}]})");
  CHECK_THROWS_AS(read_tree_json(file), input_error);

  // A node that is both leaf and internal.
  write_file(file,
             R"({"format_version":1,"k":2,"d":1,"root":0,"nodes":[)"
             R"({"id":0,"dim":0,"threshold":0.5,"left":1,"right":2,)"
             R"("center":0},{"id":1,"center":0},{"id":2,"center":1}]})");
  CHECK_THROWS_AS(read_tree_json(file), input_error);

  // Valid minimal tree parses.
  write_file(file,
             R"({"format_version":1,"k":2,"d":1,"root":0,"nodes":[)"
             R"({"id":0,"dim":0,"threshold":0.5,"left":1,"right":2},)"
             R"({"id":1,"center":0},{"id":2,"center":1}]})");
  ThresholdTree t = read_tree_json(file);
  CHECK(t.k == 2);
  std::vector<double> x{0.2};
  CHECK(t.assign(x) == 0);
}

TEST_CASE("tree json structure") {
  auto centers = PointSet::from_rows({{0.0}, {1.0}});
  ThresholdTree tree = build_fast(centers, 5);
  nlohmann::json j = tree_to_json(tree);
  CHECK(j["format_version"] == 1);
  CHECK(j["k"] == 2);
  CHECK(j["d"] == 1);
  CHECK(j["nodes"].is_array());
  CHECK(j["nodes"].size() == 3);
  CHECK(j.contains("splits"));
}
