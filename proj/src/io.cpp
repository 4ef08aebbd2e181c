#include "xclust/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace xclust {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  XCLUST_INTERNAL_CHECK(res.ec == std::errc(), "double formatting failed");
  return std::string(buf, res.ptr);
}

void write_points_csv(const std::filesystem::path& path, const PointSet& pts) {
  XCLUST_INPUT_CHECK(pts.dim() >= 1, "points must have dimension >= 1");
  std::ofstream out(path);
  XCLUST_INPUT_CHECK(out.good(), "cannot open for writing: " + path.string());
  for (std::size_t r = 0; r < pts.dim(); ++r)
    out << (r ? "," : "") << 'x' << r;
  out << '\n';
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto row = pts[i];
    for (std::size_t r = 0; r < pts.dim(); ++r)
      out << (r ? "," : "") << format_double(row[r]);
    out << '\n';
  }
  XCLUST_INPUT_CHECK(out.good(), "write failed: " + path.string());
}

PointSet read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  XCLUST_INPUT_CHECK(in.good(), "cannot open: " + path.string());
  std::string line;
  XCLUST_INPUT_CHECK(static_cast<bool>(std::getline(in, line)),
                     "empty points file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::size_t dim = 0;
  {
    std::stringstream header(line);
    std::string field;
    while (std::getline(header, field, ',')) {
      XCLUST_INPUT_CHECK(field == "x" + std::to_string(dim),
                         "bad points header field: " + field);
      ++dim;
    }
    XCLUST_INPUT_CHECK(dim >= 1, "points header names no columns");
  }

  PointSet pts(dim);
  std::vector<double> row(dim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::size_t r = 0; r < dim; ++r) {
      auto res = std::from_chars(p, end, row[r]);
      XCLUST_INPUT_CHECK(res.ec == std::errc(),
                         "bad number at " + path.string() + ":" +
                             std::to_string(lineno));
      p = res.ptr;
      if (r + 1 < dim) {
        XCLUST_INPUT_CHECK(p < end && *p == ',',
                           "expected ',' at " + path.string() + ":" +
                               std::to_string(lineno));
        ++p;
      }
    }
    XCLUST_INPUT_CHECK(p == end, "trailing characters at " + path.string() +
                                     ":" + std::to_string(lineno));
    pts.push_back(row);
  }
  return pts;
}

nlohmann::json tree_to_json(const ThresholdTree& tree) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["k"] = tree.k;
  j["d"] = tree.dim;
  j["root"] = tree.root;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const TreeNode& nd = tree.nodes[id];
    nlohmann::json nj;
    nj["id"] = id;
    if (nd.is_leaf()) {
      nj["center"] = nd.center;
    } else {
      nj["dim"] = nd.dim;
      nj["threshold"] = nd.threshold;
      nj["left"] = nd.left;
      nj["right"] = nd.right;
    }
    nodes.push_back(std::move(nj));
  }
  if (!tree.splits.empty()) {
    auto& splits = j["splits"] = nlohmann::json::array();
    for (const auto& rec : tree.splits) {
      nlohmann::json sj;
      sj["node"] = rec.node;
      sj["dim"] = rec.dim;
      sj["threshold"] = rec.threshold;
      sj["left_centers"] = rec.left_centers;
      sj["right_centers"] = rec.right_centers;
      if (rec.mistakes >= 0) sj["mistakes"] = rec.mistakes;
      if (rec.box_sq > 0.0) sj["box_sq"] = rec.box_sq;
      if (rec.event_prob >= 0.0) sj["event_prob"] = rec.event_prob;
      splits.push_back(std::move(sj));
    }
  }
  return j;
}

ThresholdTree tree_from_json(const nlohmann::json& j) {
  XCLUST_INPUT_CHECK(j.is_object(), "tree file is not a JSON object");
  XCLUST_INPUT_CHECK(j.value("format_version", -1) == 1,
                     "unsupported tree format_version");
  ThresholdTree tree;
  try {
    tree.k = j.at("k").get<int>();
    tree.dim = j.at("d").get<int>();
    tree.root = j.at("root").get<int>();
    const auto& nodes = j.at("nodes");
    XCLUST_INPUT_CHECK(nodes.is_array(), "\"nodes\" must be an array");
    tree.nodes.resize(nodes.size());
    std::vector<bool> seen(nodes.size(), false);
    for (const auto& nj : nodes) {
      const int id = nj.at("id").get<int>();
      XCLUST_INPUT_CHECK(id >= 0 && id < static_cast<int>(tree.nodes.size()),
                         "node id out of range");
      XCLUST_INPUT_CHECK(!seen[id], "duplicate node id");
      seen[id] = true;
      TreeNode& nd = tree.nodes[id];
      if (nj.contains("center")) {
        nd.center = nj.at("center").get<int>();
        XCLUST_INPUT_CHECK(!nj.contains("dim") && !nj.contains("left"),
                           "node is both leaf and internal");
      } else {
        nd.dim = nj.at("dim").get<int>();
        XCLUST_INPUT_CHECK(nd.dim >= 0, "internal node with negative dim");
        nd.threshold = nj.at("threshold").get<double>();
        nd.left = nj.at("left").get<int>();
        nd.right = nj.at("right").get<int>();
      }
    }
    if (j.contains("splits")) {
      for (const auto& sj : j.at("splits")) {
        SplitRecord rec;
        rec.node = sj.at("node").get<int>();
        rec.dim = sj.at("dim").get<int>();
        rec.threshold = sj.at("threshold").get<double>();
        rec.left_centers = sj.at("left_centers").get<int>();
        rec.right_centers = sj.at("right_centers").get<int>();
        rec.mistakes = sj.value("mistakes", -1LL);
        rec.box_sq = sj.value("box_sq", 0.0);
        rec.event_prob = sj.value("event_prob", -1.0);
        tree.splits.push_back(rec);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("malformed tree file: ") + e.what());
  }
  validate_structure(tree);
  return tree;
}

void write_tree_json(const std::filesystem::path& path,
                     const ThresholdTree& tree) {
  std::ofstream out(path);
  XCLUST_INPUT_CHECK(out.good(), "cannot open for writing: " + path.string());
  out << tree_to_json(tree).dump(2) << '\n';
  XCLUST_INPUT_CHECK(out.good(), "write failed: " + path.string());
}

ThresholdTree read_tree_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  XCLUST_INPUT_CHECK(in.good(), "cannot open: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("invalid JSON in ") + path.string() + ": " +
                      e.what());
  }
  return tree_from_json(j);
}

}  // namespace xclust
