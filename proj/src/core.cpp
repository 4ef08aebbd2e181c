#include "xclust/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xclust {

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::KMediansL1: return "kmedians";
    case Objective::KMeansSq: return "kmeans";
    case Objective::KCenterL2: return "kcenter";
  }
  throw internal_error("unknown objective");
}

Objective objective_from_name(const std::string& name) {
  if (name == "kmedians") return Objective::KMediansL1;
  if (name == "kmeans" || name == "2means") return Objective::KMeansSq;
  if (name == "kcenter") return Objective::KCenterL2;
  throw input_error("unknown objective: " + name);
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
  PointSet out;
  if (rows.empty()) return out;
  out.dim_ = rows.front().size();
  XCLUST_INPUT_CHECK(out.dim_ > 0, "points must have dimension >= 1");
  out.values_.reserve(rows.size() * out.dim_);
  for (const auto& r : rows) {
    XCLUST_INPUT_CHECK(r.size() == out.dim_, "ragged point rows");
    out.values_.insert(out.values_.end(), r.begin(), r.end());
  }
  return out;
}

void PointSet::push_back(std::span<const double> row) {
  if (dim_ == 0) dim_ = row.size();
  XCLUST_INPUT_CHECK(row.size() == dim_, "row dimension mismatch");
  values_.insert(values_.end(), row.begin(), row.end());
}

void PointSet::push_back(std::initializer_list<double> row) {
  push_back(std::span<const double>(row.begin(), row.size()));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double squared_l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_l2_distance(a, b));
}

double objective_distance(Objective o, std::span<const double> a,
                          std::span<const double> b) {
  switch (o) {
    case Objective::KMediansL1: return l1_distance(a, b);
    case Objective::KMeansSq: return squared_l2_distance(a, b);
    case Objective::KCenterL2: return l2_distance(a, b);
  }
  throw internal_error("unknown objective");
}

BoundingBox bounding_box(const PointSet& points) {
  std::vector<int> all(points.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return bounding_box(points, all);
}

BoundingBox bounding_box(const PointSet& points, std::span<const int> subset) {
  XCLUST_INPUT_CHECK(!subset.empty(), "bounding box of an empty set");
  BoundingBox box;
  box.low.assign(points.dim(), std::numeric_limits<double>::infinity());
  box.high.assign(points.dim(), -std::numeric_limits<double>::infinity());
  for (int idx : subset) {
    auto row = points[static_cast<std::size_t>(idx)];
    for (std::size_t r = 0; r < points.dim(); ++r) {
      box.low[r] = std::min(box.low[r], row[r]);
      box.high[r] = std::max(box.high[r], row[r]);
    }
  }
  return box;
}

int ThresholdTree::assign(std::span<const double> x) const {
  XCLUST_INPUT_CHECK(static_cast<int>(x.size()) == dim,
                     "point dimension does not match tree");
  XCLUST_INTERNAL_CHECK(root >= 0, "assign on an empty tree");
  int u = root;
  while (!nodes[u].is_leaf()) {
    const TreeNode& nd = nodes[u];
    u = x[nd.dim] < nd.threshold ? nd.left : nd.right;
  }
  return nodes[u].center;
}

namespace {

int height_rec(const ThresholdTree& t, int u) {
  const TreeNode& nd = t.nodes[u];
  if (nd.is_leaf()) return 0;
  return 1 + std::max(height_rec(t, nd.left), height_rec(t, nd.right));
}

}  // namespace

int ThresholdTree::height() const {
  XCLUST_INTERNAL_CHECK(root >= 0, "height of an empty tree");
  return height_rec(*this, root);
}

int ThresholdTree::leaf_count() const {
  int leaves = 0;
  for (const auto& nd : nodes)
    if (nd.is_leaf()) ++leaves;
  return leaves;
}

void validate_structure(const ThresholdTree& tree) {
  XCLUST_INPUT_CHECK(tree.k >= 1, "tree must have k >= 1");
  XCLUST_INPUT_CHECK(tree.dim >= 1, "tree must have dim >= 1");
  XCLUST_INPUT_CHECK(tree.root >= 0 &&
                         tree.root < static_cast<int>(tree.nodes.size()),
                     "tree root out of range");
  std::vector<int> visits(tree.nodes.size(), 0);
  std::vector<int> stack = {tree.root};
  std::vector<int> leaf_centers;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    XCLUST_INPUT_CHECK(u >= 0 && u < static_cast<int>(tree.nodes.size()),
                       "tree child index out of range");
    XCLUST_INPUT_CHECK(++visits[u] == 1, "tree node reachable more than once");
    const TreeNode& nd = tree.nodes[u];
    if (nd.is_leaf()) {
      leaf_centers.push_back(nd.center);
    } else {
      XCLUST_INPUT_CHECK(nd.dim < tree.dim, "split dimension out of range");
      XCLUST_INPUT_CHECK(std::isfinite(nd.threshold),
                         "split threshold must be finite");
      XCLUST_INPUT_CHECK(nd.left >= 0 && nd.right >= 0,
                         "internal node must have two children");
      stack.push_back(nd.left);
      stack.push_back(nd.right);
    }
  }
  for (std::size_t u = 0; u < tree.nodes.size(); ++u)
    XCLUST_INPUT_CHECK(visits[u] == 1, "tree contains an unreachable node");
  XCLUST_INPUT_CHECK(static_cast<int>(leaf_centers.size()) == tree.k,
                     "tree must have exactly k leaves");
  std::sort(leaf_centers.begin(), leaf_centers.end());
  for (int i = 0; i < tree.k; ++i)
    XCLUST_INPUT_CHECK(leaf_centers[i] == i,
                       "leaf centers must be a permutation of 0..k-1");
}

namespace {

void center_sets_rec(const ThresholdTree& tree, const CenterSet& centers,
                     int u, std::vector<int> ids,
                     std::vector<std::vector<int>>& out) {
  const TreeNode& nd = tree.nodes[u];
  out[u] = ids;
  if (nd.is_leaf()) return;
  std::vector<int> left, right;
  for (int i : ids) {
    if (centers.at(i, nd.dim) < nd.threshold)
      left.push_back(i);
    else
      right.push_back(i);
  }
  center_sets_rec(tree, centers, nd.left, std::move(left), out);
  center_sets_rec(tree, centers, nd.right, std::move(right), out);
}

}  // namespace

std::vector<std::vector<int>> center_sets(const ThresholdTree& tree,
                                          const CenterSet& centers) {
  XCLUST_INPUT_CHECK(static_cast<int>(centers.size()) == tree.k,
                     "center count does not match tree");
  XCLUST_INPUT_CHECK(static_cast<int>(centers.dim()) == tree.dim,
                     "center dimension does not match tree");
  std::vector<std::vector<int>> out(tree.nodes.size());
  std::vector<int> all(centers.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  center_sets_rec(tree, centers, tree.root, std::move(all), out);
  return out;
}

void validate_with_centers(const ThresholdTree& tree, const CenterSet& centers) {
  validate_structure(tree);
  auto sets = center_sets(tree, centers);
  for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
    const TreeNode& nd = tree.nodes[u];
    const auto& ids = sets[u];
    XCLUST_INPUT_CHECK(!ids.empty(), "node reached by no center");
    if (nd.is_leaf()) {
      XCLUST_INPUT_CHECK(ids.size() == 1 && ids[0] == nd.center,
                         "leaf not reached by exactly its own center");
      continue;
    }
    auto box = bounding_box(centers, ids);
    XCLUST_INPUT_CHECK(box.strictly_inside(nd.dim, nd.threshold),
                       "threshold does not lie strictly inside the node's "
                       "center box");
  }
}

void CostReport::set_reference(double ref) {
  reference_cost = ref;
  if (ref == 0.0 && total_cost == 0.0) {
    ratio = 1.0;
  } else {
    ratio = total_cost / ref;
  }
}

CostReport tree_cost(const ThresholdTree& tree, const Dataset& data,
                     const CenterSet& centers, Objective objective) {
  XCLUST_INPUT_CHECK(data.dim() == centers.dim(),
                     "data/center dimension mismatch");
  XCLUST_INPUT_CHECK(static_cast<int>(centers.size()) == tree.k,
                     "center count does not match tree");
  CostReport rep;
  rep.objective = objective;
  rep.per_point.reserve(data.size());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = tree.assign(data[i]);
    const double cost = objective_distance(objective, data[i], centers[c]);
    rep.per_point.push_back({static_cast<int>(i), c, cost});
    if (objective == Objective::KCenterL2)
      total = std::max(total, cost);
    else
      total += cost;
  }
  rep.total_cost = total;
  return rep;
}

std::vector<int> nearest_center_assignment(const Dataset& data,
                                           const CenterSet& centers,
                                           Objective objective) {
  XCLUST_INPUT_CHECK(data.dim() == centers.dim(),
                     "data/center dimension mismatch");
  XCLUST_INPUT_CHECK(centers.size() >= 1, "need at least one center");
  // k-center ranks by plain l2, which orders identically to squared l2.
  const Objective metric = objective == Objective::KMediansL1
                               ? Objective::KMediansL1
                               : Objective::KMeansSq;
  std::vector<int> out(data.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    double best = objective_distance(metric, data[i], centers[0]);
    int arg = 0;
    for (std::size_t c = 1; c < centers.size(); ++c) {
      const double d = objective_distance(metric, data[i], centers[c]);
      if (d < best) {  // ties keep the lowest center index
        best = d;
        arg = static_cast<int>(c);
      }
    }
    out[i] = arg;
  }
  return out;
}

CostReport nearest_center_cost(const Dataset& data, const CenterSet& centers,
                               Objective objective) {
  CostReport rep;
  rep.objective = objective;
  const auto assign = nearest_center_assignment(data, centers, objective);
  rep.per_point.reserve(data.size());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = assign[i];
    const double cost = objective_distance(objective, data[i], centers[c]);
    rep.per_point.push_back({static_cast<int>(i), c, cost});
    if (objective == Objective::KCenterL2)
      total = std::max(total, cost);
    else
      total += cost;
  }
  rep.total_cost = total;
  return rep;
}

bool has_duplicate_rows(const PointSet& points) {
  const std::size_t n = points.size();
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    auto ra = points[a], rb = points[b];
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(),
                                        rb.end());
  });
  for (std::size_t i = 1; i < n; ++i) {
    auto ra = points[order[i - 1]], rb = points[order[i]];
    if (std::equal(ra.begin(), ra.end(), rb.begin())) return true;
  }
  return false;
}

}  // namespace xclust
