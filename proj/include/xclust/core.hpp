#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xclust {

// Thrown on malformed inputs (bad files, dimension mismatches, duplicate
// centers, ...).  The CLI maps this to exit code 2.
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an internal invariant breaks.  The CLI maps this to exit code 3.
struct internal_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define XCLUST_INPUT_CHECK(cond, msg) \
  do {                                \
    if (!(cond)) throw ::xclust::input_error(msg); \
  } while (0)

#define XCLUST_INTERNAL_CHECK(cond, msg) \
  do {                                   \
    if (!(cond)) throw ::xclust::internal_error(msg); \
  } while (0)

enum class Objective { KMediansL1, KMeansSq, KCenterL2 };

std::string objective_name(Objective o);
Objective objective_from_name(const std::string& name);

// Dense row-major point matrix.  Used both for datasets and center sets.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t n, std::size_t dim) : dim_(dim), values_(n * dim, 0.0) {}

  static PointSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return values_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) {
    return {values_.data() + i * dim_, dim_};
  }
  double at(std::size_t i, std::size_t r) const { return values_[i * dim_ + r]; }

  void push_back(std::span<const double> row);
  void push_back(std::initializer_list<double> row);

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

using Dataset = PointSet;
using CenterSet = PointSet;

double l1_distance(std::span<const double> a, std::span<const double> b);
double squared_l2_distance(std::span<const double> a, std::span<const double> b);
double l2_distance(std::span<const double> a, std::span<const double> b);

// Point-to-center distance under an objective's metric (l1, squared l2, l2).
double objective_distance(Objective o, std::span<const double> a,
                          std::span<const double> b);

// Axis-aligned box spanned by a set of points.
struct BoundingBox {
  std::vector<double> low;
  std::vector<double> high;

  std::size_t dim() const { return low.size(); }
  double extent(std::size_t r) const { return high[r] - low[r]; }
  bool strictly_inside(std::size_t r, double z) const {
    return low[r] < z && z < high[r];
  }
};

BoundingBox bounding_box(const PointSet& points);
BoundingBox bounding_box(const PointSet& points, std::span<const int> subset);

// Binary threshold tree with one center per leaf.  Internal nodes route
// x to the left child when x[dim] < threshold and to the right child when
// x[dim] >= threshold.  Nodes live in an arena; `root` indexes into it.
struct TreeNode {
  int dim = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int center = -1;  // leaf payload: index into the center set

  bool is_leaf() const { return dim < 0; }
};

// Per-split bookkeeping recorded by the builders, in split order.
// `mistakes` is the number of correctly classified points the split
// separates from their nearest center (-1 when the builder had no data),
// `box_sq` the sum over dimensions of the squared box side lengths of the
// split node, and `event_prob` the exact probability that the random
// splitter's margin event holds at the node (-1 for deterministic splits).
struct SplitRecord {
  int node = -1;
  int dim = -1;
  double threshold = 0.0;
  int left_centers = 0;
  int right_centers = 0;
  long long mistakes = -1;
  double box_sq = 0.0;
  double event_prob = -1.0;

  int balance() const { return std::min(left_centers, right_centers); }
};

struct ThresholdTree {
  int dim = 0;   // dimensionality of the space
  int k = 0;     // number of leaves / centers
  int root = -1;
  std::vector<TreeNode> nodes;
  std::vector<SplitRecord> splits;

  int assign(std::span<const double> x) const;
  int height() const;
  int leaf_count() const;
};

// Structural validation: every node reachable exactly once, internal nodes
// have two children, exactly k leaves whose centers are a permutation of
// 0..k-1.  Throws input_error on violation.
void validate_structure(const ThresholdTree& tree);

// Full validation against a center set: additionally checks that every
// internal node's threshold strictly separates the centers reaching it and
// lies strictly inside their bounding box, and that each leaf is reached by
// exactly its own center.
void validate_with_centers(const ThresholdTree& tree, const CenterSet& centers);

// Center indices reaching each node, indexed by arena position.
std::vector<std::vector<int>> center_sets(const ThresholdTree& tree,
                                          const CenterSet& centers);

struct PointCost {
  int point = -1;
  int center = -1;
  double cost = 0.0;
};

struct CostReport {
  Objective objective = Objective::KMeansSq;
  double total_cost = 0.0;  // sum of per-point costs (max for k-center)
  std::vector<PointCost> per_point;
  std::optional<double> reference_cost;
  std::optional<double> ratio;

  void set_reference(double ref);
};

// Cost of routing every point through the tree to its leaf center.
CostReport tree_cost(const ThresholdTree& tree, const Dataset& data,
                     const CenterSet& centers, Objective objective);

// Cost of the unconstrained assignment to the nearest center
// (ties broken toward the lowest center index).
CostReport nearest_center_cost(const Dataset& data, const CenterSet& centers,
                               Objective objective);

std::vector<int> nearest_center_assignment(const Dataset& data,
                                           const CenterSet& centers,
                                           Objective objective);

// True when some pair of rows is identical (tree builders reject these).
bool has_duplicate_rows(const PointSet& points);

}  // namespace xclust
