#include "xclust/kmedians.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

namespace xclust {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void OrderedCoordinateIndex::pull(int t) {
  pool_[t].cnt = 1 + count(pool_[t].left) + count(pool_[t].right);
}

int OrderedCoordinateIndex::make_node(double key, int id) {
  const uint64_t h =
      splitmix64(std::bit_cast<uint64_t>(key) ^
                 (static_cast<uint64_t>(static_cast<uint32_t>(id)) << 32));
  int t;
  if (!free_.empty()) {
    t = free_.back();
    free_.pop_back();
  } else {
    t = static_cast<int>(pool_.size());
    pool_.emplace_back();
  }
  pool_[t] = {key, id, static_cast<uint32_t>(h), -1, -1, 1};
  return t;
}

void OrderedCoordinateIndex::release(int t) { free_.push_back(t); }

int OrderedCoordinateIndex::merge(int a, int b) {
  if (a < 0) return b;
  if (b < 0) return a;
  if (pool_[a].prio >= pool_[b].prio) {
    pool_[a].right = merge(pool_[a].right, b);
    pull(a);
    return a;
  }
  pool_[b].left = merge(a, pool_[b].left);
  pull(b);
  return b;
}

void OrderedCoordinateIndex::split(int t, double key, int id, int& a, int& b) {
  if (t < 0) {
    a = b = -1;
    return;
  }
  const bool before =
      pool_[t].key < key || (pool_[t].key == key && pool_[t].id < id);
  if (before) {
    split(pool_[t].right, key, id, pool_[t].right, b);
    a = t;
    pull(a);
  } else {
    split(pool_[t].left, key, id, a, pool_[t].left);
    b = t;
    pull(b);
  }
}

void OrderedCoordinateIndex::insert(double key, int id) {
  int a, b;
  split(root_, key, id, a, b);
  root_ = merge(merge(a, make_node(key, id)), b);
}

bool OrderedCoordinateIndex::erase(double key, int id) {
  // Single descent: remember the path, splice the node out, then repair the
  // counts along the path.  Cheaper than the split/split/merge formulation.
  path_.clear();
  int t = root_;
  while (t >= 0 && (pool_[t].key != key || pool_[t].id != id)) {
    path_.push_back(t);
    const bool go_right =
        pool_[t].key < key || (pool_[t].key == key && pool_[t].id < id);
    t = go_right ? pool_[t].right : pool_[t].left;
  }
  if (t < 0) return false;
  const int replacement = merge(pool_[t].left, pool_[t].right);
  if (path_.empty()) {
    root_ = replacement;
  } else {
    Node& parent = pool_[path_.back()];
    (parent.left == t ? parent.left : parent.right) = replacement;
  }
  release(t);
  for (int anc : path_) --pool_[anc].cnt;
  return true;
}

int OrderedCoordinateIndex::fix_counts(int t) {
  if (t < 0) return 0;
  pool_[t].cnt = 1 + fix_counts(pool_[t].left) + fix_counts(pool_[t].right);
  return pool_[t].cnt;
}

void OrderedCoordinateIndex::build_from_sorted(
    const std::vector<std::pair<double, int>>& entries) {
  pool_.clear();
  free_.clear();
  root_ = -1;
  if (entries.empty()) return;
  pool_.reserve(entries.size());
  // Right-spine stack construction of the max-priority cartesian tree.
  path_.clear();
  for (const auto& [key, id] : entries) {
    const int t = make_node(key, id);
    int last = -1;
    while (!path_.empty() && pool_[path_.back()].prio < pool_[t].prio) {
      last = path_.back();
      path_.pop_back();
    }
    pool_[t].left = last;
    if (path_.empty()) {
      root_ = t;
    } else {
      pool_[path_.back()].right = t;
    }
    path_.push_back(t);
  }
  fix_counts(root_);
}

void OrderedCoordinateIndex::drain(int t,
                                   std::vector<std::pair<double, int>>& out) {
  if (t < 0) return;
  drain(pool_[t].left, out);
  out.emplace_back(pool_[t].key, pool_[t].id);
  drain(pool_[t].right, out);
  release(t);
}

void OrderedCoordinateIndex::extract_below(
    double key, std::vector<std::pair<double, int>>& out) {
  int below, rest;
  split(root_, key, -1, below, rest);
  root_ = rest;
  drain(below, out);
}

void OrderedCoordinateIndex::extract_at_or_above(
    double key, std::vector<std::pair<double, int>>& out) {
  int below, rest;
  split(root_, key, -1, below, rest);
  root_ = below;
  drain(rest, out);
}

void OrderedCoordinateIndex::drain_all(
    std::vector<std::pair<double, int>>& out) {
  drain(root_, out);
  root_ = -1;
}

int OrderedCoordinateIndex::count_less(double key) const {
  int cnt = 0, t = root_;
  while (t >= 0) {
    if (pool_[t].key < key) {
      cnt += 1 + count(pool_[t].left);
      t = pool_[t].right;
    } else {
      t = pool_[t].left;
    }
  }
  return cnt;
}

int OrderedCoordinateIndex::count_less_equal(double key) const {
  int cnt = 0, t = root_;
  while (t >= 0) {
    if (pool_[t].key <= key) {
      cnt += 1 + count(pool_[t].left);
      t = pool_[t].right;
    } else {
      t = pool_[t].left;
    }
  }
  return cnt;
}

std::pair<double, int> OrderedCoordinateIndex::min_entry() const {
  XCLUST_INTERNAL_CHECK(root_ >= 0, "min of an empty coordinate index");
  int t = root_;
  while (pool_[t].left >= 0) t = pool_[t].left;
  return {pool_[t].key, pool_[t].id};
}

std::pair<double, int> OrderedCoordinateIndex::max_entry() const {
  XCLUST_INTERNAL_CHECK(root_ >= 0, "max of an empty coordinate index");
  int t = root_;
  while (pool_[t].right >= 0) t = pool_[t].right;
  return {pool_[t].key, pool_[t].id};
}

void OrderedCoordinateIndex::collect(int t, std::vector<int>& out) const {
  if (t < 0) return;
  collect(pool_[t].left, out);
  out.push_back(pool_[t].id);
  collect(pool_[t].right, out);
}

void OrderedCoordinateIndex::collect_below(int t, double key,
                                           std::vector<int>& out) const {
  if (t < 0) return;
  if (pool_[t].key < key) {
    collect(pool_[t].left, out);
    out.push_back(pool_[t].id);
    collect_below(pool_[t].right, key, out);
  } else {
    collect_below(pool_[t].left, key, out);
  }
}

void OrderedCoordinateIndex::collect_at_or_above(int t, double key,
                                                 std::vector<int>& out) const {
  if (t < 0) return;
  if (pool_[t].key >= key) {
    collect_at_or_above(pool_[t].left, key, out);
    out.push_back(pool_[t].id);
    collect(pool_[t].right, out);
  } else {
    collect_at_or_above(pool_[t].right, key, out);
  }
}

void OrderedCoordinateIndex::ids_below(double key, std::vector<int>& out) const {
  collect_below(root_, key, out);
}

void OrderedCoordinateIndex::ids_at_or_above(double key,
                                             std::vector<int>& out) const {
  collect_at_or_above(root_, key, out);
}

std::vector<double> split_probability_vector(const CenterSet& centers) {
  XCLUST_INPUT_CHECK(centers.size() >= 2,
                     "split distribution needs at least two centers");
  auto box = bounding_box(centers);
  std::vector<double> weights(centers.dim(), 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < centers.dim(); ++r) {
    weights[r] = box.extent(r);
    total += weights[r];
  }
  XCLUST_INPUT_CHECK(total > 0.0, "centers are all identical");
  for (auto& w : weights) w /= total;
  return weights;
}

double default_domain_bound(const PointSet& points) {
  double m = 0.0;
  for (double v : points.values()) m = std::max(m, std::abs(v));
  return m > 0.0 ? 2.0 * m : 1.0;
}

namespace {

struct FastNode {
  std::vector<OrderedCoordinateIndex> coord;  // one index per dimension
  int arena = -1;
  int count = 0;
};

void verify_boxes(const FastNode& node, const CenterSet& centers) {
  // Recompute the node's center box from scratch and compare with the
  // indexes' min/max per dimension.
  std::vector<int> ids;
  node.coord[0].ids_below(std::numeric_limits<double>::infinity(), ids);
  auto box = bounding_box(centers, ids);
  for (std::size_t r = 0; r < centers.dim(); ++r) {
    XCLUST_INTERNAL_CHECK(node.coord[r].min_key() == box.low[r] &&
                              node.coord[r].max_key() == box.high[r],
                          "coordinate index box drifted from the true box");
  }
}

}  // namespace

ThresholdTree build_fast(const CenterSet& centers, uint64_t seed,
                         KMediansBuildStats* stats, bool verify) {
  const int k = static_cast<int>(centers.size());
  const int d = static_cast<int>(centers.dim());
  XCLUST_INPUT_CHECK(k >= 1 && d >= 1, "need k >= 1 centers of dimension >= 1");
  XCLUST_INPUT_CHECK(!has_duplicate_rows(centers), "duplicate centers");

  ThresholdTree tree;
  tree.dim = d;
  tree.k = k;
  tree.root = 0;
  tree.nodes.emplace_back();
  if (k == 1) {
    tree.nodes[0].center = 0;
    return tree;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::pair<double, int>> pairs, all_pairs, keep_pairs;
  FastNode root;
  root.arena = 0;
  root.count = k;
  root.coord.resize(d);
  for (int r = 0; r < d; ++r) {
    pairs.clear();
    for (int i = 0; i < k; ++i) pairs.emplace_back(centers.at(i, r), i);
    std::sort(pairs.begin(), pairs.end());
    root.coord[r].build_from_sorted(pairs);
  }

  std::vector<FastNode> work;
  work.push_back(std::move(root));

  std::vector<double> weights(d);
  std::vector<int> moved;
  std::vector<uint8_t> moved_flag(static_cast<std::size_t>(k), 0);
  while (!work.empty()) {
    FastNode node = std::move(work.back());
    work.pop_back();

    if (node.count == 1) {
      tree.nodes[node.arena].center = node.coord[0].min_entry().second;
      continue;
    }

    double total = 0.0;
    for (int r = 0; r < d; ++r) {
      weights[r] = node.coord[r].max_key() - node.coord[r].min_key();
      total += weights[r];
    }
    XCLUST_INTERNAL_CHECK(total > 0.0, "zero-extent box over distinct centers");

    // Dimension by cumulative-weight inversion, threshold uniform in the
    // side's open interval; resample on the measure-zero collisions.
    int dim = 0;
    double z = 0.0;
    for (;;) {
      double u = unit(rng) * total;
      dim = 0;
      for (; dim + 1 < d; ++dim) {
        if (u < weights[dim]) break;
        u -= weights[dim];
      }
      if (weights[dim] <= 0.0) continue;
      const double a = node.coord[dim].min_key();
      const double b = node.coord[dim].max_key();
      z = a + (b - a) * unit(rng);
      if (z <= a || z >= b) continue;
      if (node.coord[dim].contains_coordinate(z)) continue;
      break;
    }

    const int below = node.coord[dim].count_less(z);
    const int above = node.count - below;
    XCLUST_INTERNAL_CHECK(below >= 1 && above >= 1,
                          "threshold failed to separate the node's centers");

    // Ties move the left side, matching the smaller-side rebuild rule.  The
    // split dimension's index is cut in one ordered operation.  For every
    // other dimension there are two regimes: when few centers move, erase
    // them individually and sort a scratch buffer for the child; when a
    // large fraction moves, one ordered drain of the whole index yields both
    // sides already sorted and is cheaper than the per-entry descents.
    const bool move_left = below <= above;
    pairs.clear();
    if (move_left)
      node.coord[dim].extract_below(z, pairs);
    else
      node.coord[dim].extract_at_or_above(z, pairs);
    moved.clear();
    for (const auto& [key, i] : pairs) moved.push_back(i);

    FastNode fresh;
    fresh.count = static_cast<int>(moved.size());
    fresh.coord.resize(d);
    fresh.coord[dim].build_from_sorted(pairs);
    const long long depth_bits = std::bit_width(
        static_cast<unsigned long long>(node.count));
    const bool drain_whole =
        static_cast<long long>(fresh.count) * depth_bits >= node.count;
    if (drain_whole) {
      for (int i : moved) moved_flag[static_cast<std::size_t>(i)] = 1;
      for (int r = 0; r < d; ++r) {
        if (r == dim) continue;
        all_pairs.clear();
        keep_pairs.clear();
        pairs.clear();
        node.coord[r].drain_all(all_pairs);
        for (const auto& entry : all_pairs) {
          (moved_flag[static_cast<std::size_t>(entry.second)] ? pairs
                                                              : keep_pairs)
              .push_back(entry);
        }
        XCLUST_INTERNAL_CHECK(
            static_cast<int>(pairs.size()) == fresh.count,
            "center missing from coordinate index");
        node.coord[r].build_from_sorted(keep_pairs);
        fresh.coord[r].build_from_sorted(pairs);
      }
      for (int i : moved) moved_flag[static_cast<std::size_t>(i)] = 0;
    } else {
      for (int r = 0; r < d; ++r) {
        if (r == dim) continue;
        pairs.clear();
        for (int i : moved) {
          const double key = centers.at(i, r);
          XCLUST_INTERNAL_CHECK(node.coord[r].erase(key, i),
                                "center missing from coordinate index");
          pairs.emplace_back(key, i);
        }
        std::sort(pairs.begin(), pairs.end());
        fresh.coord[r].build_from_sorted(pairs);
      }
    }
    node.count -= fresh.count;

    const int left_arena = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_arena = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& parent = tree.nodes[node.arena];
    parent.dim = dim;
    parent.threshold = z;
    parent.left = left_arena;
    parent.right = right_arena;

    tree.splits.push_back({node.arena, dim, z, below, above, -1, 0.0, -1.0});
    if (stats) {
      stats->splits++;
      stats->moved_total += std::min(below, above);
    }

    FastNode& kept = node;
    FastNode left_child = move_left ? std::move(fresh) : std::move(kept);
    FastNode right_child = move_left ? std::move(kept) : std::move(fresh);
    left_child.arena = left_arena;
    right_child.arena = right_arena;
    if (verify) {
      verify_boxes(left_child, centers);
      verify_boxes(right_child, centers);
    }
    work.push_back(std::move(right_child));
    work.push_back(std::move(left_child));
  }
  return tree;
}

ThresholdTree build_simplified(const CenterSet& centers, double domain_bound,
                               uint64_t seed, KMediansBuildStats* stats,
                               uint64_t sample_cap) {
  const int k = static_cast<int>(centers.size());
  const int d = static_cast<int>(centers.dim());
  XCLUST_INPUT_CHECK(k >= 1 && d >= 1, "need k >= 1 centers of dimension >= 1");
  XCLUST_INPUT_CHECK(!has_duplicate_rows(centers), "duplicate centers");
  XCLUST_INPUT_CHECK(domain_bound > 0.0, "domain bound must be positive");
  for (double v : centers.values())
    XCLUST_INPUT_CHECK(std::abs(v) <= domain_bound,
                       "center outside the bounded domain");

  ThresholdTree tree;
  tree.dim = d;
  tree.k = k;
  tree.root = 0;
  tree.nodes.emplace_back();
  if (k == 1) {
    tree.nodes[0].center = 0;
    return tree;
  }

  struct Leaf {
    std::vector<int> ids;
    BoundingBox box;
    int arena;
  };
  std::vector<int> all(k);
  for (int i = 0; i < k; ++i) all[i] = i;
  std::vector<Leaf> leaves;
  leaves.push_back({all, bounding_box(centers, all), 0});

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_dist(0, d - 1);
  std::uniform_real_distribution<double> z_dist(-domain_bound, domain_bound);

  int open = 1;  // leaves with more than one center
  uint64_t drawn = 0;
  while (open > 0) {
    if (drawn >= sample_cap)
      throw internal_error(
          "simplified sampler exceeded its sample cap (" +
          std::to_string(sample_cap) +
          " draws); domain bound is likely far larger than the center box");
    const int r = dim_dist(rng);
    const double z = z_dist(rng);
    ++drawn;

    // Thresholds colliding with a center coordinate are a measure-zero
    // event; resample so split sides are always strict.
    bool collision = false;
    for (int i = 0; i < k && !collision; ++i)
      collision = centers.at(i, r) == z;
    if (collision) continue;

    // One line can split several leaves at once; leaves it misses keep
    // waiting for a later draw.  Children created here are never split by
    // the same line (their boxes end strictly on one side of z).
    const std::size_t seen = leaves.size();
    for (std::size_t li = 0; li < seen; ++li) {
      if (leaves[li].ids.size() < 2 || !leaves[li].box.strictly_inside(r, z))
        continue;
      Leaf leaf = std::move(leaves[li]);
      std::vector<int> left, right;
      for (int i : leaf.ids) {
        if (centers.at(i, r) < z)
          left.push_back(i);
        else
          right.push_back(i);
      }
      XCLUST_INTERNAL_CHECK(!left.empty() && !right.empty(),
                            "line failed to split a leaf it intersects");
      const int left_arena = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const int right_arena = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& parent = tree.nodes[leaf.arena];
      parent.dim = r;
      parent.threshold = z;
      parent.left = left_arena;
      parent.right = right_arena;
      tree.splits.push_back({leaf.arena, r, z, static_cast<int>(left.size()),
                             static_cast<int>(right.size()), -1, 0.0, -1.0});
      if (stats) {
        stats->splits++;
        stats->moved_total +=
            static_cast<long long>(std::min(left.size(), right.size()));
      }
      open += (left.size() > 1) + (right.size() > 1) - 1;
      Leaf lchild{std::move(left), {}, left_arena};
      Leaf rchild{std::move(right), {}, right_arena};
      lchild.box = bounding_box(centers, lchild.ids);
      rchild.box = bounding_box(centers, rchild.ids);
      leaves[li] = std::move(lchild);
      leaves.push_back(std::move(rchild));
    }
  }
  if (stats) stats->samples_drawn = drawn;

  for (const auto& leaf : leaves)
    if (leaf.ids.size() == 1) tree.nodes[leaf.arena].center = leaf.ids[0];
  return tree;
}

}  // namespace xclust
