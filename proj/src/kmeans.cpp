#include "xclust/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xclust {

namespace {

// Shared sweep over all (dimension, midpoint) candidates.  `by_ratio` picks
// the E/f minimizer, otherwise the E minimizer; ties prefer lower dimension,
// then lower threshold, and are resolved in enumeration order.
SplitCandidate sweep_candidates(const Dataset& data, const CenterSet& centers,
                                std::span<const int> nearest,
                                std::span<const int> center_ids,
                                std::span<const int> point_ids,
                                bool by_ratio) {
  XCLUST_INPUT_CHECK(center_ids.size() >= 2,
                     "splitting a node with fewer than two centers");
  const int d = static_cast<int>(centers.dim());

  SplitCandidate best;
  bool have = false;
  std::vector<double> ccoords, values, lo, hi;
  for (int r = 0; r < d; ++r) {
    ccoords.clear();
    for (int i : center_ids) ccoords.push_back(centers.at(i, r));
    std::sort(ccoords.begin(), ccoords.end());
    const double a = ccoords.front(), b = ccoords.back();
    if (!(a < b)) continue;

    values.assign(ccoords.begin(), ccoords.end());
    for (int p : point_ids) {
      const double v = data.at(p, r);
      if (v >= a && v <= b) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    lo.clear();
    hi.clear();
    for (int p : point_ids) {
      const double px = data.at(p, r);
      const double cx = centers.at(nearest[p], r);
      if (px == cx) continue;  // never straddled in this dimension
      lo.push_back(std::min(px, cx));
      hi.push_back(std::max(px, cx));
    }
    std::sort(lo.begin(), lo.end());
    std::sort(hi.begin(), hi.end());

    std::size_t il = 0, ih = 0, ic = 0;
    for (std::size_t j = 0; j + 1 < values.size(); ++j) {
      const double v = values[j];
      while (il < lo.size() && lo[il] <= v) ++il;
      while (ih < hi.size() && hi[ih] <= v) ++ih;
      while (ic < ccoords.size() && ccoords[ic] <= v) ++ic;
      const long long mistakes = static_cast<long long>(il - ih);
      const int below = static_cast<int>(ic);
      const int above = static_cast<int>(ccoords.size()) - below;
      XCLUST_INTERNAL_CHECK(below >= 1 && above >= 1,
                            "candidate outside the open center box");
      const int balance = std::min(below, above);
      const double t = v + (values[j + 1] - v) / 2.0;
      if (!(t > v && t < values[j + 1])) continue;  // double-resolution gap
      const double ratio =
          static_cast<double>(mistakes) / static_cast<double>(balance);
      bool better;
      if (!have) {
        better = true;
      } else if (by_ratio) {
        better = ratio < best.ratio ||
                 (ratio == best.ratio &&
                  (r < best.dim || (r == best.dim && t < best.threshold)));
      } else {
        better = mistakes < best.mistakes ||
                 (mistakes == best.mistakes &&
                  (r < best.dim || (r == best.dim && t < best.threshold)));
      }
      if (better) {
        best = {r, t, mistakes, balance, ratio};
        have = true;
      }
    }
  }
  XCLUST_INPUT_CHECK(have, "no admissible split: centers are all identical");
  return best;
}

}  // namespace

SplitCandidate sweep_split(const Dataset& data, const CenterSet& centers,
                           std::span<const int> nearest,
                           std::span<const int> center_ids,
                           std::span<const int> point_ids) {
  return sweep_candidates(data, centers, nearest, center_ids, point_ids, true);
}

SplitCandidate imm_split(const Dataset& data, const CenterSet& centers,
                         std::span<const int> nearest,
                         std::span<const int> center_ids,
                         std::span<const int> point_ids) {
  return sweep_candidates(data, centers, nearest, center_ids, point_ids, false);
}

std::vector<MarginInterval> margin_intervals(const CenterSet& centers,
                                             std::span<const int> center_ids,
                                             int total_k) {
  XCLUST_INPUT_CHECK(center_ids.size() >= 2,
                     "margin intervals need at least two centers");
  const int d = static_cast<int>(centers.dim());
  const int kp = static_cast<int>(center_ids.size());
  const double L = std::log(std::max(total_k, 3));

  std::vector<MarginInterval> out;
  std::vector<double> coords;
  for (int r = 0; r < d; ++r) {
    coords.clear();
    for (int i : center_ids) coords.push_back(centers.at(i, r));
    std::sort(coords.begin(), coords.end());
    const double extent = coords.back() - coords.front();
    if (extent <= 0.0) continue;
    for (int i = 1; i < kp; ++i) {
      if (coords[i] <= coords[i - 1]) continue;
      const int balance = std::min(i, kp - i);
      const double margin = extent / (10.0 * L * balance);
      const double lo = coords[i - 1] + margin;
      const double hi = coords[i] - margin;
      if (hi <= lo) continue;
      out.push_back({r, lo, hi, balance, extent * (hi - lo) / balance});
    }
  }
  return out;
}

double margin_event_probability(const CenterSet& centers,
                                std::span<const int> center_ids, int total_k) {
  const auto intervals = margin_intervals(centers, center_ids, total_k);
  const int d = static_cast<int>(centers.dim());
  std::vector<double> extent(d, 0.0), inside(d, 0.0);
  auto box = bounding_box(centers, center_ids);
  double total_sq = 0.0;
  for (int r = 0; r < d; ++r) {
    extent[r] = box.extent(r);
    total_sq += extent[r] * extent[r];
  }
  XCLUST_INPUT_CHECK(total_sq > 0.0, "centers are all identical");
  for (const auto& iv : intervals) inside[iv.dim] += iv.hi - iv.lo;
  // P = sum_r (R_r^2 / sum R^2) * (measure of intervals in r) / R_r.
  double p = 0.0;
  for (int r = 0; r < d; ++r) p += extent[r] * inside[r];
  return p / total_sq;
}

SplitCandidate random_split(const CenterSet& centers,
                            std::span<const int> center_ids, int total_k,
                            std::mt19937_64& rng) {
  const auto intervals = margin_intervals(centers, center_ids, total_k);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  if (intervals.empty()) {
    // Every gap was consumed by its margins.  Fall back to the midpoint of
    // the largest gap in the dimension with the largest box side.
    const int d = static_cast<int>(centers.dim());
    auto box = bounding_box(centers, center_ids);
    int dim = 0;
    for (int r = 1; r < d; ++r)
      if (box.extent(r) > box.extent(dim)) dim = r;
    XCLUST_INPUT_CHECK(box.extent(dim) > 0.0, "centers are all identical");
    std::vector<double> coords;
    for (int i : center_ids) coords.push_back(centers.at(i, dim));
    std::sort(coords.begin(), coords.end());
    const int kp = static_cast<int>(coords.size());
    int gap = -1;
    double width = 0.0;
    for (int i = 1; i < kp; ++i) {
      if (coords[i] - coords[i - 1] > width) {
        width = coords[i] - coords[i - 1];
        gap = i;
      }
    }
    XCLUST_INTERNAL_CHECK(gap > 0, "positive box side without a positive gap");
    const double t = coords[gap - 1] + width / 2.0;
    XCLUST_INTERNAL_CHECK(t > coords[gap - 1] && t < coords[gap],
                          "fallback threshold collapsed onto a center");
    return {dim, t, -1, std::min(gap, kp - gap), -1.0};
  }

  double total = 0.0;
  for (const auto& iv : intervals) total += iv.weight;
  double u = unit(rng) * total;
  std::size_t pick = 0;
  for (; pick + 1 < intervals.size(); ++pick) {
    if (u < intervals[pick].weight) break;
    u -= intervals[pick].weight;
  }
  const auto& iv = intervals[pick];
  const double t = iv.lo + (iv.hi - iv.lo) * unit(rng);
  return {iv.dim, t, -1, iv.balance, -1.0};
}

SplitCandidate random_split(const CenterSet& centers,
                            std::span<const int> center_ids, int total_k,
                            uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_split(centers, center_ids, total_k, rng);
}

KMeansMethod kmeans_method_from_name(const std::string& name) {
  if (name == "sweep" || name == "mean-sweep") return KMeansMethod::Sweep;
  if (name == "random" || name == "mean-random") return KMeansMethod::Random;
  if (name == "imm") return KMeansMethod::Imm;
  throw input_error("unknown k-means method: " + name);
}

ThresholdTree build_kmeans_tree(const Dataset& data, const CenterSet& centers,
                                KMeansMethod method, uint64_t seed) {
  const int k = static_cast<int>(centers.size());
  const int d = static_cast<int>(centers.dim());
  XCLUST_INPUT_CHECK(k >= 1 && d >= 1, "need k >= 1 centers of dimension >= 1");
  XCLUST_INPUT_CHECK(!has_duplicate_rows(centers), "duplicate centers");
  XCLUST_INPUT_CHECK(data.empty() || data.dim() == centers.dim(),
                     "data/center dimension mismatch");

  ThresholdTree tree;
  tree.dim = d;
  tree.k = k;
  tree.root = 0;
  tree.nodes.emplace_back();

  std::vector<int> nearest;
  if (!data.empty())
    nearest = nearest_center_assignment(data, centers, Objective::KMeansSq);

  struct WorkNode {
    std::vector<int> cids;
    std::vector<int> pids;  // correctly classified points at this node
    int arena;
  };
  WorkNode root;
  root.arena = 0;
  root.cids.resize(k);
  for (int i = 0; i < k; ++i) root.cids[i] = i;
  root.pids.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    root.pids[i] = static_cast<int>(i);

  std::mt19937_64 rng(seed);
  std::vector<WorkNode> work;
  work.push_back(std::move(root));
  while (!work.empty()) {
    WorkNode node = std::move(work.back());
    work.pop_back();
    if (node.cids.size() == 1) {
      tree.nodes[node.arena].center = node.cids[0];
      continue;
    }

    SplitCandidate cand;
    double event_prob = -1.0;
    switch (method) {
      case KMeansMethod::Sweep:
        cand = sweep_split(data, centers, nearest, node.cids, node.pids);
        break;
      case KMeansMethod::Imm:
        cand = imm_split(data, centers, nearest, node.cids, node.pids);
        break;
      case KMeansMethod::Random:
        cand = random_split(centers, node.cids, k, rng);
        event_prob = margin_event_probability(centers, node.cids, k);
        break;
    }

    WorkNode left, right;
    for (int i : node.cids) {
      if (centers.at(i, cand.dim) < cand.threshold)
        left.cids.push_back(i);
      else
        right.cids.push_back(i);
    }
    XCLUST_INTERNAL_CHECK(!left.cids.empty() && !right.cids.empty(),
                          "split failed to separate the node's centers");

    long long separated = 0;
    for (int p : node.pids) {
      const bool point_left = data.at(p, cand.dim) < cand.threshold;
      const bool center_left =
          centers.at(nearest[p], cand.dim) < cand.threshold;
      if (point_left != center_left) {
        ++separated;  // point parts from its center here and drops out
      } else if (point_left) {
        left.pids.push_back(p);
      } else {
        right.pids.push_back(p);
      }
    }
    if (method != KMeansMethod::Random)
      XCLUST_INTERNAL_CHECK(separated == cand.mistakes,
                            "sweep mistake count disagrees with the split");

    auto box = bounding_box(centers, node.cids);
    double box_sq = 0.0;
    for (int r = 0; r < d; ++r) box_sq += box.extent(r) * box.extent(r);

    const int left_arena = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_arena = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& parent = tree.nodes[node.arena];
    parent.dim = cand.dim;
    parent.threshold = cand.threshold;
    parent.left = left_arena;
    parent.right = right_arena;

    SplitRecord rec;
    rec.node = node.arena;
    rec.dim = cand.dim;
    rec.threshold = cand.threshold;
    rec.left_centers = static_cast<int>(left.cids.size());
    rec.right_centers = static_cast<int>(right.cids.size());
    rec.mistakes = data.empty() ? -1 : separated;
    rec.box_sq = box_sq;
    rec.event_prob = event_prob;
    tree.splits.push_back(rec);

    left.arena = left_arena;
    right.arena = right_arena;
    work.push_back(std::move(right));
    work.push_back(std::move(left));
  }
  return tree;
}

std::vector<std::vector<int>> correctly_classified_sets(
    const ThresholdTree& tree, const Dataset& data, const CenterSet& centers) {
  XCLUST_INPUT_CHECK(data.empty() || data.dim() == centers.dim(),
                     "data/center dimension mismatch");
  std::vector<std::vector<int>> out(tree.nodes.size());
  std::vector<int> nearest;
  if (!data.empty())
    nearest = nearest_center_assignment(data, centers, Objective::KMeansSq);

  struct Frame {
    int node;
    std::vector<int> pids;
  };
  std::vector<Frame> stack;
  std::vector<int> all(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) all[i] = static_cast<int>(i);
  stack.push_back({tree.root, std::move(all)});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const TreeNode& nd = tree.nodes[f.node];
    out[f.node] = f.pids;
    if (nd.is_leaf()) continue;
    std::vector<int> left, right;
    for (int p : f.pids) {
      const bool point_left = data.at(p, nd.dim) < nd.threshold;
      const bool center_left =
          centers.at(nearest[p], nd.dim) < nd.threshold;
      if (point_left != center_left) continue;
      (point_left ? left : right).push_back(p);
    }
    stack.push_back({nd.left, std::move(left)});
    stack.push_back({nd.right, std::move(right)});
  }
  return out;
}

std::vector<SweepCertificate> sweep_ratio_certificates(
    const ThresholdTree& tree, const Dataset& data, const CenterSet& centers) {
  const auto cor = correctly_classified_sets(tree, data, centers);
  const auto nearest =
      nearest_center_assignment(data, centers, Objective::KMeansSq);
  const double lk = std::log(static_cast<double>(tree.k));
  std::vector<SweepCertificate> out;
  out.reserve(tree.splits.size());
  for (const auto& rec : tree.splits) {
    XCLUST_INPUT_CHECK(rec.mistakes >= 0,
                       "tree audit carries no mistake counts");
    XCLUST_INPUT_CHECK(rec.box_sq > 0.0, "tree audit carries no box sizes");
    double cost = 0.0;
    for (int p : cor[rec.node])
      cost += squared_l2_distance(data[p], centers[nearest[p]]);
    SweepCertificate cert;
    cert.node = rec.node;
    cert.ratio = static_cast<double>(rec.mistakes) /
                 static_cast<double>(rec.balance());
    cert.bound = 15.0 * lk * cost / rec.box_sq;
    cert.ok = cert.ratio <= cert.bound + 1e-9 * (1.0 + cert.bound);
    out.push_back(cert);
  }
  return out;
}

MistakeAccounting mistake_accounting_check(const ThresholdTree& tree,
                                           const Dataset& data,
                                           const CenterSet& centers) {
  MistakeAccounting acc;
  acc.tree_cost = tree_cost(tree, data, centers, Objective::KMeansSq).total_cost;
  acc.reference_cost =
      nearest_center_cost(data, centers, Objective::KMeansSq).total_cost;
  for (const auto& rec : tree.splits) {
    XCLUST_INPUT_CHECK(rec.mistakes >= 0,
                       "tree audit carries no mistake counts");
    acc.mistake_term += static_cast<double>(rec.mistakes) * rec.box_sq;
  }
  const double rhs = 2.0 * acc.reference_cost + 2.0 * acc.mistake_term;
  acc.ok = acc.tree_cost <= rhs + 1e-9 * (1.0 + rhs);
  return acc;
}

PathBalanceSum max_path_balance_sum(const ThresholdTree& tree,
                                    const Dataset& data,
                                    const CenterSet& centers) {
  const auto sets = center_sets(tree, centers);
  const auto nearest =
      nearest_center_assignment(data, centers, Objective::KMeansSq);
  PathBalanceSum res;
  res.k = tree.k;
  for (std::size_t i = 0; i < data.size(); ++i) {
    long long sum = 0;
    int u = tree.root;
    while (!tree.nodes[u].is_leaf()) {
      const auto& ids = sets[u];
      if (!std::binary_search(ids.begin(), ids.end(), nearest[i])) break;
      const TreeNode& nd = tree.nodes[u];
      sum += std::min(sets[nd.left].size(), sets[nd.right].size());
      u = data.at(i, nd.dim) < nd.threshold ? nd.left : nd.right;
    }
    res.max_sum = std::max(res.max_sum, sum);
  }
  res.ok = res.max_sum <= res.k;
  return res;
}

}  // namespace xclust
