#include "xclust/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

namespace xclust {

namespace {

void cross_check_planted(InstanceBundle& b) {
  for (auto& [objective, planted] : b.planted_cost) {
    const double actual =
        nearest_center_cost(b.data, b.centers, objective).total_cost;
    XCLUST_INTERNAL_CHECK(
        std::abs(actual - planted) <= 1e-9 * (1.0 + std::abs(planted)),
        "planted cost disagrees with nearest-center cost for " +
            objective_name(objective));
  }
}

}  // namespace

InstanceBundle gen_kmedians_lb(int k, uint64_t seed) {
  XCLUST_INPUT_CHECK(k >= 2, "k >= 2 required");
  const int d = static_cast<int>(std::ceil(10.0 * std::log2(double(k))));
  // A pair of centers differing in a single coordinate would collide with
  // one of its neighbors' flips, so ask for at least two differing
  // coordinates even when d/10 < 2.
  const double min_diff = std::max(d / 10.0, 2.0);

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);

  InstanceBundle b;
  b.generator = "kmedians-lb";
  b.k = k;
  b.d = d;
  b.seed = seed;

  const int max_attempts = 100;
  for (int attempt = 1;; ++attempt) {
    XCLUST_INPUT_CHECK(attempt <= max_attempts,
                       "could not draw well-separated sign centers in 100 "
                       "attempts");
    CenterSet centers(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
    for (int i = 0; i < k; ++i)
      for (int r = 0; r < d; ++r)
        centers.row(i)[r] = coin(rng) ? 1.0 : -1.0;
    int worst = d;
    for (int i = 0; i < k && worst >= min_diff; ++i) {
      for (int j = i + 1; j < k; ++j) {
        int diff = 0;
        for (int r = 0; r < d; ++r)
          diff += centers.at(i, r) != centers.at(j, r);
        worst = std::min(worst, diff);
        if (worst < min_diff) break;
      }
    }
    if (worst >= min_diff) {
      b.centers = std::move(centers);
      b.min_differing_coords = worst;
      break;
    }
  }

  Dataset data(static_cast<std::size_t>(k) * (d + 1),
               static_cast<std::size_t>(d));
  std::size_t row = 0;
  for (int i = 0; i < k; ++i, ++row)
    std::copy_n(b.centers[i].begin(), d, data.row(row).begin());
  for (int i = 0; i < k; ++i) {
    for (int r = 0; r < d; ++r, ++row) {
      std::copy_n(b.centers[i].begin(), d, data.row(row).begin());
      data.row(row)[r] = -data.at(row, r);
    }
  }
  b.data = std::move(data);
  // Every flip sits at l1 distance 2 (squared l2 distance 4) from its own
  // center and no closer to any other.
  b.planted_cost[Objective::KMediansL1] = 2.0 * d * k;
  b.planted_cost[Objective::KMeansSq] = 4.0 * d * k;
  cross_check_planted(b);
  return b;
}

int kmeans_lb_default_dim(int k) {
  const int lg = static_cast<int>(std::ceil(std::log2(double(k))));
  return std::max(8 * lg, 8);
}

InstanceBundle gen_kmeans_lb(int k, int d, uint64_t seed) {
  XCLUST_INPUT_CHECK(k >= 2, "k >= 2 required");
  XCLUST_INPUT_CHECK(d >= 1, "d >= 1 required");

  InstanceBundle b;
  b.generator = "kmeans-lb";
  b.k = k;
  b.d = d;
  b.seed = seed;

  std::mt19937_64 rng(seed);
  CenterSet centers(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
  std::vector<int> perm(k);
  for (int r = 0; r < d; ++r) {
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < k; ++i) centers.row(i)[r] = perm[i];
  }
  b.centers = std::move(centers);

  Dataset data(2 * static_cast<std::size_t>(d) * k, static_cast<std::size_t>(d));
  std::size_t row = 0;
  for (int i = 0; i < k; ++i) {
    for (int r = 0; r < d; ++r) {
      std::copy_n(b.centers[i].begin(), d, data.row(row).begin());
      data.row(row)[r] += 1.0;
      ++row;
      std::copy_n(b.centers[i].begin(), d, data.row(row).begin());
      data.row(row)[r] -= 1.0;
      ++row;
    }
  }
  b.data = std::move(data);

  double min_dist_sq = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      min_dist_sq =
          std::min(min_dist_sq, squared_l2_distance(b.centers[i], b.centers[j]));
  b.min_center_distance = std::sqrt(min_dist_sq);
  b.separation_constant = b.min_center_distance / (k * std::sqrt(double(d)));

  b.planted_cost[Objective::KMeansSq] = 2.0 * d * k;
  b.planted_cost[Objective::KMediansL1] = 2.0 * d * k;
  cross_check_planted(b);
  return b;
}

InstanceBundle gen_imm_adversarial(int k) {
  XCLUST_INPUT_CHECK(k >= 3, "k >= 3 required");
  const int m = k - 1;
  const int d = 2 * m;

  InstanceBundle b;
  b.generator = "imm-adversarial";
  b.k = k;
  b.d = d;

  // Center 0 is the origin; center i (i >= 1) is e_{i-1} plus ones on the
  // trailing m coordinates.
  CenterSet centers(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
  for (int i = 1; i < k; ++i) {
    centers.row(i)[i - 1] = 1.0;
    for (int r = m; r < d; ++r) centers.row(i)[r] = 1.0;
  }
  b.centers = std::move(centers);

  Dataset data(static_cast<std::size_t>(3 * m) * k, static_cast<std::size_t>(d));
  std::size_t row = 0;
  for (int i = 1; i < k; ++i)
    for (int c = 0; c < 3 * m; ++c, ++row)
      std::copy_n(b.centers[i].begin(), d, data.row(row).begin());
  for (int r = 0; r < d; ++r) {
    const int copies = r < m ? 1 : 2;
    for (int c = 0; c < copies; ++c, ++row) data.row(row)[r] = 1.0;
  }
  XCLUST_INTERNAL_CHECK(row == data.size(), "row count mismatch");
  b.data = std::move(data);

  // Each unit vector costs 1 against the origin center; everything else is
  // a center copy.
  b.planted_cost[Objective::KMediansL1] = 3.0 * m;
  b.planted_cost[Objective::KMeansSq] = 3.0 * m;
  cross_check_planted(b);
  return b;
}

InstanceBundle gen_blobs(int k, int d, int n, double spread, uint64_t seed) {
  XCLUST_INPUT_CHECK(k >= 1 && d >= 1 && n >= k, "need n >= k >= 1, d >= 1");
  XCLUST_INPUT_CHECK(spread >= 0.0, "spread must be nonnegative");

  InstanceBundle b;
  b.generator = "blobs";
  b.k = k;
  b.d = d;
  b.seed = seed;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  std::normal_distribution<double> noise(0.0, spread > 0.0 ? spread : 1.0);

  CenterSet centers(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
  for (int i = 0; i < k; ++i)
    for (int r = 0; r < d; ++r) centers.row(i)[r] = unif(rng);
  b.centers = std::move(centers);

  Dataset data(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    const int blob = i % k;
    for (int r = 0; r < d; ++r) {
      double v = b.centers.at(blob, r);
      if (spread > 0.0) v += noise(rng);
      data.row(i)[r] = v;
    }
  }
  b.data = std::move(data);

  b.planted_cost[Objective::KMediansL1] =
      nearest_center_cost(b.data, b.centers, Objective::KMediansL1).total_cost;
  b.planted_cost[Objective::KMeansSq] =
      nearest_center_cost(b.data, b.centers, Objective::KMeansSq).total_cost;
  return b;
}

namespace {

// Optimal center of a group under the objective: centroid for k-means,
// coordinate-wise median (mid of the middle two for even sizes) for
// k-medians.
std::vector<double> group_center(const Dataset& data,
                                 std::span<const int> members, Objective obj) {
  const int d = static_cast<int>(data.dim());
  std::vector<double> center(d, 0.0);
  if (obj == Objective::KMeansSq) {
    for (int p : members)
      for (int r = 0; r < d; ++r) center[r] += data.at(p, r);
    for (int r = 0; r < d; ++r) center[r] /= static_cast<double>(members.size());
    return center;
  }
  std::vector<double> coords(members.size());
  for (int r = 0; r < d; ++r) {
    for (std::size_t i = 0; i < members.size(); ++i)
      coords[i] = data.at(members[i], r);
    std::sort(coords.begin(), coords.end());
    const std::size_t m = coords.size();
    center[r] = m % 2 == 1 ? coords[m / 2]
                           : (coords[m / 2 - 1] + coords[m / 2]) / 2.0;
  }
  return center;
}

double group_cost(const Dataset& data, std::span<const int> members,
                  std::span<const double> center, Objective obj) {
  double s = 0.0;
  for (int p : members) s += objective_distance(obj, data[p], center);
  return s;
}

}  // namespace

CenterSet solve_reference(const Dataset& data, int k, Objective objective,
                          uint64_t seed) {
  XCLUST_INPUT_CHECK(k >= 1, "k >= 1 required");
  XCLUST_INPUT_CHECK(static_cast<int>(data.size()) >= k,
                     "need at least k points");
  XCLUST_INPUT_CHECK(objective != Objective::KCenterL2,
                     "reference solver supports kmedians and kmeans only");
  const std::size_t n = data.size();
  const int d = static_cast<int>(data.dim());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Distance-weighted seeding on the data points.
  std::vector<int> seeds;
  seeds.push_back(static_cast<int>(
      std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)));
  std::vector<double> weight(n, 0.0);
  while (static_cast<int>(seeds.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int s : seeds)
        best = std::min(best, objective_distance(objective, data[i], data[s]));
      weight[i] = best;
      total += best;
    }
    int next = -1;
    if (total > 0.0) {
      double u = unit(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (u < weight[i]) {
          next = static_cast<int>(i);
          break;
        }
        u -= weight[i];
      }
      if (next < 0) next = static_cast<int>(n - 1);
    } else {
      // All remaining points coincide with a seed; take the first unused.
      for (std::size_t i = 0; i < n && next < 0; ++i)
        if (std::find(seeds.begin(), seeds.end(), static_cast<int>(i)) ==
            seeds.end())
          next = static_cast<int>(i);
      XCLUST_INPUT_CHECK(next >= 0, "fewer distinct points than k");
    }
    seeds.push_back(next);
  }

  CenterSet centers(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
  for (int c = 0; c < k; ++c)
    std::copy_n(data[seeds[c]].begin(), d, centers.row(c).begin());

  double prev_cost = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> groups(k);
  for (int round = 0; round < 100; ++round) {
    for (auto& g : groups) g.clear();
    auto assign = nearest_center_assignment(data, centers, objective);
    for (std::size_t i = 0; i < n; ++i)
      groups[assign[i]].push_back(static_cast<int>(i));

    // Re-seed any emptied cluster at the point farthest from its center.
    for (int c = 0; c < k; ++c) {
      if (!groups[c].empty()) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (groups[assign[i]].size() <= 1) continue;
        const double dist =
            objective_distance(objective, data[i], centers[assign[i]]);
        if (dist > far_d) {
          far_d = dist;
          far = i;
        }
      }
      XCLUST_INPUT_CHECK(far_d >= 0.0, "cannot repopulate empty cluster");
      auto& from = groups[assign[far]];
      from.erase(std::find(from.begin(), from.end(), static_cast<int>(far)));
      groups[c].push_back(static_cast<int>(far));
      assign[far] = c;
    }

    double cost = 0.0;
    for (int c = 0; c < k; ++c) {
      const auto center = group_center(data, groups[c], objective);
      std::copy(center.begin(), center.end(), centers.row(c).begin());
      cost += group_cost(data, groups[c], center, objective);
    }
    if (prev_cost - cost <= 1e-6 * std::max(1.0, std::abs(prev_cost))) break;
    prev_cost = cost;
  }
  return centers;
}

namespace {

void partition_rec(const Dataset& data, int k, Objective obj,
                   std::vector<int>& labels, std::size_t next, int used,
                   double& best) {
  const std::size_t n = data.size();
  if (next == n) {
    std::vector<std::vector<int>> groups(used);
    for (std::size_t i = 0; i < n; ++i)
      groups[labels[i]].push_back(static_cast<int>(i));
    double cost = 0.0;
    for (const auto& g : groups) {
      const auto center = group_center(data, g, obj);
      cost += group_cost(data, g, center, obj);
      if (cost >= best) return;
    }
    best = std::min(best, cost);
    return;
  }
  // Restricted-growth labeling kills the k! label symmetry.
  const int lim = std::min(used + 1, k);
  for (int lab = 0; lab < lim; ++lab) {
    labels[next] = lab;
    partition_rec(data, k, obj, labels, next + 1, std::max(used, lab + 1),
                  best);
  }
}

}  // namespace

double brute_force_partition_opt(const Dataset& data, int k,
                                 Objective objective) {
  XCLUST_INPUT_CHECK(data.size() >= 1, "empty dataset");
  XCLUST_INPUT_CHECK(data.size() <= 14, "partition oracle capped at n <= 14");
  XCLUST_INPUT_CHECK(k >= 1, "k >= 1 required");
  XCLUST_INPUT_CHECK(objective != Objective::KCenterL2,
                     "oracle supports kmedians and kmeans only");
  std::vector<int> labels(data.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  partition_rec(data, k, objective, labels, 0, 0, best);
  return best;
}

namespace {

struct TreeOptKey {
  uint32_t centers;
  uint64_t points;
  bool operator==(const TreeOptKey&) const = default;
};

struct TreeOptHash {
  std::size_t operator()(const TreeOptKey& k) const {
    return std::hash<uint64_t>()(k.points * 0x9E3779B97F4A7C15ULL ^ k.centers);
  }
};

struct TreeOptCtx {
  const Dataset& data;
  const CenterSet& centers;
  Objective obj;
  bool memoize;
  std::unordered_map<TreeOptKey, double, TreeOptHash> memo;
};

double tree_opt_rec(TreeOptCtx& ctx, const std::vector<int>& cids,
                    const std::vector<int>& pids) {
  if (cids.size() == 1) {
    double s = 0.0;
    for (int p : pids)
      s += objective_distance(ctx.obj, ctx.data[p], ctx.centers[cids[0]]);
    return s;
  }
  TreeOptKey key{0, 0};
  if (ctx.memoize) {
    for (int c : cids) key.centers |= 1u << c;
    for (int p : pids) key.points |= uint64_t(1) << p;
    auto it = ctx.memo.find(key);
    if (it != ctx.memo.end()) return it->second;
  }

  const int d = static_cast<int>(ctx.centers.dim());
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> values;
  for (int r = 0; r < d; ++r) {
    double a = std::numeric_limits<double>::infinity(), b = -a;
    for (int c : cids) {
      a = std::min(a, ctx.centers.at(c, r));
      b = std::max(b, ctx.centers.at(c, r));
    }
    if (!(a < b)) continue;
    values.clear();
    for (int c : cids) values.push_back(ctx.centers.at(c, r));
    for (int p : pids) {
      const double v = ctx.data.at(p, r);
      if (v >= a && v <= b) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t j = 0; j + 1 < values.size(); ++j) {
      const double t = values[j] + (values[j + 1] - values[j]) / 2.0;
      if (!(t > values[j] && t < values[j + 1])) continue;
      std::vector<int> lc, rc, lp, rp;
      for (int c : cids)
        (ctx.centers.at(c, r) < t ? lc : rc).push_back(c);
      for (int p : pids)
        (ctx.data.at(p, r) < t ? lp : rp).push_back(p);
      const double cost = tree_opt_rec(ctx, lc, lp) + tree_opt_rec(ctx, rc, rp);
      best = std::min(best, cost);
    }
  }
  XCLUST_INTERNAL_CHECK(best < std::numeric_limits<double>::infinity(),
                        "no admissible split over distinct centers");
  if (ctx.memoize) ctx.memo.emplace(key, best);
  return best;
}

}  // namespace

double brute_force_tree_opt(const Dataset& data, const CenterSet& centers,
                            Objective objective) {
  XCLUST_INPUT_CHECK(centers.size() >= 1 && centers.size() <= 5,
                     "tree oracle capped at k <= 5");
  XCLUST_INPUT_CHECK(objective != Objective::KCenterL2,
                     "oracle supports kmedians and kmeans only");
  XCLUST_INPUT_CHECK(data.dim() == centers.dim(),
                     "data/center dimension mismatch");
  XCLUST_INPUT_CHECK(!has_duplicate_rows(centers), "duplicate centers");
  for (std::size_t r = 0; r < centers.dim(); ++r) {
    std::vector<double> coords;
    for (std::size_t i = 0; i < centers.size(); ++i)
      coords.push_back(centers.at(i, r));
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    XCLUST_INPUT_CHECK(coords.size() <= 12,
                       "tree oracle capped at 12 distinct center coordinates "
                       "per dimension");
  }

  TreeOptCtx ctx{data, centers, objective, data.size() <= 64, {}};
  std::vector<int> cids(centers.size()), pids(data.size());
  std::iota(cids.begin(), cids.end(), 0);
  std::iota(pids.begin(), pids.end(), 0);
  return tree_opt_rec(ctx, cids, pids);
}

HypercubeBoundCheck kmedians_partition_bound(const Dataset& data,
                                             std::span<const int> labels,
                                             int k) {
  XCLUST_INPUT_CHECK(labels.size() == data.size(), "label count mismatch");
  for (double v : data.values())
    XCLUST_INPUT_CHECK(v == 1.0 || v == -1.0, "data must be sign vectors");

  std::vector<std::vector<int>> groups(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    XCLUST_INPUT_CHECK(labels[i] >= 0 && labels[i] < k, "label out of range");
    groups[labels[i]].push_back(static_cast<int>(i));
  }

  HypercubeBoundCheck chk;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    // Average within-part distance contribution, zero for singletons.
    if (g.size() > 1) {
      for (std::size_t a = 0; a < g.size(); ++a) {
        double s = 0.0;
        for (std::size_t bidx = 0; bidx < g.size(); ++bidx)
          if (bidx != a) s += l1_distance(data[g[a]], data[g[bidx]]);
        chk.lower_bound += s / static_cast<double>(g.size() - 1);
      }
    }
    const auto center = group_center(data, g, Objective::KMediansL1);
    chk.partition_cost += group_cost(data, g, center, Objective::KMediansL1);
  }
  chk.lower_bound /= 4.0;
  chk.ok = chk.lower_bound <= chk.partition_cost +
                                  1e-9 * (1.0 + chk.partition_cost);
  return chk;
}

}  // namespace xclust
