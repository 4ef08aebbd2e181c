#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "xclust/core.hpp"

namespace xclust {

// A generated dataset together with its planted centers and, where known
// analytically, the planted clustering cost per objective.  Planted costs
// are cross-checked against nearest_center_cost at generation time.
struct InstanceBundle {
  std::string generator;
  int k = 0;
  int d = 0;
  uint64_t seed = 0;
  Dataset data;
  CenterSet centers;
  std::map<Objective, double> planted_cost;

  // Extra generator-specific facts.
  int min_differing_coords = 0;     // kmedians-lb: min pairwise Hamming gap
  double min_center_distance = 0;   // kmeans-lb: min pairwise l2 distance
  double separation_constant = 0;   // kmeans-lb: min distance / (k sqrt(d))
};

// Hypercube hard instance: centers are random sign vectors in {-1,1}^d with
// d = ceil(10 log2 k), resampled (up to 100 attempts) until every pair
// differs in at least max(d/10, 2) coordinates; the data consists of every
// center plus all of its single-coordinate sign flips (n = k(d+1)).
InstanceBundle gen_kmedians_lb(int k, uint64_t seed);

// Permutation hard instance: one independent permutation of 1..k per
// dimension defines the centers; the data consists of mu_i +- e_j for every
// center i and axis j (n = 2dk).  Any admissible first split already
// separates some point from its nearest center.
InstanceBundle gen_kmeans_lb(int k, int d, uint64_t seed);
int kmeans_lb_default_dim(int k);

// Deterministic chain instance in d = 2(k-1) dimensions on which the
// greedy mistake-minimizing splitter is forced into cost Theta(k) times the
// planted cost while every admissible split has balance 1.
InstanceBundle gen_imm_adversarial(int k);

// Gaussian blobs around k uniform means in [0, 10]^d; point i belongs to
// blob i mod k and gets iid N(0, spread^2) noise per coordinate.
InstanceBundle gen_blobs(int k, int d, int n, double spread, uint64_t seed);

// Seeded reference solver: distance-weighted seeding followed by alternating
// reassignment and per-cluster recentering (centroid for k-means, coordinate
// median for k-medians), until the relative improvement drops below 1e-6 or
// 100 rounds pass.  Deterministic for a fixed seed.
CenterSet solve_reference(const Dataset& data, int k, Objective objective,
                          uint64_t seed);

// Exhaustive minimum over all assignments of points into at most k groups,
// with per-group optimal centers.  n <= 14.
double brute_force_partition_opt(const Dataset& data, int k,
                                 Objective objective);

// Exhaustive minimum over all threshold trees with the given centers fixed,
// enumerating candidate thresholds at midpoints between consecutive distinct
// merged data/center coordinates inside each node's center box.
// k <= 5 and at most 12 distinct center coordinates per dimension.
double brute_force_tree_opt(const Dataset& data, const CenterSet& centers,
                            Objective objective);

// Lower bound for k-medians partitions of sign-vector data: a quarter of the
// summed average within-part l1 distances never exceeds the cost of the
// partition with per-part optimal (coordinate median) centers.
struct HypercubeBoundCheck {
  double lower_bound = 0.0;
  double partition_cost = 0.0;
  bool ok = false;
};

HypercubeBoundCheck kmedians_partition_bound(const Dataset& data,
                                             std::span<const int> labels,
                                             int k);

}  // namespace xclust
