#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "xclust/core.hpp"

namespace xclust {

// A scored axis-aligned split of a node.  `mistakes` counts the correctly
// classified points of the node that the split separates from their nearest
// center, `balance` the smaller of the two center counts, `ratio` their
// quotient.  Splitters that never look at data report mistakes = -1 and
// ratio = -1.
struct SplitCandidate {
  int dim = -1;
  double threshold = 0.0;
  long long mistakes = -1;
  int balance = 0;
  double ratio = -1.0;
};

// Exact minimizer of mistakes/balance over every dimension and every
// midpoint between consecutive distinct coordinates of the node's centers
// and correctly classified points, restricted to the open center box side.
// Ties prefer lower ratio, then lower dimension, then lower threshold.
SplitCandidate sweep_split(const Dataset& data, const CenterSet& centers,
                           std::span<const int> nearest,
                           std::span<const int> center_ids,
                           std::span<const int> point_ids);

// Same candidate set and tie-breaking, but minimizes mistakes alone.
SplitCandidate imm_split(const Dataset& data, const CenterSet& centers,
                         std::span<const int> nearest,
                         std::span<const int> center_ids,
                         std::span<const int> point_ids);

// One admissible (dim, threshold) interval for the random splitter: the gap
// between two consecutive center coordinates shrunk by a margin of
// R_r / (10 * ln(max(k, 3)) * balance) on each end, where k is the total
// number of centers.  Sampling weight is R_r * length / balance.
struct MarginInterval {
  int dim = -1;
  double lo = 0.0;
  double hi = 0.0;
  int balance = 0;
  double weight = 0.0;
};

std::vector<MarginInterval> margin_intervals(const CenterSet& centers,
                                             std::span<const int> center_ids,
                                             int total_k);

// Exact probability that drawing dim r with probability proportional to
// R_r^2 and a threshold uniform on the box side lands inside some margin
// interval.  This is the event the random splitter conditions on.
double margin_event_probability(const CenterSet& centers,
                                std::span<const int> center_ids, int total_k);

// Samples an interval by cumulative-weight inversion and a threshold
// uniformly within it.  When every margin interval is empty, falls back to
// the midpoint of the largest center gap in the dimension with the largest
// box side.
SplitCandidate random_split(const CenterSet& centers,
                            std::span<const int> center_ids, int total_k,
                            std::mt19937_64& rng);
SplitCandidate random_split(const CenterSet& centers,
                            std::span<const int> center_ids, int total_k,
                            uint64_t seed);

enum class KMeansMethod { Sweep, Random, Imm };

KMeansMethod kmeans_method_from_name(const std::string& name);

// Builds a threshold tree by repeatedly splitting multi-center leaves with
// the chosen splitter.  Correctly classified point sets are maintained
// top-down (a point separated from its nearest center drops out of every
// descendant's set).  The random splitter never reads the data, but when
// data is supplied the per-split audit still records the mistake counts so
// the tree can be checked without re-simulation; with an empty dataset those
// fields stay -1.
ThresholdTree build_kmeans_tree(const Dataset& data, const CenterSet& centers,
                                KMeansMethod method, uint64_t seed);

// Correctly classified point ids for every arena node of the tree: points
// that reach the node together with their nearest center.
std::vector<std::vector<int>> correctly_classified_sets(
    const ThresholdTree& tree, const Dataset& data, const CenterSet& centers);

// Per-split certificate: the chosen ratio against
// 15 ln(k) * sum of squared point-to-center distances over the node's
// correctly classified points / sum of squared box side lengths.
struct SweepCertificate {
  int node = -1;
  double ratio = 0.0;
  double bound = 0.0;
  bool ok = false;
};

std::vector<SweepCertificate> sweep_ratio_certificates(
    const ThresholdTree& tree, const Dataset& data, const CenterSet& centers);

// Global accounting check: tree cost <= 2 * nearest-center cost +
// 2 * sum over splits of mistakes * box_sq.  Requires the tree's audit to
// carry mistake counts.
struct MistakeAccounting {
  double tree_cost = 0.0;
  double reference_cost = 0.0;
  double mistake_term = 0.0;
  bool ok = false;
};

MistakeAccounting mistake_accounting_check(const ThresholdTree& tree,
                                           const Dataset& data,
                                           const CenterSet& centers);

// Maximum over points of the sum of split balances along the prefix of the
// point's root-leaf path on which it stays with its nearest center.  Always
// at most k.
struct PathBalanceSum {
  long long max_sum = 0;
  int k = 0;
  bool ok = false;
};

PathBalanceSum max_path_balance_sum(const ThresholdTree& tree,
                                    const Dataset& data,
                                    const CenterSet& centers);

}  // namespace xclust
