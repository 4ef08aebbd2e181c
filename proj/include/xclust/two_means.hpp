#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "xclust/core.hpp"

namespace xclust {

// Threshold distribution for the randomized 2-means cut, as a CDF on [0, 1]:
// F(x) = 0 for x <= 0, 2x^2 on [0, 1/2], 1 - 2(1-x)^2 on [1/2, 1], 1 beyond.
// It biases thresholds toward the two centers and away from the midpoint.
double f_cdf(double x);
double f_quantile(double u);  // inverse CDF on [0, 1]
double f_sample(std::mt19937_64& rng);

struct TwoMeansSplit {
  int dim = -1;
  double threshold = 0.0;
};

// Randomized single split for k = 2: work in the canonical frame (first
// center at the origin, second at (R_1, ..., R_d) >= 0 via per-dimension
// reflections), pick dimension i with probability R_i^2 / sum R^2 and
// threshold R_i * a with a ~ F, then map back to the input frame.
TwoMeansSplit random_2means_split(const CenterSet& centers, uint64_t seed);
TwoMeansSplit random_2means_split(const CenterSet& centers,
                                  std::mt19937_64& rng);

enum class TwoMeansCostModel {
  FixedCenters,    // each side pays squared distance to its input center
  RefitCentroids,  // each side pays its within-side SSE around its centroid
};

struct TwoMeansResult {
  ThresholdTree tree;
  double cost = 0.0;
};

// Exact best single threshold split for k = 2 under the chosen cost model,
// over every dimension and every midpoint between consecutive distinct
// merged data/center coordinates inside the open center box.  Ties prefer
// lower cost, then lower dimension, then lower threshold.
// Runs in O(n d^2 + n d log n).
TwoMeansResult exact_2means_tree(const Dataset& data, const CenterSet& centers,
                                 TwoMeansCostModel model);

// Scale-free inequality behind the 3-approximation:
// sum R_i^2 (1 - 2 a_i) * sum R_i^2 F(a_i) <= 2 * sum R_i^2 * sum R_i^2 a_i^2
// for a_i in [0, 1/2].
bool algebraic_lemma_check(std::span<const double> R,
                           std::span<const double> alpha);

}  // namespace xclust
