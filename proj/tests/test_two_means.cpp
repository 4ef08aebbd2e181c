#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "xclust/core.hpp"
#include "xclust/two_means.hpp"

using namespace xclust;

namespace {

PointSet random_points(int n, int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointSet pts(static_cast<std::size_t>(d));
  std::vector<double> row(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    for (double& v : row) v = unit(rng);
    pts.push_back(row);
  }
  return pts;
}

// Exhaustive best split, evaluated point by point.
double naive_best_split(const Dataset& data, const CenterSet& centers,
                        TwoMeansCostModel model) {
  const std::size_t d = data.dim();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < d; ++r) {
    const double a = std::min(centers.at(0, r), centers.at(1, r));
    const double b = std::max(centers.at(0, r), centers.at(1, r));
    if (!(a < b)) continue;
    std::vector<double> values{a, b};
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v = data.at(i, r);
      if (v > a && v < b) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t j = 0; j + 1 < values.size(); ++j) {
      const double t = 0.5 * (values[j] + values[j + 1]);
      if (!(t > a && t < b)) continue;
      const std::size_t low_center = centers.at(0, r) < t ? 0 : 1;
      double cost = 0.0;
      if (model == TwoMeansCostModel::FixedCenters) {
        for (std::size_t i = 0; i < data.size(); ++i) {
          const std::size_t side =
              data.at(i, r) < t ? low_center : 1 - low_center;
          cost += squared_l2_distance(data[i], centers[side]);
        }
      } else {
        // Within-side SSE around the side centroid.
        std::vector<double> mean_lo(d, 0.0), mean_hi(d, 0.0);
        std::size_t n_lo = 0, n_hi = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
          const bool lo = data.at(i, r) < t;
          auto& mean = lo ? mean_lo : mean_hi;
          (lo ? n_lo : n_hi) += 1;
          for (std::size_t s = 0; s < d; ++s) mean[s] += data.at(i, s);
        }
        for (std::size_t s = 0; s < d; ++s) {
          if (n_lo) mean_lo[s] /= static_cast<double>(n_lo);
          if (n_hi) mean_hi[s] /= static_cast<double>(n_hi);
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
          const bool lo = data.at(i, r) < t;
          cost += squared_l2_distance(data[i], lo ? mean_lo : mean_hi);
        }
      }
      best = std::min(best, cost);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("distribution checkpoints") {
  CHECK(f_cdf(0.0) == 0.0);
  CHECK(f_cdf(0.25) == doctest::Approx(0.125));
  CHECK(f_cdf(0.5) == doctest::Approx(0.5));
  CHECK(f_cdf(0.75) == doctest::Approx(0.875));
  CHECK(f_cdf(1.0) == 1.0);
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    CHECK(f_cdf(x) + f_cdf(1.0 - x) == doctest::Approx(1.0));
  }
}

TEST_CASE("quantile inverts the cdf") {
  for (double u = 0.0; u <= 1.0; u += 0.001) {
    const double x = f_quantile(u);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
    CHECK(f_cdf(x) == doctest::Approx(u).epsilon(1e-10));
  }
  CHECK_THROWS_AS(f_quantile(-0.1), input_error);
  CHECK_THROWS_AS(f_quantile(1.1), input_error);
}

TEST_CASE("sampler matches the cdf in Kolmogorov distance") {
  std::mt19937_64 rng(55);
  const int n = 100000;
  std::vector<double> samples(n);
  for (double& s : samples) s = f_sample(rng);
  std::sort(samples.begin(), samples.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double fx = f_cdf(samples[static_cast<std::size_t>(i)]);
    ks = std::max(ks, std::abs(fx - (i + 1.0) / n));
    ks = std::max(ks, std::abs(fx - static_cast<double>(i) / n));
  }
  CHECK(ks < 0.01);
}

TEST_CASE("random 2-means split lands inside the center box") {
  auto centers = PointSet::from_rows({{0.0, 0.0}, {1.0, 2.0}});
  std::mt19937_64 rng(11);
  int dim0 = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    TwoMeansSplit s = random_2means_split(centers, rng);
    if (s.dim == 0) {
      ++dim0;
      CHECK(s.threshold > 0.0);
      CHECK(s.threshold < 1.0);
    } else {
      CHECK(s.threshold > 0.0);
      CHECK(s.threshold < 2.0);
    }
  }
  // Dimension i is drawn with probability R_i^2 / (R_1^2 + R_2^2) = 1/5.
  CHECK(static_cast<double>(dim0) / trials ==
        doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("swapping the centers mirrors the split") {
  auto a = PointSet::from_rows({{0.25, -1.0, 3.0}, {2.0, 4.0, -0.5}});
  auto b = PointSet::from_rows({{2.0, 4.0, -0.5}, {0.25, -1.0, 3.0}});
  for (uint64_t seed = 0; seed < 200; ++seed) {
    TwoMeansSplit sa = random_2means_split(a, seed);
    TwoMeansSplit sb = random_2means_split(b, seed);
    CHECK(sa.dim == sb.dim);
    const auto r = static_cast<std::size_t>(sa.dim);
    const double mid = a.at(0, r) + a.at(1, r);
    CHECK(sa.threshold + sb.threshold == doctest::Approx(mid).epsilon(1e-12));
  }
}

TEST_CASE("identical centers are rejected") {
  auto centers = PointSet::from_rows({{1.0, 2.0}, {1.0, 2.0}});
  CHECK_THROWS_AS(random_2means_split(centers, 1), input_error);
  std::mt19937_64 rng(1);
  Dataset data = random_points(5, 2, rng);
  CHECK_THROWS_AS(
      exact_2means_tree(data, centers, TwoMeansCostModel::FixedCenters),
      input_error);
}

TEST_CASE("exact tree matches the naive scan under both models") {
  std::mt19937_64 rng(321);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 37);
    const int d = 1 + static_cast<int>(rng() % 3);
    Dataset data = random_points(n, d, rng);
    CenterSet centers = random_points(2, d, rng);
    for (TwoMeansCostModel model : {TwoMeansCostModel::FixedCenters,
                                    TwoMeansCostModel::RefitCentroids}) {
      TwoMeansResult result = exact_2means_tree(data, centers, model);
      const double naive = naive_best_split(data, centers, model);
      CHECK(result.cost == doctest::Approx(naive).epsilon(1e-9));
      validate_with_centers(result.tree, centers);
      CHECK(result.tree.leaf_count() == 2);
      if (model == TwoMeansCostModel::FixedCenters) {
        const double routed =
            tree_cost(result.tree, data, centers, Objective::KMeansSq)
                .total_cost;
        CHECK(routed == doctest::Approx(result.cost).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("refit never costs more than fixed centers") {
  std::mt19937_64 rng(654);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset data = random_points(30, 2, rng);
    CenterSet centers = random_points(2, 2, rng);
    const double fixed =
        exact_2means_tree(data, centers, TwoMeansCostModel::FixedCenters).cost;
    const double refit =
        exact_2means_tree(data, centers, TwoMeansCostModel::RefitCentroids)
            .cost;
    CHECK(refit <= fixed + 1e-9);
  }
}

TEST_CASE("algebraic inequality holds on random inputs") {
  std::mt19937_64 rng(987);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t len = 1 + rng() % 8;
    std::vector<double> big_r(len), alpha(len);
    for (std::size_t i = 0; i < len; ++i) {
      big_r[i] = unit(rng) + 1e-12;
      alpha[i] = 0.5 * unit(rng);
    }
    CHECK(algebraic_lemma_check(big_r, alpha));
  }
  std::vector<double> big_r{1.0};
  std::vector<double> bad_alpha{0.7};
  CHECK_THROWS_AS(algebraic_lemma_check(big_r, bad_alpha), input_error);
}
