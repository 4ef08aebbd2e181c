#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "xclust/core.hpp"

namespace xclust {

// Ordered multiset of (coordinate, center index) pairs, ordered
// lexicographically, with logarithmic insert/erase/rank/min/max.  One index
// is kept per (tree node, dimension) during the fast k-medians build; center
// coordinates never change, so erase locates an entry directly by its
// (coordinate, id) key.
//
// Implemented as a size-augmented treap with hash-derived priorities, which
// keeps the structure deterministic without threading an RNG through it.
class OrderedCoordinateIndex {
 public:
  void insert(double key, int id);
  bool erase(double key, int id);

  // Replaces the contents with `entries`, which must be strictly increasing
  // in (key, id).  Linear time, and lays the nodes out contiguously in
  // coordinate order.
  void build_from_sorted(const std::vector<std::pair<double, int>>& entries);

  // Removes every entry on one side of `key` in one ordered cut and appends
  // the removed (coordinate, id) pairs to `out` in ascending order.  `key`
  // must not collide with a stored coordinate.  Cost O(removed + log size).
  void extract_below(double key, std::vector<std::pair<double, int>>& out);
  void extract_at_or_above(double key,
                           std::vector<std::pair<double, int>>& out);

  // Removes everything, appending the (coordinate, id) pairs to `out` in
  // ascending order.  Linear time; cheaper than repeated erase when a large
  // fraction of the entries is about to leave anyway.
  void drain_all(std::vector<std::pair<double, int>>& out);

  int size() const { return count(root_); }
  bool empty() const { return root_ < 0; }

  // Number of entries with coordinate strictly below / at most `key`.
  int count_less(double key) const;
  int count_less_equal(double key) const;
  bool contains_coordinate(double key) const {
    return count_less_equal(key) > count_less(key);
  }

  std::pair<double, int> min_entry() const;
  std::pair<double, int> max_entry() const;
  double min_key() const { return min_entry().first; }
  double max_key() const { return max_entry().first; }

  // Ids of entries with coordinate < key / >= key, in ascending coordinate
  // order.  Cost O(answer + log size).
  void ids_below(double key, std::vector<int>& out) const;
  void ids_at_or_above(double key, std::vector<int>& out) const;

 private:
  struct Node {
    double key;
    int id;
    uint32_t prio;
    int left;
    int right;
    int cnt;
  };

  int count(int t) const { return t < 0 ? 0 : pool_[t].cnt; }
  void pull(int t);
  int make_node(double key, int id);
  void release(int t);
  int merge(int a, int b);
  // a := entries < (key, id), b := the rest.
  void split(int t, double key, int id, int& a, int& b);
  int fix_counts(int t);
  void drain(int t, std::vector<std::pair<double, int>>& out);
  void collect(int t, std::vector<int>& out) const;
  void collect_below(int t, double key, std::vector<int>& out) const;
  void collect_at_or_above(int t, double key, std::vector<int>& out) const;

  std::vector<Node> pool_;
  std::vector<int> free_;
  std::vector<int> path_;  // scratch for the iterative erase descent
  int root_ = -1;
};

struct KMediansBuildStats {
  long long splits = 0;
  long long moved_total = 0;    // sum over splits of min(|left|, |right|)
  long long samples_drawn = 0;  // only the simplified builder draws samples
};

// Fast sampler: at each multi-center leaf picks a dimension with probability
// proportional to the center box side length and a threshold uniformly inside
// the box's side, then moves the smaller side into fresh coordinate indexes.
// Runs in O(k d log^2 k).  `verify` additionally recomputes each child box
// from scratch after every split and checks it against the indexes.
ThresholdTree build_fast(const CenterSet& centers, uint64_t seed,
                         KMediansBuildStats* stats = nullptr,
                         bool verify = false);

// Rejection sampler: draws (dimension, threshold) uniformly from
// [d] x [-B, B] and applies the line to every current leaf whose center box
// it strictly splits; lines that split no leaf are discarded.  Equivalent in
// distribution to build_fast, but with expected waiting time per useful line
// proportional to the domain-to-box measure ratio.  Aborts once `sample_cap`
// draws have been consumed without finishing.
ThresholdTree build_simplified(const CenterSet& centers, double domain_bound,
                               uint64_t seed,
                               KMediansBuildStats* stats = nullptr,
                               uint64_t sample_cap = 1000000000ULL);

// Distribution over split dimensions used at a node holding `centers`:
// weight of dimension r is its box side length normalized by the sum.
std::vector<double> split_probability_vector(const CenterSet& centers);

// Smallest bound B with [-B, B]^d covering every coordinate, doubled.  Used
// as the default domain bound for the simplified builder.
double default_domain_bound(const PointSet& points);

}  // namespace xclust
