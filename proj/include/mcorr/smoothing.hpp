#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mcorr/data.hpp"

namespace mcorr {

/// knn with k = max(5, round(N^(4/5) / 10)), clamped to N.
inline SmootherSpec default_smoother(std::size_t n) {
  const double k = std::round(std::pow(static_cast<double>(n), 0.8) / 10.0);
  return SmootherSpec::knn(std::min<std::size_t>(n, std::max<std::size_t>(5, static_cast<std::size_t>(k))));
}

/// Empirical conditional expectation E[target | x] for a fixed conditioning
/// sample `x`. The neighbourhood structure depends only on `x` and the smoother settings,
/// so one plan serves every target of an alternating fit.
///
/// Samples are ordered by (x, original index). Each distinct x value is a
/// group and gets one knot. A group's estimate is the mean of the target over
/// its neighbourhood:
///  - knn: the k samples closest in |x - v|; at equal distance the lower
///    original index wins, so a group with >= k members averages its own k
///    lowest-index members.
///  - bins: the equal-count bin holding the group. Groups are never split;
///    with at most n_bins distinct values every group is its own bin.
class SmootherPlan {
 public:
  SmootherPlan(std::span<const double> x, const SmootherSpec& spec) : n_(x.size()) {
    if (n_ < 3) throw Error(ErrorKind::TooFewSamples, "smoothing needs at least 3 samples");
    if (spec.size < 1 || spec.size > n_)
      throw Error(ErrorKind::OutOfRange, to_string(spec) + " is out of range for N=" + std::to_string(n_));

    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    sorted_x_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) sorted_x_[i] = x[order_[i]];

    group_of_.resize(n_);
    for (std::size_t i = 0; i < n_;) {
      std::size_t j = i;
      while (j < n_ && sorted_x_[j] == sorted_x_[i]) group_of_[order_[j++]] = group_begin_.size();
      group_begin_.push_back(i);
      knot_x_.push_back(sorted_x_[i]);
      i = j;
    }
    group_begin_.push_back(n_);

    if (spec.kind == SmootherSpec::Kind::knn)
      build_knn(spec.size);
    else
      build_bins(spec.size);
  }

  std::size_t n() const { return n_; }
  std::size_t groups() const { return knot_x_.size(); }
  std::span<const double> knot_inputs() const { return knot_x_; }
  /// Group (knot) index of every sample.
  std::span<const std::size_t> group_of() const { return group_of_; }

  /// Smoothed value at each distinct x.
  std::vector<double> apply_knots(std::span<const double> target) const {
    if (target.size() != n_) throw Error(ErrorKind::LengthMismatch, "target length differs from x");
    std::vector<long double> prefix(n_ + 1, 0.0L);
    for (std::size_t i = 0; i < n_; ++i) prefix[i + 1] = prefix[i] + target[order_[i]];
    std::vector<double> out(groups());
    for (std::size_t g = 0; g < groups(); ++g) {
      const Neighbourhood& nb = hoods_[g];
      long double s = prefix[nb.end] - prefix[nb.begin];
      for (std::size_t pos : nb.extra) s += target[order_[pos]];
      out[g] = static_cast<double>(s / static_cast<long double>(nb.count()));
    }
    return out;
  }

  /// Smoothed value at every sample.
  std::vector<double> apply(std::span<const double> target) const { return expand(apply_knots(target)); }

  std::vector<double> expand(std::span<const double> knot_values) const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = knot_values[group_of_[i]];
    return out;
  }

  EmpiricalTransform transform_of(std::span<const double> knot_values) const {
    std::vector<Knot> knots(groups());
    for (std::size_t g = 0; g < groups(); ++g) knots[g] = {knot_x_[g], knot_values[g]};
    return EmpiricalTransform(std::move(knots));
  }

 private:
  struct Neighbourhood {
    std::size_t begin = 0, end = 0;   // contiguous sorted positions
    std::vector<std::size_t> extra;   // equal-distance picks outside [begin, end)
    std::size_t count() const { return end - begin + extra.size(); }
  };

  void build_knn(std::size_t k) {
    hoods_.resize(groups());
    for (std::size_t g = 0; g < groups(); ++g) {
      const std::size_t s = group_begin_[g], e = group_begin_[g + 1];
      Neighbourhood& nb = hoods_[g];
      if (e - s >= k) {
        nb.begin = s;
        nb.end = s + k;
        continue;
      }
      const double v = knot_x_[g];
      const auto left_dist = [&](std::size_t pos) { return v - sorted_x_[pos]; };
      const auto right_dist = [&](std::size_t pos) { return sorted_x_[pos] - v; };

      // Grow outward in distance order to find the k-th smallest distance.
      std::size_t lo = s, hi = e;
      double radius = 0.0;
      for (std::size_t count = e - s; count < k; ++count) {
        const double dl = lo > 0 ? left_dist(lo - 1) : std::numeric_limits<double>::infinity();
        const double dr = hi < n_ ? right_dist(hi) : std::numeric_limits<double>::infinity();
        if (dl <= dr) {
          --lo;
          radius = dl;
        } else {
          ++hi;
          radius = dr;
        }
      }
      // Strictly closer samples are contiguous; samples exactly at `radius`
      // form at most two blocks, one on each side.
      while (lo < s && left_dist(lo) == radius) ++lo;
      while (hi > e && right_dist(hi - 1) == radius) --hi;
      nb.begin = lo;
      nb.end = hi;
      std::size_t need = k - (hi - lo);
      if (need == 0) continue;

      std::size_t l0 = lo;
      while (l0 > 0 && left_dist(l0 - 1) == radius) --l0;
      std::size_t r1 = hi;
      while (r1 < n_ && right_dist(r1) == radius) ++r1;
      // Both blocks are already in original-index order; merge and take the lowest.
      std::size_t a = l0, b = hi;
      while (need > 0) {
        const bool take_left = a < lo && (b >= r1 || order_[a] < order_[b]);
        nb.extra.push_back(take_left ? a++ : b++);
        --need;
      }
    }
  }

  void build_bins(std::size_t n_bins) {
    hoods_.resize(groups());
    std::vector<std::size_t> bin_of(groups());
    for (std::size_t g = 0; g < groups(); ++g)
      bin_of[g] = groups() <= n_bins ? g : group_begin_[g] * n_bins / n_;
    for (std::size_t g = 0; g < groups();) {
      std::size_t h = g;
      while (h < groups() && bin_of[h] == bin_of[g]) ++h;
      for (std::size_t m = g; m < h; ++m) {
        hoods_[m].begin = group_begin_[g];
        hoods_[m].end = group_begin_[h];
      }
      g = h;
    }
  }

  std::size_t n_;
  std::vector<std::size_t> order_;       // sorted position -> sample index
  std::vector<double> sorted_x_;
  std::vector<std::size_t> group_begin_; // sorted position where each group starts, plus n
  std::vector<double> knot_x_;
  std::vector<std::size_t> group_of_;
  std::vector<Neighbourhood> hoods_;
};

/// Estimated conditional mean of `target` given `x`, one knot per distinct x.
inline EmpiricalTransform smooth(std::span<const double> x, std::span<const double> target, const SmootherSpec& spec) {
  if (x.size() != target.size()) throw Error(ErrorKind::LengthMismatch, "x and target differ in length");
  const SmootherPlan plan(x, spec);
  return plan.transform_of(plan.apply_knots(target));
}

}  // namespace mcorr
