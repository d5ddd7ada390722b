#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "mcorr/data.hpp"

namespace mcorr {

/// Weighted least-squares projection of `target` onto non-decreasing
/// sequences (pool adjacent violators). `x` must be strictly increasing;
/// tied inputs are expected to be merged beforehand with summed weights.
inline std::vector<double> pava(std::span<const double> x, std::span<const double> target,
                                std::span<const double> weights) {
  if (x.size() != target.size() || x.size() != weights.size())
    throw Error(ErrorKind::LengthMismatch, "pava inputs differ in length");
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0)) throw Error(ErrorKind::NonPositiveWeight, "pava weights must be positive");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i - 1] < x[i])) throw Error(ErrorKind::NotSorted, "pava inputs must be strictly increasing");

  struct Block {
    long double weight;
    long double weighted_sum;
    std::size_t length;
    double value() const { return static_cast<double>(weighted_sum / weight); }
  };
  std::vector<Block> stack;
  stack.reserve(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    stack.push_back({weights[i], static_cast<long double>(weights[i]) * target[i], 1});
    while (stack.size() > 1 && stack[stack.size() - 2].value() > stack.back().value()) {
      const Block top = stack.back();
      stack.pop_back();
      stack.back().weight += top.weight;
      stack.back().weighted_sum += top.weighted_sum;
      stack.back().length += top.length;
    }
  }
  std::vector<double> out;
  out.reserve(target.size());
  for (const Block& b : stack) out.insert(out.end(), b.length, b.value());
  return out;
}

/// Monotone projection onto non-decreasing functions of a fixed sample `y`.
/// Samples sharing a y value are pooled with their counts as weights.
class MonotonePlan {
 public:
  explicit MonotonePlan(std::span<const double> y) : n_(y.size()) {
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    group_of_.resize(n_);
    for (std::size_t i = 0; i < n_;) {
      std::size_t j = i;
      while (j < n_ && y[order[j]] == y[order[i]]) group_of_[order[j++]] = knot_y_.size();
      knot_y_.push_back(y[order[i]]);
      counts_.push_back(static_cast<double>(j - i));
      i = j;
    }
  }

  std::size_t n() const { return n_; }
  std::size_t groups() const { return knot_y_.size(); }
  std::span<const double> knot_inputs() const { return knot_y_; }
  std::span<const std::size_t> group_of() const { return group_of_; }

  std::vector<double> project_knots(std::span<const double> target) const {
    if (target.size() != n_) throw Error(ErrorKind::LengthMismatch, "y and target differ in length");
    std::vector<long double> sums(groups(), 0.0L);
    for (std::size_t i = 0; i < n_; ++i) sums[group_of_[i]] += target[i];
    std::vector<double> means(groups());
    for (std::size_t g = 0; g < groups(); ++g) means[g] = static_cast<double>(sums[g] / counts_[g]);
    return pava(knot_y_, means, counts_);
  }

  std::vector<double> expand(std::span<const double> knot_values) const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = knot_values[group_of_[i]];
    return out;
  }

  std::vector<double> project(std::span<const double> target) const { return expand(project_knots(target)); }

  EmpiricalTransform transform_of(std::span<const double> knot_values) const {
    std::vector<Knot> knots(groups());
    for (std::size_t g = 0; g < groups(); ++g) knots[g] = {knot_y_[g], knot_values[g]};
    return EmpiricalTransform(std::move(knots));
  }

 private:
  std::size_t n_;
  std::vector<double> knot_y_;
  std::vector<double> counts_;
  std::vector<std::size_t> group_of_;
};

/// Euclidean projection of `target` onto non-decreasing functions of `y`.
inline EmpiricalTransform project_monotone(std::span<const double> y, std::span<const double> target) {
  if (y.size() != target.size()) throw Error(ErrorKind::LengthMismatch, "y and target differ in length");
  const MonotonePlan plan(y);
  return plan.transform_of(plan.project_knots(target));
}

/// Checks kappa * dx <= df <= dx / kappa on every consecutive knot pair.
inline bool is_kappa_increasing(const EmpiricalTransform& t, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw Error(ErrorKind::InvalidKappa, "kappa must lie in (0, 1]");
  if (t.size() < 2) throw Error(ErrorKind::TooFewKnots, "need at least two knots");
  const auto knots = t.knots();
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double dx = knots[i].input - knots[i - 1].input;
    const double df = knots[i].output - knots[i - 1].output;
    // rounding slack relative to the magnitudes involved
    const double slack = 1e-12 * (std::abs(knots[i].output) + std::abs(knots[i - 1].output) + dx / kappa);
    if (df < kappa * dx - slack || df > dx / kappa + slack) return false;
  }
  return true;
}

/// Swaps input and output at every knot. Outputs must be strictly increasing.
inline EmpiricalTransform invert_transform(const EmpiricalTransform& t) {
  const auto knots = t.knots();
  std::vector<Knot> inv;
  inv.reserve(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i > 0 && !(knots[i - 1].output < knots[i].output))
      throw Error(ErrorKind::FlatSegment, "outputs must be strictly increasing to invert");
    inv.push_back({knots[i].output, knots[i].input});
  }
  return EmpiricalTransform(std::move(inv), t.extrapolation());
}

namespace detail {

/// regularize_kappa for any positive slope parameter.
inline EmpiricalTransform regularize_slopes(const EmpiricalTransform& t, double kappa) {
  if (!(kappa > 0.0 && std::isfinite(kappa))) throw Error(ErrorKind::InvalidKappa, "slope parameter must be positive");
  if (t.size() < 2) throw Error(ErrorKind::TooFewKnots, "need at least two knots");
  if (!t.non_decreasing()) throw Error(ErrorKind::NotMonotone, "regularization needs a non-decreasing transform");
  const auto knots = t.knots();

  // g'^-1 as knots (z, w): w an output level, z = midpoint(preimage(w)) + kappa * w.
  std::vector<Knot> inner;
  for (std::size_t i = 0; i < knots.size();) {
    std::size_t j = i;
    while (j + 1 < knots.size() && knots[j + 1].output == knots[i].output) ++j;
    const double level = knots[i].output;
    const double mid = 0.5 * (knots[i].input + knots[j].input);
    inner.push_back({mid + kappa * level, level});
    i = j + 1;
  }
  if (inner.size() < 2) throw Error(ErrorKind::ConstantInput, "cannot regularize a constant transform");
  const EmpiricalTransform g_prime_inv(std::move(inner), Extrapolation::linear);

  std::vector<double> grid;
  grid.reserve(knots.size() + g_prime_inv.size());
  for (const Knot& k : knots) grid.push_back(k.input);
  for (const Knot& k : g_prime_inv.knots()) grid.push_back(k.input);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<Knot> out;
  out.reserve(grid.size());
  for (double v : grid) out.push_back({v, g_prime_inv(v) + kappa * v});
  return EmpiricalTransform(std::move(out), Extrapolation::linear);
}

}  // namespace detail

/// Slope regularization of a non-decreasing transform:
///   g'(v)    = g^-1(v) + kappa * v
///   g_new(v) = g'^-1(v) + kappa * v
/// The generalized inverse sends a flat output level to the midpoint of its
/// preimage interval. Every segment of the result has slope in
/// (kappa, 1/kappa + kappa). The result extrapolates linearly and carries
/// knots at the original inputs as well as at the breakpoints of g'^-1.
inline EmpiricalTransform regularize_kappa(const EmpiricalTransform& t, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorKind::InvalidKappa, "kappa must lie in (0, 1)");
  return detail::regularize_slopes(t, kappa);
}

}  // namespace mcorr
