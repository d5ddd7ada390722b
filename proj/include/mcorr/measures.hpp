#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "mcorr/ace.hpp"
#include "mcorr/data.hpp"
#include "mcorr/smoothing.hpp"

namespace mcorr {

/// Sample Pearson correlation.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "x and y differ in length");
  if (x.size() < 3) throw Error(ErrorKind::TooFewSamples, "pearson needs at least 3 samples");
  if (is_constant(x) || is_constant(y)) throw Error(ErrorKind::ConstantInput, "pearson of a constant vector");
  const double mx = mean(x), my = mean(y);
  long double sxy = 0.0L, sxx = 0.0L, syy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double r = static_cast<double>(sxy / std::sqrt(sxx * syy));
  return std::clamp(r, -1.0, 1.0);
}

/// Correlation ratio of the response on the predictor:
/// sd(E[Y | X] at the samples) / sd(Y), clamped to [0, 1].
inline MeasureResult corr_ratio(const SampleTable& table, const AceConfig& cfg) {
  detail::require_single_predictor(table, "corr_ratio");
  cfg.validate();
  const SmootherSpec spec = cfg.smoother.value_or(default_smoother(table.n()));
  const SmootherPlan plan(table.x(0), spec);
  const std::vector<double> knots = plan.apply_knots(table.y());
  const std::vector<double> fitted = plan.expand(knots);

  MeasureResult r;
  r.kind = MeasureKind::corr_ratio;
  r.value = std::clamp(std::sqrt(variance(fitted) / variance(table.y())), 0.0, 1.0);
  r.e2 = 1.0 - r.value * r.value;
  r.iterations = 1;
  r.f.push_back(plan.transform_of(knots));
  return r;
}

/// Routes to the estimator for `kind`. Single-predictor measures reject p > 1.
inline MeasureResult estimate(const SampleTable& table, MeasureKind kind, const AceConfig& cfg) {
  cfg.validate();
  switch (kind) {
    case MeasureKind::pearson: {
      detail::require_single_predictor(table, "pearson");
      MeasureResult r;
      r.kind = kind;
      r.value = pearson(table.x(0), table.y());
      r.e2 = 1.0 - r.value * r.value;
      return r;
    }
    case MeasureKind::corr_ratio: return corr_ratio(table, cfg);
    case MeasureKind::maxcorr: return ace_classic(table, cfg);
    case MeasureKind::monotone_monotone: return ace_monotone_monotone(table, cfg);
    case MeasureKind::semi_monotone_0: return ace_semi_monotone(table, cfg);
    case MeasureKind::semi_monotone_kappa: return ace_regularized(table, cfg);
  }
  throw Error(ErrorKind::InvalidConfig, "unknown measure kind");
}

/// Symmetry-breaking response transform: y for y >= a, kappa * y below a.
/// Taken exactly as written, so it jumps by (1 - kappa) * a at y = a when a != 0.
struct GaKappa {
  double a;
  double kappa;

  double operator()(double y) const { return y >= a ? y : kappa * y; }

  /// Knots at every grid value; exact at the knots.
  EmpiricalTransform on_grid(std::span<const double> grid) const {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = (*this)(grid[i]);
    return EmpiricalTransform::from_pairs(grid, out, Extrapolation::linear);
  }

  std::vector<double> apply(std::span<const double> ys) const {
    std::vector<double> out(ys.size());
    std::transform(ys.begin(), ys.end(), out.begin(), *this);
    return out;
  }
};

inline GaKappa g_a_kappa(double a, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorKind::InvalidKappa, "kappa must lie in (0, 1)");
  return GaKappa{a, kappa};
}

// ---------------------------------------------------------------------------
// Shape diagnostics for fitted transforms.

/// Largest drop f(u_i) - f(u_j) over knot pairs u_i < u_j; zero when the
/// transform is non-decreasing.
inline double max_monotone_violation(const EmpiricalTransform& t) {
  double running_max = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const Knot& k : t.knots()) {
    running_max = std::max(running_max, k.output);
    worst = std::max(worst, running_max - k.output);
  }
  return worst;
}

/// Violation measured in units of the output standard deviation over the knots.
inline double relative_monotone_violation(const EmpiricalTransform& t) {
  std::vector<double> outs;
  for (const Knot& k : t.knots()) outs.push_back(k.output);
  const double sd = std::sqrt(variance(outs));
  return sd > 0.0 ? max_monotone_violation(t) / sd : 0.0;
}

/// Widest input interval on which the outputs stay within `tolerance`
/// output standard deviations of each other (0: exactly constant), as a
/// fraction of the knot input range.
inline double largest_flat_fraction(const EmpiricalTransform& t, double tolerance = 0.0) {
  const auto knots = t.knots();
  if (knots.size() < 2) return 1.0;
  std::vector<double> outs;
  for (const Knot& k : knots) outs.push_back(k.output);
  const double band = tolerance * std::sqrt(variance(outs));
  const double range = knots.back().input - knots.front().input;
  // sliding window with monotone deques of the running max and min
  std::deque<std::size_t> hi, lo;
  double widest = 0.0;
  for (std::size_t i = 0, j = 0; j < knots.size(); ++j) {
    while (!hi.empty() && outs[hi.back()] <= outs[j]) hi.pop_back();
    while (!lo.empty() && outs[lo.back()] >= outs[j]) lo.pop_back();
    hi.push_back(j);
    lo.push_back(j);
    while (outs[hi.front()] - outs[lo.front()] > band) {
      ++i;
      if (hi.front() < i) hi.pop_front();
      if (lo.front() < i) lo.pop_front();
    }
    widest = std::max(widest, knots[j].input - knots[i].input);
  }
  return widest / range;
}

inline double min_slope(const EmpiricalTransform& t) {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s = std::min(s, t.slope(i));
  return s;
}

}  // namespace mcorr
