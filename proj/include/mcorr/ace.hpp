#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mcorr/data.hpp"
#include "mcorr/monotone.hpp"
#include "mcorr/smoothing.hpp"

namespace mcorr {

/// Fraction of the variance of g left unexplained by f_sum:
/// mean((g - f_sum)^2) / mean(g^2).
inline double e2(std::span<const double> g_values, std::span<const double> f_sum) {
  if (g_values.size() != f_sum.size()) throw Error(ErrorKind::LengthMismatch, "g and f_sum differ in length");
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < g_values.size(); ++i) {
    const long double r = static_cast<long double>(g_values[i]) - f_sum[i];
    num += r * r;
    den += static_cast<long double>(g_values[i]) * g_values[i];
  }
  if (den <= 0.0L) throw Error(ErrorKind::ZeroDenominator, "g is identically zero");
  return static_cast<double>(num / den);
}

/// Current iterate of an alternating fit.
struct AceState {
  std::vector<double> g_values;               // standardized g(Y) at the samples
  std::vector<std::vector<double>> f_values;  // f_k(X_k) at the samples, one vector per predictor
  std::vector<double> e2_history;
  int iteration = 0;

  std::vector<double> f_sum() const {
    std::vector<double> s(g_values.size(), 0.0);
    for (const auto& f : f_values)
      for (std::size_t i = 0; i < s.size(); ++i) s[i] += f[i];
    return s;
  }
};

// ---------------------------------------------------------------------------
// Update policies. A response step maps the current Σ f_k to a new g at the
// knots of y; a predictor step maps a partial residual to a new f_k at the
// knots of x_k.

/// Classical ACE response step: g ∝ E[Σ f | Y].
class ConditionalMeanResponse {
 public:
  ConditionalMeanResponse(std::span<const double> y, const SmootherSpec& spec) : plan_(y, spec) {}
  std::vector<double> update(std::span<const double> f_sum) const { return plan_.apply_knots(f_sum); }
  std::vector<double> expand(std::span<const double> knot_values) const { return plan_.expand(knot_values); }
  EmpiricalTransform transform_of(std::span<const double> v) const { return plan_.transform_of(v); }

 private:
  SmootherPlan plan_;
};

/// Semi-monotone response step: g ∝ projection of Σ f onto non-decreasing functions of Y.
class MonotoneResponse {
 public:
  MonotoneResponse(std::span<const double> y, const SmootherSpec&) : plan_(y) {}
  std::vector<double> update(std::span<const double> f_sum) const { return plan_.project_knots(f_sum); }
  std::vector<double> expand(std::span<const double> knot_values) const { return plan_.expand(knot_values); }
  EmpiricalTransform transform_of(std::span<const double> v) const { return plan_.transform_of(v); }

 private:
  MonotonePlan plan_;
};

/// Unconstrained predictor step: f_k = E[residual | X_k].
class FreePredictor {
 public:
  FreePredictor(std::span<const double> x, const SmootherSpec& spec) : plan_(x, spec) {}
  std::vector<double> update(std::span<const double> residual) const { return plan_.apply_knots(residual); }
  std::vector<double> expand(std::span<const double> knot_values) const { return plan_.expand(knot_values); }
  EmpiricalTransform transform_of(std::span<const double> v) const { return plan_.transform_of(v); }
  std::size_t groups() const { return plan_.groups(); }

 private:
  SmootherPlan plan_;
};

/// Monotone predictor step: E[residual | X_k] projected onto non-decreasing
/// and onto non-increasing functions of X_k; the closer fit wins.
class MonotonePredictor {
 public:
  MonotonePredictor(std::span<const double> x, const SmootherSpec& spec) : plan_(x, spec), mono_(x) {}

  std::vector<double> update(std::span<const double> residual) const {
    const std::vector<double> smoothed = plan_.apply(residual);
    std::vector<double> up = mono_.project_knots(smoothed);
    std::vector<double> neg(smoothed.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -smoothed[i];
    std::vector<double> down = mono_.project_knots(neg);
    for (double& v : down) v = -v;
    return sse(residual, down) < sse(residual, up) ? down : up;
  }
  std::vector<double> expand(std::span<const double> knot_values) const { return mono_.expand(knot_values); }
  EmpiricalTransform transform_of(std::span<const double> v) const { return mono_.transform_of(v); }
  std::size_t groups() const { return mono_.groups(); }

 private:
  double sse(std::span<const double> residual, std::span<const double> knot_values) const {
    long double s = 0.0L;
    const auto group = mono_.group_of();
    for (std::size_t i = 0; i < residual.size(); ++i) {
      const long double d = static_cast<long double>(residual[i]) - knot_values[group[i]];
      s += d * d;
    }
    return static_cast<double>(s);
  }

  SmootherPlan plan_;
  MonotonePlan mono_;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> centered(std::vector<double> v) {
  const double m = mean(v);
  for (double& x : v) x -= m;
  return v;
}

inline bool improved_enough(double before, double after, double tol) {
  return before > 0.0 && (before - after) >= tol * before;
}

/// Alternating optimisation shared by every ACE variant. Starting from
/// g = standardized y and f_k = 0, each outer iteration runs Gauss-Seidel
/// sweeps over the predictors (in column order) while e^2 keeps decreasing,
/// then replaces g by the standardized response step. An iterate that does
/// not lower e^2 is discarded and the loop ends, so the recorded history is
/// non-increasing.
template <class Response, class Predictor>
MeasureResult run_alternating(const SampleTable& table, const AceConfig& cfg, MeasureKind kind) {
  cfg.validate();
  const std::size_t n = table.n(), p = table.p();
  const SmootherSpec spec = cfg.smoother.value_or(default_smoother(n));

  const Response response(table.y(), spec);
  std::vector<Predictor> predictors;
  predictors.reserve(p);
  for (std::size_t k = 0; k < p; ++k) predictors.emplace_back(table.x(k), spec);

  AceState state;
  state.g_values = standardize(table.y());
  state.f_values.assign(p, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> f_knots(p);
  for (std::size_t k = 0; k < p; ++k) f_knots[k].assign(predictors[k].groups(), 0.0);
  std::vector<double> g_knots;

  std::vector<double> f_sum(n, 0.0);
  double current = e2(state.g_values, f_sum);
  state.e2_history.push_back(current);

  MeasureResult result;
  result.kind = kind;
  result.converged = false;

  for (int outer = 0; outer < cfg.max_iters; ++outer) {
    // Inner loop: sweep f_1..f_p against the partial residuals.
    double inner = e2(state.g_values, f_sum);
    for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
      auto f_next = state.f_values;
      auto knots_next = f_knots;
      std::vector<double> sum_next = f_sum;
      for (std::size_t k = 0; k < p; ++k) {
        std::vector<double> residual(n);
        for (std::size_t i = 0; i < n; ++i) residual[i] = state.g_values[i] - (sum_next[i] - f_next[k][i]);
        std::vector<double> kv = predictors[k].update(residual);
        std::vector<double> fk = predictors[k].expand(kv);
        const double m = mean(fk);
        for (double& v : kv) v -= m;
        for (double& v : fk) v -= m;
        for (std::size_t i = 0; i < n; ++i) sum_next[i] += fk[i] - f_next[k][i];
        f_next[k] = std::move(fk);
        knots_next[k] = std::move(kv);
      }
      const double e = e2(state.g_values, sum_next);
      if (!(e < inner)) break;
      state.f_values = std::move(f_next);
      f_knots = std::move(knots_next);
      f_sum = std::move(sum_next);
      const bool keep_going = improved_enough(inner, e, cfg.tol);
      inner = e;
      if (!keep_going) break;
    }

    // Response step.
    std::vector<double> g_raw_knots = response.update(f_sum);
    const std::vector<double> g_raw = response.expand(g_raw_knots);
    if (is_constant(g_raw)) {
      result.value = 0.0;
      result.e2 = 1.0;
      result.converged = true;
      result.diagnostics.push_back("degenerate-g");
      result.e2_history = state.e2_history;
      result.iterations = state.iteration;
      return result;
    }
    const double gm = mean(g_raw);
    std::vector<double> g_c = g_raw;
    for (double& v : g_c) v -= gm;
    const double scale = std::sqrt(mean_square(g_c));
    std::vector<double> g_next(n);
    for (std::size_t i = 0; i < n; ++i) g_next[i] = g_c[i] / scale;
    for (double& v : g_raw_knots) v = (v - gm) / scale;

    const double e = e2(g_next, f_sum);
    if (!(e <= current) || (state.iteration > 0 && !(e < current))) {
      result.converged = true;  // e^2 stopped decreasing
      break;
    }
    const bool keep_going = improved_enough(current, e, cfg.tol);
    state.g_values = std::move(g_next);
    g_knots = std::move(g_raw_knots);
    state.e2_history.push_back(e);
    ++state.iteration;
    current = e;
    if (!keep_going) {
      result.converged = true;
      break;
    }
  }

  if (g_knots.empty()) {
    // No iterate was accepted: keep the standardized identity.
    g_knots = response.update(state.g_values);
  }
  // The f_k may have been refit against the final g after its e^2 was recorded.
  const double last = e2(state.g_values, f_sum);
  if (last < current) {
    current = last;
    state.e2_history.push_back(last);
  }
  result.g = response.transform_of(g_knots);
  for (std::size_t k = 0; k < p; ++k) result.f.push_back(predictors[k].transform_of(f_knots[k]));
  result.e2_history = state.e2_history;
  result.e2 = current;
  result.value = std::sqrt(std::max(0.0, 1.0 - current));
  result.iterations = state.iteration;
  if (!result.converged) result.diagnostics.push_back("max-iters-reached");
  return result;
}

inline void require_single_predictor(const SampleTable& t, std::string_view what) {
  if (t.p() != 1)
    throw Error(ErrorKind::UnsupportedArity,
                std::string(what) + " needs exactly one predictor, got " + std::to_string(t.p()));
}

}  // namespace detail

/// Classical ACE: unconstrained g and f_1..f_p (maximal correlation).
inline MeasureResult ace_classic(const SampleTable& table, const AceConfig& cfg) {
  return detail::run_alternating<ConditionalMeanResponse, FreePredictor>(table, cfg, MeasureKind::maxcorr);
}

/// Multi-predictor semi-0-monotone ACE: g non-decreasing, f_k unconstrained.
inline MeasureResult ace_semi_monotone_multi(const SampleTable& table, const AceConfig& cfg) {
  return detail::run_alternating<MonotoneResponse, FreePredictor>(table, cfg, MeasureKind::semi_monotone_0);
}

/// Single-predictor semi-0-monotone ACE: alternate f = E[g | X] and
/// g = standardized monotone projection of f.
inline MeasureResult ace_semi_monotone_single(const SampleTable& table, const AceConfig& cfg) {
  detail::require_single_predictor(table, "ace_semi_monotone_single");
  return detail::run_alternating<MonotoneResponse, FreePredictor>(table, cfg, MeasureKind::semi_monotone_0);
}

inline MeasureResult ace_semi_monotone(const SampleTable& table, const AceConfig& cfg) {
  return table.p() == 1 ? ace_semi_monotone_single(table, cfg) : ace_semi_monotone_multi(table, cfg);
}

/// Monotone g and monotone f (either orientation).
inline MeasureResult ace_monotone_monotone(const SampleTable& table, const AceConfig& cfg) {
  detail::require_single_predictor(table, "ace_monotone_monotone");
  return detail::run_alternating<MonotoneResponse, MonotonePredictor>(table, cfg, MeasureKind::monotone_monotone);
}

namespace detail {

/// Regularizes g as a function of the standardized response u = (y - mean) / sd,
/// where g and u share the unit-RMS scale, then maps the knots back to y.
/// regularize_kappa(., k) yields slopes in (k, 1/k + k), whose ratio can
/// exceed 1/kappa^2. Running it with k = kappa / sqrt(1 - kappa^2) and
/// scaling the outputs by sqrt(1 - kappa^2) lands every slope in
/// [kappa, 1/kappa]. Positive rescaling leaves every correlation unchanged.
inline EmpiricalTransform regularize_in_standard_units(const EmpiricalTransform& g, std::span<const double> y,
                                                       double kappa) {
  const double my = mean(y), sy = std::sqrt(variance(y));
  std::vector<Knot> u_knots;
  u_knots.reserve(g.size());
  for (const Knot& k : g.knots()) u_knots.push_back({(k.input - my) / sy, k.output});
  const double shrink = std::sqrt(1.0 - kappa * kappa);
  const EmpiricalTransform reg_u = regularize_slopes(EmpiricalTransform(std::move(u_knots)), kappa / shrink);

  std::vector<double> inputs, outputs;
  inputs.reserve(reg_u.size());
  outputs.reserve(reg_u.size());
  for (const Knot& k : reg_u.knots()) {
    inputs.push_back(my + sy * k.input);
    outputs.push_back(sy * shrink * k.output);
  }
  return EmpiricalTransform::from_pairs(inputs, outputs, Extrapolation::linear);
}

}  // namespace detail

/// Semi-monotone ACE followed by slope regularization of g, one refitting
/// sweep of the f_k against the regularized g, and a recomputed e^2.
/// The returned g is kappa-increasing in the units of y. e2_history holds the
/// descent of the monotone fit; `e2` and `value` describe the regularized pair.
inline MeasureResult ace_regularized(const SampleTable& table, const AceConfig& cfg) {
  if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0)) throw Error(ErrorKind::InvalidKappa, "regularized ACE needs 0 < kappa < 1");
  MeasureResult r = ace_semi_monotone(table, cfg);
  r.kind = MeasureKind::semi_monotone_kappa;
  if (r.has_diagnostic("degenerate-g")) return r;

  const std::size_t n = table.n(), p = table.p();
  const EmpiricalTransform g_reg = detail::regularize_in_standard_units(*r.g, table.y(), cfg.kappa);
  std::vector<double> g_raw(n);
  for (std::size_t i = 0; i < n; ++i) g_raw[i] = g_reg(table.y()[i]);
  const std::vector<double> g = standardize(g_raw);

  const SmootherSpec spec = cfg.smoother.value_or(default_smoother(n));
  std::vector<std::vector<double>> f(p);
  for (std::size_t k = 0; k < p; ++k) {
    f[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) f[k][i] = r.f[k](table.x(k)[i]);
  }
  std::vector<double> f_sum(n, 0.0);
  for (const auto& fk : f)
    for (std::size_t i = 0; i < n; ++i) f_sum[i] += fk[i];

  for (std::size_t k = 0; k < p; ++k) {
    const FreePredictor step(table.x(k), spec);
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = g[i] - (f_sum[i] - f[k][i]);
    std::vector<double> kv = step.update(residual);
    std::vector<double> fk = step.expand(kv);
    const double m = mean(fk);
    for (double& v : kv) v -= m;
    for (double& v : fk) v -= m;
    for (std::size_t i = 0; i < n; ++i) f_sum[i] += fk[i] - f[k][i];
    f[k] = std::move(fk);
    r.f[k] = step.transform_of(kv);
  }

  r.g = g_reg;
  r.e2 = e2(g, f_sum);
  r.value = std::sqrt(std::max(0.0, 1.0 - r.e2));
  if (!is_kappa_increasing(g_reg, cfg.kappa)) r.diagnostics.push_back("slope-ratio-above-kappa-band");
  return r;
}

}  // namespace mcorr
