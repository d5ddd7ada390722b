#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcorr/error.hpp"

namespace mcorr {

// ---------------------------------------------------------------------------
// Sample moments. Every variance in the library divides by N.

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

inline double variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  long double s = 0.0L;
  for (double x : v) s += (x - m) * (x - m);
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

inline double mean_square(std::span<const double> v) {
  if (v.empty()) return 0.0;
  long double s = 0.0L;
  for (double x : v) s += static_cast<long double>(x) * x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

/// True when the spread of `v` is indistinguishable from rounding noise.
inline bool is_constant(std::span<const double> v) {
  if (v.size() < 2) return true;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return true;
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  return std::sqrt(variance(v)) <= 1e-13 * scale;
}

/// Centers `values` and divides by their root-mean-square, so the result has
/// zero sample mean and unit sample second moment.
inline std::vector<double> standardize(std::span<const double> values) {
  if (is_constant(values)) throw Error(ErrorKind::ConstantInput, "cannot standardize a constant vector");
  const double m = mean(values);
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v -= m;
  const double rms = std::sqrt(mean_square(out));
  for (double& v : out) v /= rms;
  return out;
}

// ---------------------------------------------------------------------------

enum class Extrapolation { constant, linear };

struct Knot {
  double input;
  double output;
  friend bool operator==(const Knot&, const Knot&) = default;
};

/// A real function learned on sample values: piecewise-linear through knots
/// with strictly increasing inputs, extended beyond the knot range by
/// holding the boundary output or by continuing the boundary slope.
class EmpiricalTransform {
 public:
  EmpiricalTransform() = default;

  /// Knot inputs must already be strictly increasing.
  explicit EmpiricalTransform(std::vector<Knot> knots, Extrapolation rule = Extrapolation::constant)
      : knots_(std::move(knots)), rule_(rule) {
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i - 1].input < knots_[i].input))
        throw Error(ErrorKind::NotSorted, "knot inputs must be strictly increasing");
    }
  }

  /// Builds a transform from raw (input, output) samples. Equal inputs are
  /// merged into one knot whose output is the average of their outputs.
  static EmpiricalTransform from_pairs(std::span<const double> inputs, std::span<const double> outputs,
                                       Extrapolation rule = Extrapolation::constant) {
    if (inputs.size() != outputs.size()) throw Error(ErrorKind::LengthMismatch, "inputs and outputs differ in length");
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return inputs[a] < inputs[b]; });
    std::vector<Knot> knots;
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      long double sum = 0.0L;
      while (j < order.size() && inputs[order[j]] == inputs[order[i]]) sum += outputs[order[j++]];
      knots.push_back({inputs[order[i]], static_cast<double>(sum / static_cast<long double>(j - i))});
      i = j;
    }
    return EmpiricalTransform(std::move(knots), rule);
  }

  std::span<const Knot> knots() const { return knots_; }
  std::size_t size() const { return knots_.size(); }
  Extrapolation extrapolation() const { return rule_; }

  EmpiricalTransform with_extrapolation(Extrapolation rule) const {
    EmpiricalTransform t = *this;
    t.rule_ = rule;
    return t;
  }

  double operator()(double v) const {
    if (knots_.size() < 2) throw Error(ErrorKind::TooFewKnots, "evaluation needs at least two knots");
    const auto& front = knots_.front();
    const auto& back = knots_.back();
    if (v <= front.input) {
      if (v == front.input || rule_ == Extrapolation::constant) return front.output;
      return front.output + (v - front.input) * slope(0);
    }
    if (v >= back.input) {
      if (v == back.input || rule_ == Extrapolation::constant) return back.output;
      return back.output + (v - back.input) * slope(knots_.size() - 2);
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), v, [](double a, const Knot& k) { return a < k.input; });
    const Knot& hi = *it;
    const Knot& lo = *(it - 1);
    if (v == lo.input) return lo.output;
    const double w = (v - lo.input) / (hi.input - lo.input);
    return lo.output + w * (hi.output - lo.output);
  }

  /// Slope of the segment between knot i and knot i + 1.
  double slope(std::size_t i) const {
    return (knots_[i + 1].output - knots_[i].output) / (knots_[i + 1].input - knots_[i].input);
  }

  bool non_decreasing() const {
    for (std::size_t i = 1; i < knots_.size(); ++i)
      if (knots_[i].output < knots_[i - 1].output) return false;
    return true;
  }

  friend bool operator==(const EmpiricalTransform&, const EmpiricalTransform&) = default;

 private:
  std::vector<Knot> knots_;
  Extrapolation rule_ = Extrapolation::constant;
};

inline double eval_transform(const EmpiricalTransform& t, double v) { return t(v); }

// ---------------------------------------------------------------------------

/// One response column and p >= 1 predictor columns of finite, non-constant
/// samples. Immutable after construction.
class SampleTable {
 public:
  SampleTable(std::vector<double> y, std::vector<std::vector<double>> x, std::string response_name = "y",
              std::vector<std::string> predictor_names = {})
      : y_(std::move(y)), x_(std::move(x)), response_name_(std::move(response_name)),
        predictor_names_(std::move(predictor_names)) {
    if (x_.empty()) throw Error(ErrorKind::MissingColumn, "at least one predictor column is required");
    if (predictor_names_.empty()) {
      for (std::size_t k = 0; k < x_.size(); ++k)
        predictor_names_.push_back(x_.size() == 1 ? "x" : "x" + std::to_string(k + 1));
    }
    if (predictor_names_.size() != x_.size())
      throw Error(ErrorKind::LengthMismatch, "one name per predictor column is required");
    if (y_.size() < 3) throw Error(ErrorKind::TooFewSamples, "need at least 3 rows, got " + std::to_string(y_.size()));
    check_column(y_, response_name_);
    for (std::size_t k = 0; k < x_.size(); ++k) {
      if (x_[k].size() != y_.size())
        throw Error(ErrorKind::LengthMismatch, "column '" + predictor_names_[k] + "' has a different length");
      check_column(x_[k], predictor_names_[k]);
    }
  }

  std::size_t n() const { return y_.size(); }
  std::size_t p() const { return x_.size(); }
  std::span<const double> y() const { return y_; }
  std::span<const double> x(std::size_t k) const { return x_.at(k); }
  const std::string& response_name() const { return response_name_; }
  const std::vector<std::string>& predictor_names() const { return predictor_names_; }

  /// Table with the same response and only predictor k.
  SampleTable select(std::size_t k) const { return SampleTable(y_, {x_.at(k)}, response_name_, {predictor_names_.at(k)}); }

  /// Table predicting predictor k from the response (roles exchanged).
  SampleTable swapped(std::size_t k = 0) const {
    return SampleTable(x_.at(k), {y_}, predictor_names_.at(k), {response_name_});
  }

  friend bool operator==(const SampleTable&, const SampleTable&) = default;

 private:
  static void check_column(const std::vector<double>& c, const std::string& name) {
    for (double v : c)
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "column '" + name + "' has a non-finite entry");
    if (variance(c) <= 0.0 || is_constant(c))
      throw Error(ErrorKind::ConstantColumn, "column '" + name + "' is constant");
  }

  std::vector<double> y_;
  std::vector<std::vector<double>> x_;
  std::string response_name_;
  std::vector<std::string> predictor_names_;
};

// ---------------------------------------------------------------------------

/// Conditional-mean estimator selection. `size` is the neighbour count for
/// knn and the bin count for bins.
struct SmootherSpec {
  enum class Kind { knn, bins };
  Kind kind = Kind::knn;
  std::size_t size = 5;

  static SmootherSpec knn(std::size_t k) { return {Kind::knn, k}; }
  static SmootherSpec bins(std::size_t n_bins) { return {Kind::bins, n_bins}; }
  friend bool operator==(const SmootherSpec&, const SmootherSpec&) = default;
};

inline std::string to_string(const SmootherSpec& s) {
  return (s.kind == SmootherSpec::Kind::knn ? "knn(k=" : "bins(n=") + std::to_string(s.size) + ")";
}

struct AceConfig {
  int max_iters = 200;
  double tol = 1e-6;  // relative e^2 improvement below which iteration stops
  std::optional<SmootherSpec> smoother;  // unset: default_smoother(N)
  double kappa = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iters < 1) throw Error(ErrorKind::InvalidConfig, "max_iters must be >= 1");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "tol must be > 0");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw Error(ErrorKind::InvalidKappa, "kappa must lie in [0, 1]");
    if (smoother && smoother->size == 0) throw Error(ErrorKind::InvalidConfig, "smoother size must be positive");
  }
};

enum class MeasureKind { pearson, corr_ratio, maxcorr, monotone_monotone, semi_monotone_0, semi_monotone_kappa };

constexpr std::string_view to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::pearson: return "pearson";
    case MeasureKind::corr_ratio: return "corr-ratio";
    case MeasureKind::maxcorr: return "maxcorr";
    case MeasureKind::monotone_monotone: return "mono-mono";
    case MeasureKind::semi_monotone_0: return "semi-mono";
    case MeasureKind::semi_monotone_kappa: return "regularized";
  }
  return "unknown";
}

inline std::optional<MeasureKind> parse_measure_kind(std::string_view name) {
  for (auto k : {MeasureKind::pearson, MeasureKind::corr_ratio, MeasureKind::maxcorr, MeasureKind::monotone_monotone,
                 MeasureKind::semi_monotone_0, MeasureKind::semi_monotone_kappa})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

struct MeasureResult {
  MeasureKind kind = MeasureKind::pearson;
  double value = 0.0;
  std::optional<EmpiricalTransform> g;  // response transform; absent for pearson and corr_ratio
  std::vector<EmpiricalTransform> f;    // one per predictor
  std::vector<double> e2_history;       // starts at 1 (f = 0); non-increasing
  double e2 = 1.0;                      // e^2 behind `value`
  int iterations = 0;
  bool converged = true;
  std::vector<std::string> diagnostics;

  bool has_diagnostic(std::string_view d) const {
    return std::find(diagnostics.begin(), diagnostics.end(), d) != diagnostics.end();
  }
  friend bool operator==(const MeasureResult&, const MeasureResult&) = default;
};

}  // namespace mcorr
