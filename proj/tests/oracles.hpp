#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's projection or smoothing code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "mcorr/data.hpp"
#include "mcorr/generators.hpp"

namespace oracle {

struct IsoFit {
  std::vector<double> fit;
  double sse = std::numeric_limits<double>::infinity();
};

/// Weighted least squares over non-decreasing sequences by enumerating every
/// split of 0..n-1 into contiguous blocks (2^(n-1) of them). Each block takes
/// its weighted mean; splits whose means decrease are infeasible.
inline IsoFit isotonic_brute(const std::vector<double>& t, const std::vector<double>& w) {
  const std::size_t n = t.size();
  IsoFit best;
  if (n == 0) return {{}, 0.0};
  const std::uint64_t splits = std::uint64_t{1} << (n - 1);
  std::vector<double> fit(n);
  for (std::uint64_t mask = 0; mask < splits; ++mask) {
    double prev = -std::numeric_limits<double>::infinity();
    bool feasible = true;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      const bool cut = (i + 1 == n) || ((mask >> i) & 1U);
      if (!cut) continue;
      double sw = 0.0, swt = 0.0;
      for (std::size_t j = start; j <= i; ++j) sw += w[j], swt += w[j] * t[j];
      const double m = swt / sw;
      if (m < prev - 1e-15) feasible = false;
      prev = m;
      for (std::size_t j = start; j <= i; ++j) fit[j] = m;
      start = i + 1;
    }
    if (!feasible) continue;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) sse += w[i] * (t[i] - fit[i]) * (t[i] - fit[i]);
    if (sse < best.sse) best = {fit, sse};
  }
  return best;
}

/// Isotonic regression via the max-min characterization
///   fit_i = max_{s <= i} min_{u >= i} mean_w(t[s..u]).
inline std::vector<double> isotonic_minmax(const std::vector<double>& t, const std::vector<double>& w) {
  const std::size_t n = t.size();
  std::vector<long double> cw(n + 1, 0.0L), cwt(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) cw[i + 1] = cw[i] + w[i], cwt[i + 1] = cwt[i] + w[i] * t[i];
  auto avg = [&](std::size_t s, std::size_t u) { return (cwt[u + 1] - cwt[s]) / (cw[u + 1] - cw[s]); };
  std::vector<double> fit(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double best = -std::numeric_limits<long double>::infinity();
    for (std::size_t s = 0; s <= i; ++s) {
      long double lo = std::numeric_limits<long double>::infinity();
      for (std::size_t u = i; u < n; ++u) lo = std::min(lo, avg(s, u));
      best = std::max(best, lo);
    }
    fit[i] = static_cast<double>(best);
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Finite joint distributions.

struct Discrete {
  std::vector<double> xs;              // increasing support of X
  std::vector<double> ys;              // increasing support of Y
  std::vector<std::vector<double>> p;  // p[i][j] = P(X = xs[i], Y = ys[j])

  std::vector<double> px() const {
    std::vector<double> m(xs.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < ys.size(); ++j) m[i] += p[i][j];
    return m;
  }
  std::vector<double> py() const {
    std::vector<double> m(ys.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < ys.size(); ++j) m[j] += p[i][j];
    return m;
  }
};

/// E[g(Y) | X = xs[i]] minus E[g(Y)], and sd(g(Y)). sd is 0 for constant g.
struct CondMean {
  std::vector<double> h;
  double sd_g;
};

inline CondMean cond_mean(const Discrete& d, const std::vector<double>& g) {
  const auto px = d.px(), py = d.py();
  double eg = 0.0, eg2 = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) eg += py[j] * g[j], eg2 += py[j] * g[j] * g[j];
  CondMean c{std::vector<double>(d.xs.size(), 0.0), std::sqrt(std::max(0.0, eg2 - eg * eg))};
  for (std::size_t i = 0; i < d.xs.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) c.h[i] += d.p[i][j] * g[j];
    c.h[i] = c.h[i] / px[i] - eg;
  }
  return c;
}

inline double weighted_norm(const std::vector<double>& v, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i] * v[i];
  return std::sqrt(s);
}

/// Correlation ratio of g(Y) on X; -1 for (near) constant g.
inline double theta(const Discrete& d, const std::vector<double>& g) {
  const CondMean c = cond_mean(d, g);
  if (c.sd_g < 1e-12) return -1.0;
  return weighted_norm(c.h, d.px()) / c.sd_g;
}

/// sup over monotone f (either direction) of corr(f(X), g(Y)); f is found
/// by brute-force isotonic regression of E[g | X].
inline double monotone_f_corr(const Discrete& d, const std::vector<double>& g) {
  const CondMean c = cond_mean(d, g);
  if (c.sd_g < 1e-12) return -1.0;
  const auto px = d.px();
  std::vector<double> neg(c.h.size());
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -c.h[i];
  const double up = weighted_norm(isotonic_brute(c.h, px).fit, px);
  const double down = weighted_norm(isotonic_brute(neg, px).fit, px);
  return std::max(up, down) / c.sd_g;
}

inline std::vector<double> grid21() {
  std::vector<double> g(21);
  for (int i = 0; i <= 20; ++i) g[i] = i / 20.0;
  return g;
}

/// Calls visit(values) for every assignment of grid values to m slots;
/// with `monotone`, only non-decreasing assignments.
inline void for_each_grid_function(std::size_t m, const std::vector<double>& grid, bool monotone,
                                   const std::function<void(const std::vector<double>&)>& visit) {
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> vals(m, grid[0]);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t slot, std::size_t lo) {
    if (slot == m) {
      visit(vals);
      return;
    }
    for (std::size_t k = monotone ? lo : 0; k < grid.size(); ++k) {
      idx[slot] = k;
      vals[slot] = grid[k];
      rec(slot + 1, k);
    }
  };
  rec(0, 0);
}

struct DiscreteOptima {
  double corr_ratio;    // theta(X -> Y)
  double rho_m_kappa;   // g kappa-increasing
  double rho_m0;        // g non-decreasing
  double rho_star;      // g arbitrary
  double rho_mm;        // g non-decreasing, f monotone
};

/// g is kappa-increasing (up to scale) on the support iff its consecutive
/// difference quotients are positive with max/min <= 1/kappa^2.
inline bool kappa_feasible(const std::vector<double>& ys, const std::vector<double>& g, double kappa) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t j = 1; j < g.size(); ++j) {
    const double s = (g[j] - g[j - 1]) / (ys[j] - ys[j - 1]);
    if (!(s > 0.0)) return false;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi <= lo / (kappa * kappa) * (1.0 + 1e-12);
}

/// Brute-force optima over transforms g taking values on the 21-point grid.
inline DiscreteOptima discrete_optima(const Discrete& d, double kappa) {
  DiscreteOptima o{theta(d, d.ys), -1.0, -1.0, -1.0, -1.0};
  const auto grid = grid21();
  for_each_grid_function(d.ys.size(), grid, false, [&](const std::vector<double>& g) {
    const double t = theta(d, g);
    o.rho_star = std::max(o.rho_star, t);
    if (!std::is_sorted(g.begin(), g.end())) return;
    o.rho_m0 = std::max(o.rho_m0, t);
    if (t < 0.0) return;
    o.rho_mm = std::max(o.rho_mm, monotone_f_corr(d, g));
    if (kappa_feasible(d.ys, g, kappa)) o.rho_m_kappa = std::max(o.rho_m_kappa, t);
  });
  return o;
}

/// Random law with supports of 2..4 points on each side. Y support points
/// are grid values so the identity transform is representable.
inline Discrete random_discrete(mcorr::Rng& rng) {
  Discrete d;
  const std::size_t nx = 2 + static_cast<std::size_t>(rng.uniform01() * 3);
  const std::size_t ny = 2 + static_cast<std::size_t>(rng.uniform01() * 3);
  const auto grid = grid21();
  std::vector<double> pool = grid;
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t k = static_cast<std::size_t>(rng.uniform01() * pool.size());
    d.ys.push_back(pool[k]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::sort(d.ys.begin(), d.ys.end());
  for (std::size_t i = 0; i < nx; ++i) d.xs.push_back(static_cast<double>(i));
  double total = 0.0;
  d.p.assign(nx, std::vector<double>(ny));
  for (auto& row : d.p)
    for (double& v : row) total += (v = 0.05 + rng.uniform01());
  for (auto& row : d.p)
    for (double& v : row) v /= total;
  return d;
}

/// Draws n iid pairs from d.
inline mcorr::SampleTable sample_discrete(const Discrete& d, std::size_t n, mcorr::Rng& rng) {
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& row : d.p)
    for (double v : row) cum.push_back(acc += v);
  std::vector<double> y(n), x(n);
  const std::size_t ny = d.ys.size();
  for (std::size_t r = 0; r < n; ++r) {
    const double u = rng.uniform01() * acc;
    const std::size_t cell = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()), cum.size() - 1);
    x[r] = d.xs[cell / ny];
    y[r] = d.ys[cell % ny];
  }
  return mcorr::SampleTable(std::move(y), {std::move(x)});
}

// ---------------------------------------------------------------------------
// Scenario oracles.

/// Unit circle discretized into `atoms` equally likely angles.
inline Discrete circle_law(std::size_t atoms) {
  std::vector<double> xv(atoms), yv(atoms);
  for (std::size_t k = 0; k < atoms; ++k) {
    const double a = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(atoms);
    // round so that mirrored angles produce identical values
    xv[k] = std::round(std::cos(a) * 1e12) / 1e12;
    yv[k] = std::round(std::sin(a) * 1e12) / 1e12;
  }
  Discrete d;
  d.xs = xv;
  d.ys = yv;
  std::sort(d.xs.begin(), d.xs.end());
  d.xs.erase(std::unique(d.xs.begin(), d.xs.end()), d.xs.end());
  std::sort(d.ys.begin(), d.ys.end());
  d.ys.erase(std::unique(d.ys.begin(), d.ys.end()), d.ys.end());
  d.p.assign(d.xs.size(), std::vector<double>(d.ys.size(), 0.0));
  for (std::size_t k = 0; k < atoms; ++k) {
    const auto i = std::lower_bound(d.xs.begin(), d.xs.end(), xv[k]) - d.xs.begin();
    const auto j = std::lower_bound(d.ys.begin(), d.ys.end(), yv[k]) - d.ys.begin();
    d.p[i][j] += 1.0 / static_cast<double>(atoms);
  }
  return d;
}

/// Best theta(X -> g(Y)) over non-decreasing g that are constant on each of
/// `cells` consecutive groups of the Y support and take values in
/// {0, 1/(levels-1), ..., 1}. A lower bound on the semi-monotone value.
inline double monotone_grid_theta(const Discrete& d, std::size_t cells, std::size_t levels) {
  const std::size_t m = d.ys.size();
  std::vector<double> lv(levels);
  for (std::size_t k = 0; k < levels; ++k) lv[k] = static_cast<double>(k) / static_cast<double>(levels - 1);
  double best = -1.0;
  std::vector<double> g(m);
  for_each_grid_function(cells, lv, true, [&](const std::vector<double>& c) {
    for (std::size_t j = 0; j < m; ++j) g[j] = c[j * cells / m];
    best = std::max(best, theta(d, g));
  });
  return best;
}

/// Semi-monotone value of the lsb pair with `bits` high bits. The dependence
/// runs only through the shared parity, so the best f is the parity of X and
/// the value is |P_M h| / |h| for the alternating conditional mean h of the
/// parity given Y.
inline double lsb_semi_monotone(int bits) {
  const std::size_t m = std::size_t{1} << (bits + 1);
  std::vector<double> h(m), w(m, 1.0 / static_cast<double>(m));
  for (std::size_t v = 0; v < m; ++v) h[v] = (v % 2 == 0) ? -0.5 : 0.5;
  return weighted_norm(isotonic_minmax(h, w), w) / weighted_norm(h, w);
}

/// Exact lsb joint law for small `bits` (Y, X in 0 .. 2^(bits+1)-1).
inline Discrete lsb_law(int bits) {
  const std::size_t m = std::size_t{1} << (bits + 1);
  Discrete d;
  for (std::size_t v = 0; v < m; ++v) d.xs.push_back(static_cast<double>(v)), d.ys.push_back(static_cast<double>(v));
  d.p.assign(m, std::vector<double>(m, 0.0));
  const double cell = 1.0 / static_cast<double>(m * m / 2);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a % 2 == b % 2) d.p[a][b] = cell;
  return d;
}

/// Uniform X on `points` symmetric grid values in [-1, 1], Y = X^2.
inline Discrete square_law(std::size_t points) {
  Discrete d;
  std::vector<double> xv(points), yv(points);
  for (std::size_t k = 0; k < points; ++k) {
    xv[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(points - 1);
    yv[k] = std::round(xv[k] * xv[k] * 1e12) / 1e12;
  }
  d.xs = xv;
  d.ys = yv;
  std::sort(d.ys.begin(), d.ys.end());
  d.ys.erase(std::unique(d.ys.begin(), d.ys.end()), d.ys.end());
  d.p.assign(points, std::vector<double>(d.ys.size(), 0.0));
  for (std::size_t k = 0; k < points; ++k) {
    const auto j = std::lower_bound(d.ys.begin(), d.ys.end(), yv[k]) - d.ys.begin();
    d.p[k][j] = 1.0 / static_cast<double>(points);
  }
  return d;
}

/// sup over non-decreasing g (values on a `levels` grid) and monotone f of
/// corr(f(X), g(Y)); f via the max-min isotonic formula.
inline double monotone_monotone_grid(const Discrete& d, std::size_t levels) {
  std::vector<double> lv(levels);
  for (std::size_t k = 0; k < levels; ++k) lv[k] = static_cast<double>(k) / static_cast<double>(levels - 1);
  const auto px = d.px();
  double best = -1.0;
  for_each_grid_function(d.ys.size(), lv, true, [&](const std::vector<double>& g) {
    const CondMean c = cond_mean(d, g);
    if (c.sd_g < 1e-12) return;
    std::vector<double> neg(c.h.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -c.h[i];
    const double up = weighted_norm(isotonic_minmax(c.h, px), px);
    const double down = weighted_norm(isotonic_minmax(neg, px), px);
    best = std::max(best, std::max(up, down) / c.sd_g);
  });
  return best;
}

}  // namespace oracle
