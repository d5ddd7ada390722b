#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "mcorr/data.hpp"

namespace mcorr {

/// Portable random source: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard). uniform01 uses the top 53 bits; normal uses the
/// cosine branch of Box-Muller on two fresh uniforms. No library
/// distributions are involved, so streams replicate across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  int bit() { return static_cast<int>(engine_() >> 63); }
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

enum class Scenario { lsb, example1, circle, log_noise, threshold, gaussian_pair };

constexpr std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::lsb: return "lsb";
    case Scenario::example1: return "example1";
    case Scenario::circle: return "circle";
    case Scenario::log_noise: return "log-noise";
    case Scenario::threshold: return "threshold";
    case Scenario::gaussian_pair: return "gaussian-pair";
  }
  return "unknown";
}

inline std::optional<Scenario> parse_scenario(std::string_view name) {
  for (auto s : {Scenario::lsb, Scenario::example1, Scenario::circle, Scenario::log_noise, Scenario::threshold,
                 Scenario::gaussian_pair})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

struct GeneratorSpec {
  Scenario scenario = Scenario::gaussian_pair;
  std::size_t n_samples = 20000;
  std::uint64_t seed = 0;
  // lsb
  int bits = 6;
  bool rescale = false;  // divide the lsb pair by 2^bits
  // gaussian_pair
  double rho = 0.5;
  // example1 noise variances
  double sigma2_n1 = 0.01;
  double sigma2_n2 = 0.2;

  void validate() const {
    if (n_samples < 10) throw Error(ErrorKind::InvalidParameter, "n_samples must be >= 10");
    if (scenario == Scenario::lsb && (bits < 1 || bits > 52))
      throw Error(ErrorKind::InvalidParameter, "bits must lie in [1, 52]");
    if (scenario == Scenario::gaussian_pair && !(std::abs(rho) <= 1.0))
      throw Error(ErrorKind::InvalidParameter, "rho must lie in [-1, 1]");
    if (scenario == Scenario::example1 && !(sigma2_n1 >= 0.0 && sigma2_n2 >= 0.0))
      throw Error(ErrorKind::InvalidParameter, "noise variances must be non-negative");
  }
};

/// Lower end of the log_noise response range; keeps log(Y) finite.
inline constexpr double log_noise_floor = 1e-12;

/// Draws the scenario table. Per row, in order:
///  lsb:           C, then (A_i, B_i) for i = 1..bits; X = C + sum A_i 2^i, Y = C + sum B_i 2^i
///  example1:      Y ~ U[0,1), N1, N2;  X1 = mod(Y, 0.2) + N1,  X2 = Y^3 + N2
///  circle:        angle ~ U[0, 2pi);  (X, Y) = (cos, sin)
///  log_noise:     Y ~ U(floor, 10], N;  X = log(Y) + N
///  threshold:     Y ~ U[-10,10), N1 ~ U[-1,1);  X = Y if Y > 9 else N1
///  gaussian_pair: X, Z ~ N(0,1);  Y = rho X + sqrt(1 - rho^2) Z
inline SampleTable generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.n_samples;
  std::vector<double> y(n), x1(n), x2;

  switch (spec.scenario) {
    case Scenario::lsb: {
      const double scale = spec.rescale ? std::ldexp(1.0, -spec.bits) : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const int c = rng.bit();
        std::uint64_t a = 0, b = 0;
        for (int j = 1; j <= spec.bits; ++j) {
          a |= static_cast<std::uint64_t>(rng.bit()) << j;
          b |= static_cast<std::uint64_t>(rng.bit()) << j;
        }
        x1[i] = static_cast<double>(a + c) * scale;
        y[i] = static_cast<double>(b + c) * scale;
      }
      break;
    }
    case Scenario::example1: {
      x2.resize(n);
      const double s1 = std::sqrt(spec.sigma2_n1), s2 = std::sqrt(spec.sigma2_n2);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng.uniform01();
        const double n1 = rng.normal(), n2 = rng.normal();
        x1[i] = std::fmod(y[i], 0.2) + s1 * n1;
        x2[i] = y[i] * y[i] * y[i] + s2 * n2;
      }
      return SampleTable(std::move(y), {std::move(x1), std::move(x2)}, "y", {"x1", "x2"});
    }
    case Scenario::circle:
      for (std::size_t i = 0; i < n; ++i) {
        const double angle = 2.0 * std::numbers::pi * rng.uniform01();
        x1[i] = std::cos(angle);
        y[i] = std::sin(angle);
      }
      break;
    case Scenario::log_noise:
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = 10.0 - (10.0 - log_noise_floor) * rng.uniform01();
        x1[i] = std::log(y[i]) + rng.normal();
      }
      break;
    case Scenario::threshold:
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng.uniform(-10.0, 10.0);
        const double noise = rng.uniform(-1.0, 1.0);
        x1[i] = y[i] > 9.0 ? y[i] : noise;
      }
      break;
    case Scenario::gaussian_pair: {
      const double c = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
      for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.normal(), z = rng.normal();
        x1[i] = x;
        y[i] = spec.rho * x + c * z;
      }
      break;
    }
  }
  return SampleTable(std::move(y), {std::move(x1)}, "y", {"x"});
}

}  // namespace mcorr
