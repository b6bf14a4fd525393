#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughchaos {

/// Uniform time grid t_k = k T / K on [0, T] for an m-dimensional driver.
struct GridSpec {
  double horizon = 1.0;  // T > 0
  int steps = 2;         // K >= 2
  int dim = 1;           // m >= 1

  double mesh() const { return horizon / steps; }
  double time(int k) const { return horizon * k / steps; }

  void validate() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("grid horizon must be positive");
    if (steps < 2) throw std::invalid_argument("grid needs at least 2 steps");
    if (dim < 1) throw std::invalid_argument("driver dimension must be >= 1");
  }

  bool operator==(const GridSpec&) const = default;
};

/// Reproducibility record of one sampled path.
struct SeedTag {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  bool operator==(const SeedTag&) const = default;
};

/// One driver trajectory sampled at the grid points, row-major (K+1) x m.
/// values[0, :] == 0: drivers start at the origin.
struct GridPath {
  GridSpec spec;
  std::vector<double> values;
  SeedTag seed_tag;

  double value(int k, int c) const { return values[static_cast<std::size_t>(k) * spec.dim + c]; }

  /// Increment W_{t_a, t_b} of component c.
  double increment(int a, int b, int c) const { return value(b, c) - value(a, c); }
};

/// Driver family: Brownian motion or fractional Brownian motion with
/// Hurst index H in (1/3, 1]. H > 1/3 keeps the level-2 lift within the
/// p in [2,3) regime (rho = 1/(2H) < 3/2).
struct DriverKind {
  enum class Type { brownian, fbm };

  Type type = Type::brownian;
  double hurst_index = 0.5;

  static DriverKind brownian() { return DriverKind{Type::brownian, 0.5}; }
  static DriverKind fbm(double hurst) { return DriverKind{Type::fbm, hurst}; }

  void validate() const {
    if (type == Type::fbm && !(hurst_index > 1.0 / 3.0 && hurst_index <= 1.0)) {
      throw std::invalid_argument("fbm Hurst index must lie in (1/3, 1]");
    }
  }

  /// Per-component covariance R(s, t) = E[W_s W_t].
  double covariance(double s, double t) const {
    const double h2 = 2.0 * hurst_index;
    return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
  }

  std::string name() const {
    return type == Type::brownian ? "brownian" : "fbm(H=" + std::to_string(hurst_index) + ")";
  }
};

}  // namespace roughchaos
