#pragma once

#include <string>
#include <vector>

#include "roughchaos/grid.hpp"

namespace roughchaos {

/// Per-step level-2 matrices for one ordered driver pair (i, j):
/// block k holds the m x m iterated integral over [t_k, t_{k+1}], entry
/// (r, c) integrating component r of path i against component c of path j.
struct Level2Blocks {
  GridSpec spec;
  int i = 0;
  int j = 0;
  std::vector<double> blocks;  // K * m * m, row-major per step

  double entry(int k, int r, int c) const {
    const int m = spec.dim;
    return blocks[(static_cast<std::size_t>(k) * m + r) * m + c];
  }
  const double* block(int k) const {
    const int m = spec.dim;
    return blocks.data() + static_cast<std::size_t>(k) * m * m;
  }
};

/// Piecewise-linear (Wong-Zakai) lift of a path pair: on a single step the
/// iterated integral of the interpolants is exactly (1/2) a_k (x) b_k with
/// a_k, b_k the step increments. This is the measurable pair map realized
/// on the grid; it is geometric and symmetric in its construction.
Level2Blocks lift_cross(const GridPath& path_i, const GridPath& path_j, int i = 0, int j = 0);

/// Level-2 increment over [t_{k_from}, t_{k_to}] reconstructed from unit-step
/// blocks by Chen's relation, accumulated left to right; k_from == k_to gives
/// the zero matrix. Returns m x m, row-major.
std::vector<double> chen_eval(const Level2Blocks& blocks, const GridPath& path_i,
                              const GridPath& path_j, int k_from, int k_to);

/// n driver paths plus their level-2 data: self areas are stored per step,
/// cross areas are produced on demand from increments (or materialized for
/// diagnostics). Immutable after construction.
class EmpiricalRoughSetup {
 public:
  EmpiricalRoughSetup(std::vector<GridPath> paths, bool materialize_cross);

  int size() const { return static_cast<int>(paths_.size()); }
  const GridSpec& spec() const { return spec_; }
  const GridPath& path(int i) const { return paths_[i]; }
  const std::vector<GridPath>& paths() const { return paths_; }
  const Level2Blocks& self_blocks(int i) const { return self_[i]; }
  bool materialized() const { return materialized_; }

  /// Unit-step block of the ordered pair (i, j); out receives m x m row-major.
  void step_block(int i, int j, int k, double* out) const;

  /// Blocks for an ordered pair, materialized or computed on the spot.
  Level2Blocks cross_blocks(int i, int j) const;

  /// W^{i,j} over [t_{k_from}, t_{k_to}] via Chen's relation (m x m).
  std::vector<double> area(int i, int j, int k_from, int k_to) const;

 private:
  GridSpec spec_;
  std::vector<GridPath> paths_;
  std::vector<Level2Blocks> self_;
  bool materialized_ = false;
  std::vector<Level2Blocks> cross_;  // n*n entries when materialized, (i,j) at i*n+j
};

EmpiricalRoughSetup build_empirical_setup(std::vector<GridPath> paths,
                                          bool materialize_cross = false);

/// Binary dump for experiment resumption. Layout (little-endian): the magic
/// "RCSETUP1", then u64 n, u64 K, u64 m, f64 T, f64 H, u64 flags (bit 0:
/// cross blocks materialized on reload), then per path u64 seed, u64 index
/// and (K+1)*m f64 values, row-major. Round-trips bit-exactly.
void save_setup(const EmpiricalRoughSetup& setup, const std::string& file,
                const DriverKind& kind);
EmpiricalRoughSetup load_setup(const std::string& file, DriverKind* kind_out = nullptr);

}  // namespace roughchaos
