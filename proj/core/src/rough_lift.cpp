#include "roughchaos/rough_lift.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace roughchaos {

Level2Blocks lift_cross(const GridPath& path_i, const GridPath& path_j, int i, int j) {
  if (path_i.spec != path_j.spec) throw std::invalid_argument("paths must share a grid spec");
  const GridSpec& spec = path_i.spec;
  const int K = spec.steps;
  const int m = spec.dim;

  Level2Blocks out;
  out.spec = spec;
  out.i = i;
  out.j = j;
  out.blocks.resize(static_cast<std::size_t>(K) * m * m);
  for (int k = 0; k < K; ++k) {
    double* block = out.blocks.data() + static_cast<std::size_t>(k) * m * m;
    for (int r = 0; r < m; ++r) {
      const double a = path_i.increment(k, k + 1, r);
      for (int c = 0; c < m; ++c) {
        block[r * m + c] = 0.5 * a * path_j.increment(k, k + 1, c);
      }
    }
  }
  return out;
}

std::vector<double> chen_eval(const Level2Blocks& blocks, const GridPath& path_i,
                              const GridPath& path_j, int k_from, int k_to) {
  const GridSpec& spec = blocks.spec;
  const int m = spec.dim;
  if (k_from < 0 || k_to > spec.steps || k_from > k_to) {
    throw std::out_of_range("chen_eval indices out of range");
  }
  std::vector<double> acc(static_cast<std::size_t>(m) * m, 0.0);
  for (int k = k_from; k < k_to; ++k) {
    const double* block = blocks.block(k);
    for (int r = 0; r < m; ++r) {
      const double left = path_i.increment(k_from, k, r);
      for (int c = 0; c < m; ++c) {
        acc[r * m + c] += block[r * m + c] + left * path_j.increment(k, k + 1, c);
      }
    }
  }
  return acc;
}

EmpiricalRoughSetup::EmpiricalRoughSetup(std::vector<GridPath> paths, bool materialize_cross)
    : paths_(std::move(paths)), materialized_(materialize_cross) {
  if (paths_.empty()) throw std::invalid_argument("setup needs at least one path");
  spec_ = paths_[0].spec;
  for (const GridPath& path : paths_) {
    if (path.spec != spec_) throw std::invalid_argument("paths must share a grid spec");
  }
  const int n = size();
  self_.reserve(n);
  for (int i = 0; i < n; ++i) self_.push_back(lift_cross(paths_[i], paths_[i], i, i));
  if (materialized_) {
    cross_.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cross_.push_back(i == j ? self_[i] : lift_cross(paths_[i], paths_[j], i, j));
      }
    }
  }
}

void EmpiricalRoughSetup::step_block(int i, int j, int k, double* out) const {
  const int m = spec_.dim;
  if (materialized_) {
    const Level2Blocks& blocks = cross_[static_cast<std::size_t>(i) * size() + j];
    std::memcpy(out, blocks.block(k), sizeof(double) * m * m);
    return;
  }
  const GridPath& pi = paths_[i];
  const GridPath& pj = paths_[j];
  for (int r = 0; r < m; ++r) {
    const double a = pi.increment(k, k + 1, r);
    for (int c = 0; c < m; ++c) out[r * m + c] = 0.5 * a * pj.increment(k, k + 1, c);
  }
}

Level2Blocks EmpiricalRoughSetup::cross_blocks(int i, int j) const {
  if (materialized_) return cross_[static_cast<std::size_t>(i) * size() + j];
  if (i == j) return self_[i];
  return lift_cross(paths_[i], paths_[j], i, j);
}

std::vector<double> EmpiricalRoughSetup::area(int i, int j, int k_from, int k_to) const {
  const int m = spec_.dim;
  if (k_from < 0 || k_to > spec_.steps || k_from > k_to) {
    throw std::out_of_range("area indices out of range");
  }
  const GridPath& pi = paths_[i];
  const GridPath& pj = paths_[j];
  std::vector<double> acc(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> block(static_cast<std::size_t>(m) * m);
  for (int k = k_from; k < k_to; ++k) {
    step_block(i, j, k, block.data());
    for (int r = 0; r < m; ++r) {
      const double left = pi.increment(k_from, k, r);
      for (int c = 0; c < m; ++c) {
        acc[r * m + c] += block[r * m + c] + left * pj.increment(k, k + 1, c);
      }
    }
  }
  return acc;
}

EmpiricalRoughSetup build_empirical_setup(std::vector<GridPath> paths, bool materialize_cross) {
  return EmpiricalRoughSetup(std::move(paths), materialize_cross);
}

namespace {

constexpr char kMagic[8] = {'R', 'C', 'S', 'E', 'T', 'U', 'P', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void save_setup(const EmpiricalRoughSetup& setup, const std::string& file,
                const DriverKind& kind) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + file + " for writing");
  out.write(kMagic, sizeof(kMagic));
  const GridSpec& spec = setup.spec();
  write_raw(out, static_cast<std::uint64_t>(setup.size()));
  write_raw(out, static_cast<std::uint64_t>(spec.steps));
  write_raw(out, static_cast<std::uint64_t>(spec.dim));
  write_raw(out, spec.horizon);
  write_raw(out, kind.hurst_index);
  write_raw(out, static_cast<std::uint64_t>(setup.materialized() ? 1 : 0));
  for (int i = 0; i < setup.size(); ++i) {
    const GridPath& path = setup.path(i);
    write_raw(out, path.seed_tag.seed);
    write_raw(out, path.seed_tag.index);
    out.write(reinterpret_cast<const char*>(path.values.data()),
              static_cast<std::streamsize>(path.values.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed for " + file);
}

EmpiricalRoughSetup load_setup(const std::string& file, DriverKind* kind_out) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(file + " is not a setup dump");
  }
  std::uint64_t n = 0, steps = 0, dim = 0, flags = 0;
  double horizon = 0.0, hurst = 0.0;
  read_raw(in, n);
  read_raw(in, steps);
  read_raw(in, dim);
  read_raw(in, horizon);
  read_raw(in, hurst);
  read_raw(in, flags);
  GridSpec spec{horizon, static_cast<int>(steps), static_cast<int>(dim)};
  spec.validate();
  std::vector<GridPath> paths;
  paths.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    GridPath path;
    path.spec = spec;
    read_raw(in, path.seed_tag.seed);
    read_raw(in, path.seed_tag.index);
    path.values.resize(static_cast<std::size_t>(steps + 1) * dim);
    in.read(reinterpret_cast<char*>(path.values.data()),
            static_cast<std::streamsize>(path.values.size() * sizeof(double)));
    paths.push_back(std::move(path));
  }
  if (!in) throw std::runtime_error("truncated setup dump " + file);
  if (kind_out) {
    *kind_out = hurst == 0.5 ? DriverKind::brownian() : DriverKind::fbm(hurst);
  }
  return EmpiricalRoughSetup(std::move(paths), (flags & 1) != 0);
}

}  // namespace roughchaos
