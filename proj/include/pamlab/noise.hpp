#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pamlab/errors.hpp"
#include "pamlab/philox.hpp"

namespace pamlab {

struct GridSpec {
  double t_max = 1.0;
  double dt = 1e-3;
  double x_min = -10.0;
  double x_max = 110.0;
  double dx = 1e-2;

  void validate() const {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("grid.t_max", "must be positive");
    if (!(dt > 0.0) || dt > t_max) throw ConfigError("grid.dt", "must satisfy 0 < dt <= t_max");
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max))
      throw ConfigError("grid.x_min", "must be finite and below grid.x_max");
    if (!(dx > 0.0) || dx > x_max - x_min) throw ConfigError("grid.dx", "must satisfy 0 < dx <= x_max - x_min");
    if (static_cast<double>(time_cells()) * static_cast<double>(space_cells()) > 9.0e18)
      throw ConfigError("grid", "cell count does not fit in memory addressing");
  }
  std::int64_t time_cells() const { return static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-9)); }
  // Lattice coordinates j with x = j dx covering [x_min, x_max].
  std::int64_t j_first() const { return static_cast<std::int64_t>(std::ceil(x_min / dx - 1e-9)); }
  std::int64_t j_last() const { return static_cast<std::int64_t>(std::floor(x_max / dx + 1e-9)); }
  std::int64_t space_cells() const { return j_last() - j_first() + 1; }
};

// Stream tags occupy the top counter word.
enum class NoiseStream : std::uint32_t { field = 0, projected = 1 };

inline constexpr std::size_t kDefaultNoiseBudget = std::size_t{1} << 31;  // bytes

/// Standard normal deviates indexed by (time index n, lattice coordinate j).
/// Each value is a pure function of (seed, replica, n, j); nothing is stored
/// until materialize() is called.
class NoiseSlab {
 public:
  NoiseSlab(GridSpec grid, std::uint64_t seed, std::uint64_t replica, bool silent = false,
            std::size_t budget = kDefaultNoiseBudget)
      : grid_(grid), seed_(seed), replica_(replica), silent_(silent), budget_(budget) {}

  const GridSpec& grid() const { return grid_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t replica_id() const { return replica_; }
  bool silent() const { return silent_; }

  /// Normals for cells j0, j0+1, ..., j0+count-1 of time index n.
  void fill(std::int64_t n, std::int64_t j0, std::size_t count, double* out,
            NoiseStream stream = NoiseStream::field) const {
    if (silent_) {
      for (std::size_t i = 0; i < count; ++i) out[i] = 0.0;
      return;
    }
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    const std::uint32_t w1 = static_cast<std::uint32_t>(n);
    const std::uint32_t w2 = static_cast<std::uint32_t>(replica_);
    const std::uint32_t w3 = (static_cast<std::uint32_t>(replica_ >> 32) & 0x0FFFFFFFu) |
                             (static_cast<std::uint32_t>(stream) << 28);
    // chunks of kBlockChunk counters, aligned to multiples of the chunk size
    constexpr std::int64_t per_chunk = 4 * kBlockChunk;
    alignas(64) double buf[per_chunk];
    std::int64_t j = j0;
    std::size_t i = 0;
    while (i < count) {
      const std::int64_t chunk = floor_div(j, per_chunk);
      philox_normals(block_word(chunk * kBlockChunk), w1, w2, w3, key, buf);
      for (std::int64_t k = j - chunk * per_chunk; k < per_chunk && i < count; ++k, ++j, ++i) out[i] = buf[k];
    }
  }

  double value(std::int64_t n, std::int64_t j, NoiseStream stream = NoiseStream::field) const {
    double v;
    fill(n, j, 1, &v, stream);
    return v;
  }

  /// One time slice over the grid's space cells [j_first, j_last].
  std::vector<double> slice(std::int64_t n) const {
    const auto cells = static_cast<std::size_t>(grid_.space_cells());
    check_budget(cells);
    std::vector<double> out(cells);
    fill(n, grid_.j_first(), cells, out.data());
    return out;
  }

  /// Whole slab, row-major in (time index, space cell).
  std::vector<double> materialize() const {
    const double total = static_cast<double>(grid_.time_cells()) * static_cast<double>(grid_.space_cells());
    check_budget(total);
    const auto cells = static_cast<std::size_t>(grid_.space_cells());
    std::vector<double> out(static_cast<std::size_t>(total));
    for (std::int64_t n = 0; n < grid_.time_cells(); ++n)
      fill(n, grid_.j_first(), cells, out.data() + static_cast<std::size_t>(n) * cells);
    return out;
  }

 private:
  static std::int64_t floor_div(std::int64_t j, std::int64_t m) { return j >= 0 ? j / m : -((-j + m - 1) / m); }
  static std::uint32_t block_word(std::int64_t block) { return static_cast<std::uint32_t>(block + (std::int64_t{1} << 31)); }
  void check_budget(double cells) const {
    if (cells * sizeof(double) > static_cast<double>(budget_))
      throw ResourceError("noise: " + std::to_string(cells) + " cells exceed the memory budget of " +
                          std::to_string(budget_) + " bytes");
  }

  GridSpec grid_;
  std::uint64_t seed_;
  std::uint64_t replica_;
  bool silent_;
  std::size_t budget_;
};

inline NoiseSlab make_noise(const GridSpec& grid, std::uint64_t seed, std::uint64_t replica,
                            std::size_t budget = kDefaultNoiseBudget) {
  grid.validate();
  const double slice_bytes = static_cast<double>(grid.space_cells()) * sizeof(double);
  if (slice_bytes > static_cast<double>(budget))
    throw ResourceError("noise: a single time slice exceeds the memory budget");
  return NoiseSlab(grid, seed, replica, false, budget);
}

/// Identically zero noise on the same grid (deterministic heat flow).
inline NoiseSlab silent_noise(const GridSpec& grid) { return NoiseSlab(grid, 0, 0, true); }

}  // namespace pamlab
