#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "msmhd/field.hpp"
#include "msmhd/params.hpp"

namespace msmhd {

// ---------------------------------------------------------------------------
// Counter-based generator (Philox4x32-10).  Stateless: every draw is a pure
// function of (key, counter), which is what makes per-(mode, step, trajectory)
// streams reproducible regardless of scheduling.
// ---------------------------------------------------------------------------

namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter philox4x32_10(Counter ctr, Key key);

/// Uniform in (0,1): (x + 0.5) / 2^32.
double to_uniform(std::uint32_t x);

/// Two standard normals from one counter block (Box-Muller on lanes 0..1 and
/// 2..3).
std::array<double, 2> normal_pair(Counter ctr, Key key);

}  // namespace philox

// ---------------------------------------------------------------------------
// Degenerate Gaussian forcing sigma dW = sum alpha_{k,m} sigma_k^m dW^{k,m},
// sigma_k^0 = cos(k.x), sigma_k^1 = sin(k.x), k in the canonical half lattice.
// ---------------------------------------------------------------------------

struct NoiseEntry {
    Wavevector k{0, 0, 0};
    int parity = 0;  // 0 = cos, 1 = sin
    double alpha = 1.0;

    bool operator==(const NoiseEntry&) const = default;
};

struct NoiseConfig {
    std::vector<NoiseEntry> entries;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument unless every k is a nonzero canonical
    /// half-lattice representative and parities are in {0,1}.
    void validate() const;

    /// Hilbert-Schmidt norm ||sigma|| = sqrt(sum alpha^2 ||sigma_k^m||^2).
    double hs_norm() const;

    bool operator==(const NoiseConfig&) const = default;
};

/// The standing hypothesis configuration: k in {e1,e2,e3}, both parities,
/// all amplitudes alpha.
NoiseConfig default_noise_config(std::uint64_t seed, double alpha = 1.0);

/// ||sigma||_{L^p} = ( int_T3 ( sum |alpha_{k,m} sigma_k^m(x)|^2 )^{p/2} dx )^{1/p}
/// by physical-space quadrature on an internal grid; p >= 2.
double sigma_norm(const NoiseConfig& cfg, double p);

/// One increment sum alpha_{k,m} sigma_k^m xi_{k,m} sqrt(dt) with xi drawn
/// from the counter stream keyed on (seed, k, m, step, traj).  Bit-identical
/// for identical keys.
SpectralScalar sample_increment(const NoiseConfig& cfg, const GridPtr& grid, double dt,
                                std::uint64_t step, std::uint64_t traj);

/// The xi values only (one per entry, same keying); used by diagnostics that
/// need the scalar Brownian increments rather than the assembled field.
std::vector<double> sample_xis(const NoiseConfig& cfg, std::uint64_t step, std::uint64_t traj);

}  // namespace msmhd
