#include "msmhd/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace msmhd {

namespace philox {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void round_once(Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}
}  // namespace

Counter philox4x32_10(Counter ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
        round_once(ctr, key);
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

double to_uniform(std::uint32_t x) {
    return (static_cast<double>(x) + 0.5) * (1.0 / 4294967296.0);
}

std::array<double, 2> normal_pair(Counter ctr, Key key) {
    const Counter r = philox4x32_10(ctr, key);
    const double u1 = to_uniform(r[0]);
    const double u2 = to_uniform(r[1]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace philox

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
const double kVolume = kTwoPi * kTwoPi * kTwoPi;

// Counter layout: (packed (k,m), step lo, step hi, traj).
std::uint32_t pack_mode(const Wavevector& k, int parity) {
    const auto enc = [](int v) { return static_cast<std::uint32_t>(v + 512) & 0x3FFu; };
    return (enc(k[0]) << 22) | (enc(k[1]) << 12) | (enc(k[2]) << 2) |
           static_cast<std::uint32_t>(parity & 1);
}

double entry_normal(const NoiseConfig& cfg, const NoiseEntry& e, std::uint64_t step,
                    std::uint64_t traj) {
    const philox::Key key{static_cast<std::uint32_t>(cfg.seed),
                          static_cast<std::uint32_t>(cfg.seed >> 32)};
    const philox::Counter ctr{pack_mode(e.k, e.parity), static_cast<std::uint32_t>(step),
                              static_cast<std::uint32_t>(step >> 32),
                              static_cast<std::uint32_t>(traj)};
    return philox::normal_pair(ctr, key)[0];
}

}  // namespace

void NoiseConfig::validate() const {
    for (const auto& e : entries) {
        if (e.k[0] == 0 && e.k[1] == 0 && e.k[2] == 0)
            throw std::invalid_argument("NoiseConfig: k = 0 entry not allowed");
        if (!is_canonical_halfspace(e.k))
            throw std::invalid_argument(
                "NoiseConfig: k must be a canonical half-lattice representative");
        if (e.parity != 0 && e.parity != 1)
            throw std::invalid_argument("NoiseConfig: parity must be 0 or 1");
    }
}

double NoiseConfig::hs_norm() const {
    double acc = 0.0;
    for (const auto& e : entries) acc += e.alpha * e.alpha * (kVolume / 2.0);
    return std::sqrt(acc);
}

NoiseConfig default_noise_config(std::uint64_t seed, double alpha) {
    NoiseConfig cfg;
    cfg.seed = seed;
    for (int axis = 0; axis < 3; ++axis) {
        Wavevector k{0, 0, 0};
        k[axis] = 1;
        cfg.entries.push_back({k, 0, alpha});
        cfg.entries.push_back({k, 1, alpha});
    }
    return cfg;
}

double sigma_norm(const NoiseConfig& cfg, double p) {
    if (p < 2.0) throw std::invalid_argument("sigma_norm: p >= 2 required");
    cfg.validate();
    if (cfg.entries.empty()) return 0.0;
    int kmax = 1;
    for (const auto& e : cfg.entries)
        for (int i = 0; i < 3; ++i) kmax = std::max(kmax, std::abs(e.k[i]));
    // Internal quadrature grid; the integrand is smooth so modest
    // oversampling of the highest active frequency suffices.
    const int n = std::max(32, 8 * kmax);
    const double h = kTwoPi / n;
    double acc = 0.0;
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2) {
                double s = 0.0;
                for (const auto& e : cfg.entries) {
                    const double phase = e.k[0] * (i0 * h) + e.k[1] * (i1 * h) + e.k[2] * (i2 * h);
                    const double val = e.alpha * (e.parity == 0 ? std::cos(phase) : std::sin(phase));
                    s += val * val;
                }
                acc += std::pow(s, p / 2.0);
            }
    return std::pow(acc * h * h * h, 1.0 / p);
}

SpectralScalar sample_increment(const NoiseConfig& cfg, const GridPtr& grid, double dt,
                                std::uint64_t step, std::uint64_t traj) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
    SpectralScalar out(grid);
    const double sq = std::sqrt(dt);
    for (const auto& e : cfg.entries) {
        if (!grid->dealias_keep(e.k)) continue;  // forcing outside the resolved set is dropped
        const double xi = entry_normal(cfg, e, step, traj);
        const double amp = 0.5 * e.alpha * xi * sq;
        // cos(k.x) = (e^{ikx} + e^{-ikx})/2, sin(k.x) = (e^{ikx} - e^{-ikx})/(2i)
        const Complex cplus = e.parity == 0 ? Complex{amp, 0.0} : Complex{0.0, -amp};
        out.at(e.k) += cplus;
        out.at({-e.k[0], -e.k[1], -e.k[2]}) += std::conj(cplus);
    }
    return out;
}

std::vector<double> sample_xis(const NoiseConfig& cfg, std::uint64_t step, std::uint64_t traj) {
    std::vector<double> out;
    out.reserve(cfg.entries.size());
    for (const auto& e : cfg.entries) out.push_back(entry_normal(cfg, e, step, traj));
    return out;
}

}  // namespace msmhd
