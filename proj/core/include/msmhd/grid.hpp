#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace msmhd {

using Wavevector = std::array<int, 3>;

inline int dot(const Wavevector& a, const Wavevector& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline int norm2(const Wavevector& k) { return dot(k, k); }

/// Periodic Fourier grid on [0,2pi)^3 with n modes per axis.
///
/// Wavenumbers per axis run over {-n/2+1, ..., n/2}; storage is in FFT
/// index order (k mod n, row major).  The dealias mask implements the 2/3
/// rule (|k_i| <= floor(n/3)) and always masks the mean mode k = 0, so every
/// retained mode has an exactly representable mirror -k != k.
class Grid {
  public:
    explicit Grid(int n_per_axis);

    int n() const { return n_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
    int kmax_dealiased() const { return n_ / 3; }

    // FFT index <-> signed wavenumber, per axis.
    int wavenumber(int index) const { return index <= n_ / 2 ? index : index - n_; }
    int index_of(int k) const { return k >= 0 ? k : k + n_; }

    std::size_t flat_index(const Wavevector& k) const {
        return (static_cast<std::size_t>(index_of(k[0])) * n_ + index_of(k[1])) * n_ +
               index_of(k[2]);
    }
    Wavevector wavevector(std::size_t flat) const {
        const int i2 = static_cast<int>(flat % n_);
        const int i1 = static_cast<int>((flat / n_) % n_);
        const int i0 = static_cast<int>(flat / (static_cast<std::size_t>(n_) * n_));
        return {wavenumber(i0), wavenumber(i1), wavenumber(i2)};
    }

    bool dealias_keep(std::size_t flat) const { return mask_[flat]; }
    bool dealias_keep(const Wavevector& k) const { return mask_[flat_index(k)]; }

    /// Flat indices of retained modes (k != 0, inside the 2/3 ball).
    const std::vector<std::size_t>& active_modes() const { return active_; }

    /// Retained modes restricted to the canonical half lattice
    /// (k1 > 0, or k1 = 0 and k2 > 0, or k1 = k2 = 0 and k3 > 0); one
    /// representative per conjugate pair.
    const std::vector<std::size_t>& half_modes() const { return half_; }

    std::size_t conjugate_index(std::size_t flat) const {
        const Wavevector k = wavevector(flat);
        return flat_index({-k[0], -k[1], -k[2]});
    }

    bool operator==(const Grid& other) const { return n_ == other.n_; }

  private:
    int n_;
    std::vector<bool> mask_;
    std::vector<std::size_t> active_;
    std::vector<std::size_t> half_;
};

/// True when k is the canonical representative of the +-k pair.
bool is_canonical_halfspace(const Wavevector& k);

std::shared_ptr<const Grid> make_grid(int n_per_axis);

}  // namespace msmhd
