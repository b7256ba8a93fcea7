#include "msmhd/grid.hpp"

#include <stdexcept>
#include <string>

namespace msmhd {

bool is_canonical_halfspace(const Wavevector& k) {
    if (k[0] != 0) return k[0] > 0;
    if (k[1] != 0) return k[1] > 0;
    return k[2] > 0;
}

Grid::Grid(int n_per_axis) : n_(n_per_axis) {
    if (n_ < 4 || n_ % 2 != 0)
        throw std::invalid_argument("Grid: n_per_axis must be even and >= 4, got " +
                                    std::to_string(n_));
    const int kcut = kmax_dealiased();
    mask_.assign(size(), false);
    for (std::size_t flat = 0; flat < size(); ++flat) {
        const Wavevector k = wavevector(flat);
        if (k[0] == 0 && k[1] == 0 && k[2] == 0) continue;  // mean mode stays masked
        if (std::abs(k[0]) > kcut || std::abs(k[1]) > kcut || std::abs(k[2]) > kcut) continue;
        mask_[flat] = true;
        active_.push_back(flat);
        if (is_canonical_halfspace(k)) half_.push_back(flat);
    }
}

std::shared_ptr<const Grid> make_grid(int n_per_axis) {
    return std::make_shared<const Grid>(n_per_axis);
}

}  // namespace msmhd
