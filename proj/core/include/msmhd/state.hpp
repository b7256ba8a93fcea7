#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "msmhd/field.hpp"
#include "msmhd/params.hpp"

namespace msmhd {

/// A trajectory left the resolved regime (NaN/Inf or norm guard tripped).
struct BlowUpError : std::runtime_error {
    BlowUpError(std::string what, std::size_t step_index, std::uint64_t trajectory)
        : std::runtime_error(std::move(what)), step(step_index), traj(trajectory) {}
    std::size_t step;
    std::uint64_t traj;
};

/// State of the limit active scalar equation.
struct LimitState {
    LimitState() = default;
    explicit LimitState(GridPtr grid) : theta(std::move(grid)) {}
    SpectralScalar theta;
    double time = 0.0;
};

/// State of the full MHD system; U and B divergence free, all mean free.
struct FullState {
    FullState() = default;
    explicit FullState(GridPtr grid) : U(grid), B(grid), Theta(std::move(grid)) {
        U.solenoidal = true;
        B.solenoidal = true;
    }
    SpectralVector U, B;
    SpectralScalar Theta;
    double time = 0.0;
};

struct StepConfig {
    double dt = 1e-3;
    std::string scheme = "if-euler";  // integrating-factor Euler with exact mode propagators
    bool advection = true;            // switch off for linear-law studies
    double blowup_threshold = 1e8;    // guard on the L2 norm
    // Discrete stopping time tau_K: freeze recorded observables at the first
    // step with ||theta||_{L3}^2 >= stop_l3sq.  Off by default.
    double stop_l3sq = std::numeric_limits<double>::infinity();

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("StepConfig: dt must be positive");
    }

    bool operator==(const StepConfig&) const = default;
};

}  // namespace msmhd
