#pragma once

#include <string>

#include "msmhd/state.hpp"

namespace msmhd {

// Binary field snapshot, version 1.  Layout (little endian):
//   bytes 0..5   magic "MSFLD\0"
//   u16          version (= 1)
//   u8           kind: 0 scalar, 1 vector, 2 full state
//   u8           reserved (= 0)
//   u32          n_per_axis
//   f64 x 9      eps, delta, nu, kappa, lambda_colat, b0[3], time
//   data         complex64 (f32 re, f32 im) per mode in row-major FFT index
//                order; scalar: n^3 entries, vector: 3 blocks (x,y,z),
//                full state: U(3 blocks), B(3 blocks), Theta(1 block).

struct SnapshotInfo {
    int n = 0;
    int kind = 0;
    PhysParams params;
    double time = 0.0;
};

SnapshotInfo peek_snapshot(const std::string& path);

void write_scalar_snapshot(const std::string& path, const SpectralScalar& f, const PhysParams& p,
                           double time = 0.0);
void write_vector_snapshot(const std::string& path, const SpectralVector& v, const PhysParams& p,
                           double time = 0.0);
void write_full_snapshot(const std::string& path, const FullState& s, const PhysParams& p);

SpectralScalar read_scalar_snapshot(const std::string& path);
SpectralVector read_vector_snapshot(const std::string& path);
FullState read_full_snapshot(const std::string& path);

}  // namespace msmhd
