#include "msmhd/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace msmhd {

namespace {

constexpr char kMagic[6] = {'M', 'S', 'F', 'L', 'D', '\0'};
constexpr std::uint16_t kVersion = 1;

struct Header {
    std::uint16_t version;
    std::uint8_t kind;
    std::uint8_t reserved;
    std::uint32_t n;
    double scalars[9];  // eps, delta, nu, kappa, lambda, b0[3], time
};

void write_header(std::ofstream& os, int kind, int n, const PhysParams& p, double time) {
    os.write(kMagic, sizeof(kMagic));
    Header h{};
    h.version = kVersion;
    h.kind = static_cast<std::uint8_t>(kind);
    h.reserved = 0;
    h.n = static_cast<std::uint32_t>(n);
    h.scalars[0] = p.eps;
    h.scalars[1] = p.delta;
    h.scalars[2] = p.nu;
    h.scalars[3] = p.kappa;
    h.scalars[4] = p.lambda_colat;
    h.scalars[5] = p.b0_hat[0];
    h.scalars[6] = p.b0_hat[1];
    h.scalars[7] = p.b0_hat[2];
    h.scalars[8] = time;
    os.write(reinterpret_cast<const char*>(&h.version), sizeof(h.version));
    os.write(reinterpret_cast<const char*>(&h.kind), sizeof(h.kind));
    os.write(reinterpret_cast<const char*>(&h.reserved), sizeof(h.reserved));
    os.write(reinterpret_cast<const char*>(&h.n), sizeof(h.n));
    os.write(reinterpret_cast<const char*>(h.scalars), sizeof(h.scalars));
}

SnapshotInfo read_header(std::ifstream& is, const std::string& path) {
    char magic[6];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("snapshot: bad magic in " + path);
    Header h{};
    is.read(reinterpret_cast<char*>(&h.version), sizeof(h.version));
    is.read(reinterpret_cast<char*>(&h.kind), sizeof(h.kind));
    is.read(reinterpret_cast<char*>(&h.reserved), sizeof(h.reserved));
    is.read(reinterpret_cast<char*>(&h.n), sizeof(h.n));
    is.read(reinterpret_cast<char*>(h.scalars), sizeof(h.scalars));
    if (!is || h.version != kVersion)
        throw std::runtime_error("snapshot: unsupported version in " + path);
    SnapshotInfo info;
    info.n = static_cast<int>(h.n);
    info.kind = h.kind;
    info.params.eps = h.scalars[0];
    info.params.delta = h.scalars[1];
    info.params.nu = h.scalars[2];
    info.params.kappa = h.scalars[3];
    info.params.lambda_colat = h.scalars[4];
    info.params.b0_hat = {h.scalars[5], h.scalars[6], h.scalars[7]};
    info.time = h.scalars[8];
    return info;
}

void write_block(std::ofstream& os, const SpectralScalar& f) {
    std::vector<float> buf(2 * f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        buf[2 * i] = static_cast<float>(f[i].real());
        buf[2 * i + 1] = static_cast<float>(f[i].imag());
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void read_block(std::ifstream& is, SpectralScalar& f, const std::string& path) {
    std::vector<float> buf(2 * f.size());
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!is) throw std::runtime_error("snapshot: truncated data in " + path);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = Complex{static_cast<double>(buf[2 * i]), static_cast<double>(buf[2 * i + 1])};
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open: " + path);
    return is;
}

}  // namespace

SnapshotInfo peek_snapshot(const std::string& path) {
    auto is = open_in(path);
    return read_header(is, path);
}

void write_scalar_snapshot(const std::string& path, const SpectralScalar& f, const PhysParams& p,
                           double time) {
    auto os = open_out(path);
    write_header(os, 0, f.grid()->n(), p, time);
    write_block(os, f);
}

void write_vector_snapshot(const std::string& path, const SpectralVector& v, const PhysParams& p,
                           double time) {
    auto os = open_out(path);
    write_header(os, 1, v.grid()->n(), p, time);
    for (int i = 0; i < 3; ++i) write_block(os, v.comp(i));
}

void write_full_snapshot(const std::string& path, const FullState& s, const PhysParams& p) {
    auto os = open_out(path);
    write_header(os, 2, s.Theta.grid()->n(), p, s.time);
    for (int i = 0; i < 3; ++i) write_block(os, s.U.comp(i));
    for (int i = 0; i < 3; ++i) write_block(os, s.B.comp(i));
    write_block(os, s.Theta);
}

SpectralScalar read_scalar_snapshot(const std::string& path) {
    auto is = open_in(path);
    const SnapshotInfo info = read_header(is, path);
    if (info.kind != 0) throw std::runtime_error("snapshot: not a scalar field: " + path);
    SpectralScalar f(make_grid(info.n));
    read_block(is, f, path);
    return f;
}

SpectralVector read_vector_snapshot(const std::string& path) {
    auto is = open_in(path);
    const SnapshotInfo info = read_header(is, path);
    if (info.kind != 1) throw std::runtime_error("snapshot: not a vector field: " + path);
    SpectralVector v(make_grid(info.n));
    for (int i = 0; i < 3; ++i) read_block(is, v.comp(i), path);
    return v;
}

FullState read_full_snapshot(const std::string& path) {
    auto is = open_in(path);
    const SnapshotInfo info = read_header(is, path);
    if (info.kind != 2) throw std::runtime_error("snapshot: not a full state: " + path);
    FullState s(make_grid(info.n));
    for (int i = 0; i < 3; ++i) read_block(is, s.U.comp(i), path);
    for (int i = 0; i < 3; ++i) read_block(is, s.B.comp(i), path);
    read_block(is, s.Theta, path);
    s.time = info.time;
    return s;
}

}  // namespace msmhd
