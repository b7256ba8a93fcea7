#include "msmhd/ops.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace msmhd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_nonzero(const Wavevector& k, const char* who) {
    if (k[0] == 0 && k[1] == 0 && k[2] == 0)
        throw std::invalid_argument(std::string(who) + ": k = 0 is excluded (mean-free fields)");
}

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* who) {
    if (!a || !b || !(*a == *b)) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(dot(v, v));
    return {v[0] / n, v[1] / n, v[2] / n};
}

/// Real orthonormal basis {ea, eb} of the plane orthogonal to k.
void mode_basis(const Wavevector& k, Vec3& ea, Vec3& eb) {
    const Vec3 kh = normalized(Vec3{double(k[0]), double(k[1]), double(k[2])});
    int ax = 0;
    double best = std::abs(kh[0]);
    for (int i = 1; i < 3; ++i)
        if (std::abs(kh[i]) < best) best = std::abs(kh[i]), ax = i;
    Vec3 t = {0.0, 0.0, 0.0};
    t[ax] = 1.0;
    ea = normalized(cross(kh, t));
    eb = cross(kh, ea);
}

}  // namespace

double symbol_D(const Wavevector& k, const PhysParams& p) {
    require_nonzero(k, "symbol_D");
    const double k2 = norm2(k);
    const double bk = dot(p.b0_hat, k);
    const double ok = dot(p.omega_hat(), k);
    const double a = p.nu * k2 * k2 + bk * bk;
    return k2 * ok * ok + a * a;
}

Vec3 symbol_Mu(const Wavevector& k, const PhysParams& p) {
    require_nonzero(k, "symbol_Mu");
    const double k2 = norm2(k);
    const double bk = dot(p.b0_hat, k);
    const double ok = dot(p.omega_hat(), k);
    const double a = p.nu * k2 * k2 + bk * bk;
    const double D = k2 * ok * ok + a * a;
    // k x (e3 x k) = e3 |k|^2 - k k3,  e3 x k = (-k2, k1, 0)
    const double k3 = k[2];
    const Vec3 t1 = {-k[0] * k3, -k[1] * k3, k2 - k3 * k3};
    const Vec3 t2 = {double(-k[1]), double(k[0]), 0.0};
    return {(a * t1[0] + ok * k2 * t2[0]) / D, (a * t1[1] + ok * k2 * t2[1]) / D,
            (a * t1[2] + ok * k2 * t2[2]) / D};
}

double symbol_Mb_factor(const Wavevector& k, const PhysParams& p) {
    require_nonzero(k, "symbol_Mb_factor");
    return dot(p.b0_hat, k) / norm2(k);
}

SymbolScan scan_symbol_bounds(int kmax, const PhysParams& p) {
    SymbolScan out;
    const double r2 = double(kmax) * kmax;
    for (int k1 = -kmax; k1 <= kmax; ++k1)
        for (int k2 = -kmax; k2 <= kmax; ++k2)
            for (int k3 = -kmax; k3 <= kmax; ++k3) {
                const Wavevector k{k1, k2, k3};
                const double kk = norm2(k);
                if (kk == 0 || kk > r2) continue;
                const Vec3 mu = symbol_Mu(k, p);
                const double amu = std::sqrt(dot(mu, mu));
                const double amb = std::abs(symbol_Mb_factor(k, p)) * amu;
                const double akn = std::sqrt(kk);
                out.sup_mu_k2 = std::max(out.sup_mu_k2, amu * kk);
                out.sup_mb_k3 = std::max(out.sup_mb_k3, amb * kk * akn);
                out.sup_mu_h1 = std::max(out.sup_mu_h1, amu * akn);
                out.sup_mb_h1 = std::max(out.sup_mb_h1, amb * akn);
            }
    return out;
}

SpectralVector leray_project(const SpectralVector& v) {
    SpectralVector out = v;
    const Grid& g = *v.grid();
    for (std::size_t flat : g.active_modes()) {
        const Wavevector k = g.wavevector(flat);
        const double k2 = norm2(k);
        const Complex kdotv =
            double(k[0]) * v.x[flat] + double(k[1]) * v.y[flat] + double(k[2]) * v.z[flat];
        const Complex coef = kdotv / k2;
        out.x[flat] = v.x[flat] - double(k[0]) * coef;
        out.y[flat] = v.y[flat] - double(k[1]) * coef;
        out.z[flat] = v.z[flat] - double(k[2]) * coef;
    }
    out.solenoidal = true;
    return out;
}

void apply_constitutive(const SpectralScalar& theta, const PhysParams& p, SpectralVector& u,
                        SpectralVector& b) {
    const GridPtr& g = theta.grid();
    u = SpectralVector(g);
    b = SpectralVector(g);
    for (std::size_t flat : g->active_modes()) {
        const Wavevector k = g->wavevector(flat);
        const Vec3 mu = symbol_Mu(k, p);
        const Complex th = theta[flat];
        const Complex ib = Complex{0.0, symbol_Mb_factor(k, p)};
        u.x[flat] = mu[0] * th;
        u.y[flat] = mu[1] * th;
        u.z[flat] = mu[2] * th;
        b.x[flat] = ib * u.x[flat];
        b.y[flat] = ib * u.y[flat];
        b.z[flat] = ib * u.z[flat];
    }
    u.solenoidal = true;
    b.solenoidal = true;
}

SpectralVector apply_Q_inverse_drive(const SpectralScalar& theta, const PhysParams& p) {
    const GridPtr& g = theta.grid();
    const Vec3 om = p.omega_hat();
    SpectralVector out(g);
    for (std::size_t flat : g->active_modes()) {
        const Wavevector k = g->wavevector(flat);
        const double k2 = norm2(k);
        const double bk = dot(p.b0_hat, k);
        const double s = p.nu * k2 + bk * bk / k2;
        Vec3 ea, eb;
        mode_basis(k, ea, eb);
        const double w = dot(ea, cross(om, eb));
        const double det = s * s + w * w;
        if (!(det > 1e-300))
            throw NumericalDegeneracyError("apply_Q_inverse_drive: singular mode system");
        const Complex ra = ea[2] * theta[flat];  // ea . (P_k e3) = ea . e3
        const Complex rb = eb[2] * theta[flat];
        const Complex ua = (s * ra - w * rb) / det;
        const Complex ub = (w * ra + s * rb) / det;
        out.x[flat] = ua * ea[0] + ub * eb[0];
        out.y[flat] = ua * ea[1] + ub * eb[1];
        out.z[flat] = ua * ea[2] + ub * eb[2];
    }
    out.solenoidal = true;
    return out;
}

SpectralVector apply_R(const SpectralScalar& theta, const PhysParams& p) {
    SpectralVector out = apply_Q_inverse_drive(theta, p);
    const Grid& g = *theta.grid();
    for (std::size_t flat : g.active_modes()) {
        const Wavevector k = g.wavevector(flat);
        // (-Delta)^{-1} (b0 . grad) -> i (b0.k)/|k|^2
        const Complex f = Complex{0.0, dot(p.b0_hat, k) / norm2(k)};
        out.x[flat] *= f;
        out.y[flat] *= f;
        out.z[flat] *= f;
    }
    return out;
}

SpectralScalar partial_derivative(const SpectralScalar& s, int axis) {
    SpectralScalar out(s.grid());
    const Grid& g = *s.grid();
    for (std::size_t flat : g.active_modes()) {
        const Wavevector k = g.wavevector(flat);
        out[flat] = Complex{0.0, double(k[axis])} * s[flat];
    }
    return out;
}

double max_divergence(const SpectralVector& v) {
    const Grid& g = *v.grid();
    double worst = 0.0;
    for (std::size_t flat : g.active_modes()) {
        const Wavevector k = g.wavevector(flat);
        const Complex kv =
            double(k[0]) * v.x[flat] + double(k[1]) * v.y[flat] + double(k[2]) * v.z[flat];
        worst = std::max(worst, std::abs(kv));
    }
    return worst;
}

std::vector<double>& SpectralWorkspace::scratch(int slot) {
    if (bufs_.size() <= static_cast<std::size_t>(slot)) bufs_.resize(slot + 1);
    bufs_[slot].resize(grid()->size());
    return bufs_[slot];
}

namespace {

// v given as physical samples in slots 0..2 of ws; returns v.grad(s).
SpectralScalar advect_with_physical_velocity(const SpectralScalar& s, SpectralWorkspace& ws) {
    auto& acc = ws.scratch(4);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int ax = 0; ax < 3; ++ax) {
        const SpectralScalar ds = partial_derivative(s, ax);
        auto& dphys = ws.scratch(3);
        ws.transform().inverse(ds, dphys);
        const auto& vph = ws.scratch(ax);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += vph[i] * dphys[i];
    }
    SpectralScalar out;
    ws.transform().forward(acc, out);  // dealias + drop the mean
    return out;
}

void load_velocity(const SpectralVector& v, SpectralWorkspace& ws) {
    for (int i = 0; i < 3; ++i) ws.transform().inverse(v.comp(i), ws.scratch(i));
}

}  // namespace

SpectralScalar advect(const SpectralVector& v, const SpectralScalar& s, SpectralWorkspace& ws) {
    require_same_grid(v.grid(), s.grid(), "advect");
    require_same_grid(v.grid(), ws.grid(), "advect");
    load_velocity(v, ws);
    return advect_with_physical_velocity(s, ws);
}

SpectralVector advect(const SpectralVector& v, const SpectralVector& s, SpectralWorkspace& ws) {
    require_same_grid(v.grid(), s.grid(), "advect");
    require_same_grid(v.grid(), ws.grid(), "advect");
    load_velocity(v, ws);
    SpectralVector out(s.grid());
    for (int i = 0; i < 3; ++i) out.comp(i) = advect_with_physical_velocity(s.comp(i), ws);
    out.solenoidal = false;  // v.grad(s) need not be divergence free
    return out;
}

namespace {
const double kVolume = kTwoPi * kTwoPi * kTwoPi;
}

double norm_l2(const SpectralScalar& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += std::norm(f[i]);
    return std::sqrt(kVolume * acc);
}

double norm_l2(const SpectralVector& v) {
    const double a = norm_l2(v.x), b = norm_l2(v.y), c = norm_l2(v.z);
    return std::sqrt(a * a + b * b + c * c);
}

double norm_hs(const SpectralScalar& f, double s) {
    const Grid& g = *f.grid();
    double acc = 0.0;
    for (std::size_t flat : g.active_modes()) {
        const double k2 = norm2(g.wavevector(flat));
        acc += std::pow(k2, s) * std::norm(f[flat]);
    }
    return std::sqrt(kVolume * acc);
}

double norm_hs(const SpectralVector& v, double s) {
    const double a = norm_hs(v.x, s), b = norm_hs(v.y, s), c = norm_hs(v.z, s);
    return std::sqrt(a * a + b * b + c * c);
}

double norm_lp(const SpectralScalar& f, double p, SpectralWorkspace& ws) {
    if (p < 1.0) throw std::invalid_argument("norm_lp: p >= 1 required");
    require_same_grid(f.grid(), ws.grid(), "norm_lp");
    auto& phys = ws.scratch(5);
    ws.transform().inverse(f, phys);
    const int n = f.grid()->n();
    const double weight = kVolume / (double(n) * n * n);
    double acc = 0.0;
    for (double x : phys) acc += std::pow(std::abs(x), p);
    return std::pow(weight * acc, 1.0 / p);
}

double norm_l2_quadrature(const SpectralScalar& f, SpectralWorkspace& ws) {
    return norm_lp(f, 2.0, ws);
}

double inner_l2(const SpectralScalar& a, const SpectralScalar& b) {
    assert(a.compatible(b));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return kVolume * acc;
}

double inner_l2(const SpectralVector& a, const SpectralVector& b) {
    return inner_l2(a.x, b.x) + inner_l2(a.y, b.y) + inner_l2(a.z, b.z);
}

}  // namespace msmhd
