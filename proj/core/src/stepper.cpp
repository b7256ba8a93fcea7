#include "msmhd/stepper.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace msmhd {

namespace {

using Mat5 = Eigen::Matrix<std::complex<double>, 5, 5>;
using CVec5 = std::array<Complex, 5>;
using Mat5Flat = std::array<Complex, 25>;

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(dot(v, v));
    return {v[0] / n, v[1] / n, v[2] / n};
}

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

Mat5Flat flatten(const Mat5& m) {
    Mat5Flat out;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) out[r * 5 + c] = m(r, c);
    return out;
}

CVec5 matvec(const Mat5Flat& m, const CVec5& x) {
    CVec5 y{};
    for (int r = 0; r < 5; ++r) {
        Complex acc{0.0, 0.0};
        for (int c = 0; c < 5; ++c) acc += m[r * 5 + c] * x[c];
        y[r] = acc;
    }
    return y;
}

std::array<Complex, 2> reduce2(const SpectralVector& v, std::size_t flat, const Vec3& ea,
                               const Vec3& eb) {
    const Complex vx = v.x[flat], vy = v.y[flat], vz = v.z[flat];
    return {ea[0] * vx + ea[1] * vy + ea[2] * vz, eb[0] * vx + eb[1] * vy + eb[2] * vz};
}

void embed2(SpectralVector& v, std::size_t flat, std::size_t conj_flat, const Vec3& ea,
            const Vec3& eb, const Complex& a, const Complex& b) {
    const Complex x = a * ea[0] + b * eb[0];
    const Complex y = a * ea[1] + b * eb[1];
    const Complex z = a * ea[2] + b * eb[2];
    v.x[flat] = x;
    v.y[flat] = y;
    v.z[flat] = z;
    v.x[conj_flat] = std::conj(x);
    v.y[conj_flat] = std::conj(y);
    v.z[conj_flat] = std::conj(z);
}

void check_finite(double value, double threshold, std::size_t step, const char* system) {
    if (!std::isfinite(value) || value > threshold)
        throw BlowUpError(std::string(system) + ": blow-up detected at step " +
                              std::to_string(step) + " (norm " + std::to_string(value) + ")",
                          step, 0);
}

}  // namespace

// ---------------------------------------------------------------------------
// LimitStepper
// ---------------------------------------------------------------------------

LimitStepper::LimitStepper(GridPtr grid, const PhysParams& p, const StepConfig& cfg)
    : grid_(std::move(grid)), p_(p), cfg_(cfg), ws_(grid_) {
    p_.validate();
    cfg_.validate();
    decay_.assign(grid_->size(), 0.0);
    mu_.assign(grid_->size(), Vec3{0, 0, 0});
    for (std::size_t flat : grid_->active_modes()) {
        const Wavevector k = grid_->wavevector(flat);
        decay_[flat] = std::exp(-p_.kappa * norm2(k) * cfg_.dt);
        mu_[flat] = symbol_Mu(k, p_);
    }
}

SpectralVector LimitStepper::velocity(const SpectralScalar& theta) const {
    SpectralVector u(grid_);
    for (std::size_t flat : grid_->active_modes()) {
        const Vec3& m = mu_[flat];
        const Complex th = theta[flat];
        u.x[flat] = m[0] * th;
        u.y[flat] = m[1] * th;
        u.z[flat] = m[2] * th;
    }
    u.solenoidal = true;
    return u;
}

void LimitStepper::step(LimitState& s, const SpectralScalar& dW) {
    last_noise_ip_ = inner_l2(dW, s.theta);
    SpectralScalar rhs = s.theta;
    if (cfg_.advection) {
        const SpectralVector u = velocity(s.theta);
        const SpectralScalar adv = advect(u, s.theta, ws_);
        rhs.axpy(-cfg_.dt, adv);
    }
    rhs += dW;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= decay_[i];
    s.theta = std::move(rhs);
    s.time += cfg_.dt;
    ++steps_;
    check_finite(norm_l2(s.theta), cfg_.blowup_threshold, steps_, "limit");
}

void LimitStepper::step_deterministic(LimitState& s) {
    const SpectralScalar zero(grid_);
    step(s, zero);
}

void LimitStepper::step_linearized(SpectralScalar& zeta, const SpectralScalar& theta,
                                   const SpectralScalar* extra_source) {
    const SpectralVector u_theta = velocity(theta);
    const SpectralVector u_zeta = velocity(zeta);
    SpectralScalar rhs = zeta;
    SpectralScalar adv = advect(u_zeta, theta, ws_);
    rhs.axpy(-cfg_.dt, adv);
    adv = advect(u_theta, zeta, ws_);
    rhs.axpy(-cfg_.dt, adv);
    if (extra_source) rhs.axpy(cfg_.dt, *extra_source);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= decay_[i];
    zeta = std::move(rhs);
}

// ---------------------------------------------------------------------------
// FullStepper
// ---------------------------------------------------------------------------

struct FullStepper::ModeTables {
    std::vector<std::size_t> flat, conj;
    std::vector<Vec3> ea, eb;
    std::vector<Mat5Flat> prop;  // exp(dt L_k)
};

FullStepper::FullStepper(GridPtr grid, const PhysParams& p, const StepConfig& cfg)
    : grid_(std::move(grid)), p_(p), cfg_(cfg), ws_(grid_), tables_(new ModeTables) {
    p_.validate();
    cfg_.validate();
    const Vec3 om = p_.omega_hat();
    for (std::size_t flat : grid_->half_modes()) {
        const Wavevector k = grid_->wavevector(flat);
        const double k2 = norm2(k);
        Vec3 ea, eb;
        mode_basis(k, ea, eb);
        const double w = dot(ea, cross(om, eb));
        const Complex ic{0.0, dot(p_.b0_hat, k)};

        Mat5 L = Mat5::Zero();
        // velocity rows: u' = (1/eps)(-A_k u + i(b0.k) b + P_k e3 Theta)
        L(0, 0) = -p_.nu * k2 / p_.eps;
        L(0, 1) = -w / p_.eps;
        L(1, 0) = w / p_.eps;
        L(1, 1) = -p_.nu * k2 / p_.eps;
        L(0, 2) = ic / p_.eps;
        L(1, 3) = ic / p_.eps;
        L(0, 4) = ea[2] / p_.eps;
        L(1, 4) = eb[2] / p_.eps;
        // magnetic rows: b' = (1/delta)(i(b0.k) u - |k|^2 b)
        L(2, 0) = ic / p_.delta;
        L(3, 1) = ic / p_.delta;
        L(2, 2) = -k2 / p_.delta;
        L(3, 3) = -k2 / p_.delta;
        // temperature row
        L(4, 4) = -p_.kappa * k2;

        tables_->flat.push_back(flat);
        tables_->conj.push_back(grid_->conjugate_index(flat));
        tables_->ea.push_back(ea);
        tables_->eb.push_back(eb);
        tables_->prop.push_back(flatten((cfg_.dt * L).exp()));
    }
}

FullStepper::~FullStepper() = default;

void FullStepper::step(FullState& s, const SpectralScalar& dW) {
    last_noise_ip_ = inner_l2(dW, s.Theta);

    SpectralVector nl_u, nl_b;
    SpectralScalar nl_th;
    const bool adv = cfg_.advection;
    if (adv) {
        // eps(U_t + U.grad U) = ... + delta B.grad B: after dividing by eps
        // the inertial term is O(1) and the Lorentz term carries delta/eps.
        SpectralVector acc = advect(s.U, s.U, ws_);
        acc *= -1.0;
        acc.axpy(p_.delta / p_.eps, advect(s.B, s.B, ws_));
        nl_u = leray_project(acc);

        SpectralVector mag = advect(s.U, s.B, ws_);
        mag *= -1.0;
        mag += advect(s.B, s.U, ws_);
        nl_b = leray_project(mag);

        nl_th = advect(s.U, s.Theta, ws_);
        nl_th *= -1.0;
    }

    const ModeTables& t = *tables_;
    for (std::size_t m = 0; m < t.flat.size(); ++m) {
        const std::size_t f = t.flat[m];
        const Vec3& ea = t.ea[m];
        const Vec3& eb = t.eb[m];
        const auto u = reduce2(s.U, f, ea, eb);
        const auto b = reduce2(s.B, f, ea, eb);
        CVec5 x{u[0], u[1], b[0], b[1], s.Theta[f]};
        if (adv) {
            const auto nu2 = reduce2(nl_u, f, ea, eb);
            const auto nb2 = reduce2(nl_b, f, ea, eb);
            x[0] += cfg_.dt * nu2[0];
            x[1] += cfg_.dt * nu2[1];
            x[2] += cfg_.dt * nb2[0];
            x[3] += cfg_.dt * nb2[1];
            x[4] += cfg_.dt * nl_th[f];
        }
        x[4] += dW[f];
        const CVec5 y = matvec(t.prop[m], x);
        embed2(s.U, f, t.conj[m], ea, eb, y[0], y[1]);
        embed2(s.B, f, t.conj[m], ea, eb, y[2], y[3]);
        s.Theta[f] = y[4];
        s.Theta[t.conj[m]] = std::conj(y[4]);
    }
    s.U.solenoidal = true;
    s.B.solenoidal = true;
    s.time += cfg_.dt;
    ++steps_;
    check_finite(norm_l2(s.U) + norm_l2(s.B) + norm_l2(s.Theta), cfg_.blowup_threshold, steps_,
                 "full");
}

void FullStepper::step_deterministic(FullState& s) {
    const SpectralScalar zero(grid_);
    step(s, zero);
}

// ---------------------------------------------------------------------------
// CorrectorStepper
// ---------------------------------------------------------------------------

struct CorrectorStepper::Tables {
    std::vector<std::size_t> flat, conj;
    std::vector<Vec3> ea, eb;
    std::vector<std::array<double, 4>> layer_prop;  // exp(-dt Q_k/eps), 2x2 real
    std::vector<Mat5Flat> prop2;                    // stage-two propagator
    std::vector<double> theta_decay;                // e^{-kappa |k|^2 dt}
};

CorrectorStepper::CorrectorStepper(GridPtr grid, const PhysParams& p, const StepConfig& cfg)
    : grid_(std::move(grid)), p_(p), cfg_(cfg), ws_(grid_), tables_(new Tables) {
    p_.validate();
    cfg_.validate();
    const Vec3 om = p_.omega_hat();
    tables_->theta_decay.assign(grid_->size(), 0.0);
    for (std::size_t flat : grid_->active_modes())
        tables_->theta_decay[flat] = std::exp(-p_.kappa * norm2(grid_->wavevector(flat)) * cfg_.dt);

    for (std::size_t flat : grid_->half_modes()) {
        const Wavevector k = grid_->wavevector(flat);
        const double k2 = norm2(k);
        Vec3 ea, eb;
        mode_basis(k, ea, eb);
        const double w = dot(ea, cross(om, eb));
        const double c = dot(p_.b0_hat, k);
        const double sq = p_.nu * k2 + c * c / k2;  // Q_k = sq I + rotation(w)

        Eigen::Matrix2d Q;
        Q << sq, w, -w, sq;
        const Eigen::Matrix2d Eq = (-cfg_.dt / p_.eps * Q).exp();

        Mat5 L = Mat5::Zero();
        const Complex ic{0.0, c};
        L(0, 0) = -sq / p_.eps;
        L(0, 1) = -w / p_.eps;
        L(1, 0) = w / p_.eps;
        L(1, 1) = -sq / p_.eps;
        L(0, 2) = ic / p_.eps;
        L(1, 3) = ic / p_.eps;
        L(0, 4) = ea[2] / p_.eps;
        L(1, 4) = eb[2] / p_.eps;
        L(2, 2) = -k2 / p_.delta;
        L(3, 3) = -k2 / p_.delta;
        L(4, 4) = -p_.kappa * k2;

        tables_->flat.push_back(flat);
        tables_->conj.push_back(grid_->conjugate_index(flat));
        tables_->ea.push_back(ea);
        tables_->eb.push_back(eb);
        tables_->layer_prop.push_back({Eq(0, 0), Eq(0, 1), Eq(1, 0), Eq(1, 1)});
        tables_->prop2.push_back(flatten((cfg_.dt * L).exp()));
    }
}

CorrectorStepper::~CorrectorStepper() = default;

CorrectorOneState CorrectorStepper::init_stage_one(const SpectralVector& U0,
                                                   const SpectralScalar& Theta0) const {
    CorrectorOneState s;
    s.theta = Theta0;
    s.layer_u = U0;
    s.layer_u -= apply_Q_inverse_drive(Theta0, p_);
    s.layer_u.solenoidal = true;
    s.time = 0.0;
    return s;
}

CorrectorTwoState CorrectorStepper::init_stage_two(const SpectralVector& U0,
                                                   const SpectralVector& B0,
                                                   const SpectralScalar& Theta0) const {
    CorrectorTwoState s;
    s.stage1 = init_stage_one(U0, Theta0);
    s.u2 = U0;
    s.theta2 = Theta0;
    s.layer_b = B0;
    for (std::size_t flat : grid_->active_modes()) {
        const Wavevector k = grid_->wavevector(flat);
        const Complex f{0.0, dot(p_.b0_hat, k) / norm2(k)};
        s.layer_b.x[flat] -= f * U0.x[flat];
        s.layer_b.y[flat] -= f * U0.y[flat];
        s.layer_b.z[flat] -= f * U0.z[flat];
    }
    s.layer_b.solenoidal = true;
    s.time = 0.0;
    return s;
}

SpectralVector CorrectorStepper::stage_one_velocity(const CorrectorOneState& s) const {
    SpectralVector u = apply_Q_inverse_drive(s.theta, p_);
    u += s.layer_u;
    u.solenoidal = true;
    return u;
}

SpectralVector CorrectorStepper::stage_two_magnetic(const CorrectorTwoState& s) const {
    SpectralVector b = s.layer_b;
    for (std::size_t flat : grid_->active_modes()) {
        const Wavevector k = grid_->wavevector(flat);
        const Complex f{0.0, dot(p_.b0_hat, k) / norm2(k)};
        b.x[flat] += f * s.u2.x[flat];
        b.y[flat] += f * s.u2.y[flat];
        b.z[flat] += f * s.u2.z[flat];
    }
    b.solenoidal = true;
    return b;
}

void CorrectorStepper::step_stage_one(CorrectorOneState& s, const SpectralScalar& dW) {
    SpectralScalar rhs = s.theta;
    if (cfg_.advection) {
        const SpectralVector u = stage_one_velocity(s);
        const SpectralScalar adv = advect(u, s.theta, ws_);
        rhs.axpy(-cfg_.dt, adv);
    }
    rhs += dW;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= tables_->theta_decay[i];
    s.theta = std::move(rhs);

    const Tables& t = *tables_;
    for (std::size_t m = 0; m < t.flat.size(); ++m) {
        const std::size_t f = t.flat[m];
        const auto l = reduce2(s.layer_u, f, t.ea[m], t.eb[m]);
        const auto& e = t.layer_prop[m];
        embed2(s.layer_u, f, t.conj[m], t.ea[m], t.eb[m], e[0] * l[0] + e[1] * l[1],
               e[2] * l[0] + e[3] * l[1]);
    }
    s.time += cfg_.dt;
}

void CorrectorStepper::step_stage_two(CorrectorTwoState& s, const SpectralScalar& dW) {
    SpectralVector nl_u(grid_);
    SpectralScalar nl_th(grid_);
    if (cfg_.advection) {
        const SpectralVector u_eps = stage_one_velocity(s.stage1);
        SpectralVector adv_u = advect(u_eps, s.u2, ws_);
        adv_u *= -1.0;
        nl_u = leray_project(adv_u);
        nl_th = advect(s.u2, s.theta2, ws_);
        nl_th *= -1.0;
    }

    const Tables& t = *tables_;
    for (std::size_t m = 0; m < t.flat.size(); ++m) {
        const std::size_t f = t.flat[m];
        const Vec3& ea = t.ea[m];
        const Vec3& eb = t.eb[m];
        const auto u = reduce2(s.u2, f, ea, eb);
        const auto lb = reduce2(s.layer_b, f, ea, eb);
        CVec5 x{u[0], u[1], lb[0], lb[1], s.theta2[f]};
        if (cfg_.advection) {
            const auto nu2 = reduce2(nl_u, f, ea, eb);
            x[0] += cfg_.dt * nu2[0];
            x[1] += cfg_.dt * nu2[1];
            x[4] += cfg_.dt * nl_th[f];
        }
        x[4] += dW[f];
        const CVec5 y = matvec(t.prop2[m], x);
        embed2(s.u2, f, t.conj[m], ea, eb, y[0], y[1]);
        embed2(s.layer_b, f, t.conj[m], ea, eb, y[2], y[3]);
        s.theta2[f] = y[4];
        s.theta2[t.conj[m]] = std::conj(y[4]);
    }

    step_stage_one(s.stage1, dW);
    s.time += cfg_.dt;
}

}  // namespace msmhd
