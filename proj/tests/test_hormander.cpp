#include <cmath>
#include <random>

#include "doctest.h"
#include "msmhd/hormander.hpp"
#include "test_support.hpp"

using namespace msmhd;

namespace {
const double kPi = 3.14159265358979323846;

PhysParams default_params() { return make_params(1.0, 1.0, 0.1, 1.0, kPi / 4, {0, 0, 1}); }

std::vector<FrequencyDirection> standing_seeds() {
    std::vector<FrequencyDirection> seeds;
    for (int axis = 0; axis < 3; ++axis) {
        Wavevector e{0, 0, 0};
        e[axis] = 1;
        seeds.push_back({e, 0});
        seeds.push_back({e, 1});
    }
    return seeds;
}

double mu_dot(const Wavevector& k, const Wavevector& j, const PhysParams& p) {
    const Vec3 mu = symbol_Mu(k, p);
    return mu[0] * j[0] + mu[1] * j[1] + mu[2] * j[2];
}

/// Drift F(theta) = -kappa Lap theta + M_u(theta).grad theta, pseudo-spectral.
SpectralScalar drift(const SpectralScalar& theta, const PhysParams& p, SpectralWorkspace& ws) {
    SpectralVector u, b;
    apply_constitutive(theta, p, u, b);
    SpectralScalar f = advect(u, theta, ws);
    const Grid& g = *theta.grid();
    for (std::size_t flat : g.active_modes())
        f[flat] += p.kappa * double(norm2(g.wavevector(flat))) * theta[flat];
    return f;
}

/// Numerical Lie bracket by the second mixed central difference of the
/// drift; exact for the quadratic nonlinearity up to roundoff.
SpectralScalar fd_bracket(const Wavevector& k, int m, const Wavevector& j, int m2,
                          const PhysParams& p, const GridPtr& g, SpectralWorkspace& ws) {
    const double a = 0.5, b = 0.5;
    const SpectralScalar sk = test::single_mode(g, k, m);
    const SpectralScalar sj = test::single_mode(g, j, m2);
    auto eval = [&](double ca, double cb) {
        SpectralScalar th(g);
        th.axpy(ca, sk);
        th.axpy(cb, sj);
        return drift(th, p, ws);
    };
    SpectralScalar acc = eval(a, b);
    acc -= eval(a, -b);
    acc -= eval(-a, b);
    SpectralScalar last = eval(-a, -b);
    acc += last;
    acc *= 1.0 / (4.0 * a * b);
    return acc;
}

double coefficient_of(const SpectralScalar& f, const FrequencyDirection& d) {
    const Complex c = f.at(d.k);
    return d.parity == 0 ? 2.0 * c.real() : -2.0 * c.imag();
}
}  // namespace

TEST_CASE("bracket_pair matches the hand-expanded m = m2 = 0 case") {
    auto p = default_params();
    const Wavevector k{1, 2, -1}, j{0, 1, 1};
    const auto terms = bracket_pair(k, 0, j, 0, p);
    REQUIRE(terms.size() == 2);
    const double mkj = mu_dot(k, j, p), mjk = mu_dot(j, k, p);
    for (const auto& t : terms) {
        CHECK(t.dir.parity == 1);
        if (t.dir.k == Wavevector{1, 3, 0}) {
            CHECK(t.coeff == doctest::Approx(-0.5 * (mkj + mjk)).epsilon(1e-14));
        } else {
            REQUIRE(t.dir.k == Wavevector{1, 1, -2});
            CHECK(t.coeff == doctest::Approx(0.5 * (mkj - mjk)).epsilon(1e-14));
        }
    }
}

TEST_CASE("bracket_pair drops the zero frequency for k = j") {
    auto p = default_params();
    const Wavevector k{1, 1, 0};
    const auto terms = bracket_pair(k, 0, k, 0, p);
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].dir.k == Wavevector{2, 2, 0});
    CHECK(terms[0].dir.parity == 1);
}

TEST_CASE("canonicalization flips the sine sign under frequency negation") {
    const auto cosine = canonical_term({-1, 2, 0}, 0, 3.0);
    REQUIRE(cosine.has_value());
    CHECK(cosine->dir.k == Wavevector{1, -2, 0});
    CHECK(cosine->coeff == 3.0);
    const auto sine = canonical_term({-1, 2, 0}, 1, 3.0);
    CHECK(sine->coeff == -3.0);
    CHECK_FALSE(canonical_term({0, 0, 0}, 0, 1.0).has_value());
}

TEST_CASE("symbolic brackets match the finite-difference drift oracle") {
    auto p = default_params();
    auto g = make_grid(32);
    SpectralWorkspace ws(g);
    std::mt19937 rng(2718);
    std::uniform_int_distribution<int> pick(-4, 4);
    std::uniform_int_distribution<int> par(0, 1);

    int tested = 0;
    while (tested < 15) {
        const Wavevector k{pick(rng), pick(rng), pick(rng)};
        const Wavevector j{pick(rng), pick(rng), pick(rng)};
        if ((k[0] == 0 && k[1] == 0 && k[2] == 0) || (j[0] == 0 && j[1] == 0 && j[2] == 0))
            continue;
        if (norm2(k) > 16 || norm2(j) > 16) continue;
        const int m = par(rng), m2 = par(rng);
        // the symbolic expansion assumes the canonical representatives that
        // label basis directions
        if (!is_canonical_halfspace(k) || !is_canonical_halfspace(j)) continue;
        ++tested;

        const SpectralScalar fd = fd_bracket(k, m, j, m2, p, g, ws);
        const auto terms = bracket_pair(k, m, j, m2, p);

        double scale = 0.0;
        for (const auto& t : terms) scale = std::max(scale, std::abs(t.coeff));
        for (const auto& t : terms) {
            const double got = coefficient_of(fd, t.dir);
            CHECK(std::abs(got - t.coeff) <= 1e-6 * std::max(1.0, scale));
        }
        // and the oracle is supported only on the sum/difference frequencies
        SpectralScalar residual = fd;
        for (const auto& t : terms) {
            const Complex c = t.dir.parity == 0 ? Complex{0.5 * t.coeff, 0.0}
                                                : Complex{0.0, -0.5 * t.coeff};
            residual.at(t.dir.k) -= c;
            residual.at({-t.dir.k[0], -t.dir.k[1], -t.dir.k[2]}) -= std::conj(c);
        }
        CHECK(norm_l2(residual) <= 1e-6 * std::max(1.0, scale));
    }
}

TEST_CASE("new_direction_condition: e3 seed cases from the lemma") {
    auto p = default_params();
    const Wavevector e3{0, 0, 1};
    CHECK(new_direction_condition({1, 0, 5}, e3, p, 1e-9).verdict == ConditionVerdict::Holds);
    CHECK(new_direction_condition({0, 0, 5}, e3, p, 1e-9).verdict == ConditionVerdict::Fails);
}

TEST_CASE("new_direction_condition: axis recovery sign rule for e1") {
    // with b0 = e3 any k1 sign admits; also exercise a tilted b0
    for (const Vec3 b0 : {Vec3{0, 0, 1}, Vec3{0.6, 0, 0.8}}) {
        auto p = make_params(1.0, 1.0, 0.1, 1.0, kPi / 4, b0);
        for (int l = -6; l <= 6; ++l) {
            if (l == 0) continue;
            int k1 = 1;
            if (p.b0_hat[0] != 0.0 && p.b0_hat[2] != 0.0)
                k1 = (l * p.b0_hat[2] * p.b0_hat[0] > 0) ? 1 : -1;
            const auto ev = new_direction_condition({k1, 0, l}, {1, 0, 0}, p, 1e-9);
            CHECK(ev.verdict == ConditionVerdict::Holds);
        }
    }
}

TEST_CASE("specialized conditions agree with the generic evaluation on |k| <= 8") {
    // new_direction_condition throws on disagreement, so the scan itself is
    // the assertion
    auto p = default_params();
    auto p2 = make_params(1.0, 1.0, 0.3, 1.0, 1.1, {0.48, 0.6, 0.64});
    for (const auto& params : {p, p2}) {
        for (int axis = 0; axis < 3; ++axis) {
            Wavevector j{0, 0, 0};
            j[axis] = 1;
            for (int a = -8; a <= 8; ++a)
                for (int b = -8; b <= 8; ++b)
                    for (int c = -8; c <= 8; ++c) {
                        if (a == 0 && b == 0 && c == 0) continue;
                        CHECK_NOTHROW(new_direction_condition({a, b, c}, j, params, 1e-9));
                    }
        }
    }
}

TEST_CASE("span_closure covers H_3 from the standing-hypothesis seeds") {
    auto p = default_params();
    const SpanReport rep = span_closure(standing_seeds(), 3, p, 1e-9, 32);
    CHECK(rep.covered);
    CHECK(rep.n_of_N >= 1);
    CHECK(rep.certificate.size() > 0);
    CHECK(replay_certificate(rep, p, 1e-9));
    CHECK(rep.missing.empty());
}

TEST_CASE("span_closure: degenerate e3 seed generates nothing") {
    auto p = default_params();
    std::vector<FrequencyDirection> seeds{{{0, 0, 1}, 0}, {{0, 0, 1}, 1}};
    const SpanReport rep = span_closure(seeds, 1, p, 1e-9, 64);
    CHECK_FALSE(rep.covered);
    CHECK(rep.missing.size() > 0);
    CHECK(rep.certificate.empty());  // M_u(e3) = 0 kills every bracket
}

TEST_CASE("span_closure: full seeds already span H_1 at generation zero") {
    auto p = default_params();
    const SpanReport rep = span_closure(standing_seeds(), 1, p, 1e-9, 8);
    CHECK(rep.covered);
    CHECK(rep.n_of_N == 0);
}

TEST_CASE("span_closure input validation") {
    auto p = default_params();
    CHECK_THROWS_AS(span_closure({}, 1, p, 1e-9, 4), std::invalid_argument);
    CHECK_THROWS_AS(span_closure(standing_seeds(), 0, p, 1e-9, 4), std::invalid_argument);
}

TEST_CASE("constructive_path reproduces the proof route") {
    auto p = default_params();
    for (int N : {1, 2, 3}) {
        const SpanReport rep = constructive_path(N, p, 1e-9);
        CHECK(rep.covered);
        CHECK(rep.far_plane_K > N);
        CHECK(replay_certificate(rep, p, 1e-9));

        const SpanReport bfs = span_closure(standing_seeds(), N, p, 1e-9, 32);
        CHECK(bfs.covered == rep.covered);
    }
}
