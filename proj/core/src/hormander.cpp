#include "msmhd/hormander.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace msmhd {

namespace {

Wavevector neg(const Wavevector& k) { return {-k[0], -k[1], -k[2]}; }
Wavevector add(const Wavevector& a, const Wavevector& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
Wavevector sub(const Wavevector& a, const Wavevector& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
bool is_zero(const Wavevector& k) { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

double mu_dot(const Wavevector& k, const Wavevector& j, const PhysParams& p) {
    const Vec3 mu = symbol_Mu(k, p);
    return mu[0] * j[0] + mu[1] * j[1] + mu[2] * j[2];
}

int axis_of(const Wavevector& j) {
    for (int i = 0; i < 3; ++i) {
        Wavevector e{0, 0, 0};
        e[i] = 1;
        if (j == e) return i;
    }
    return -1;
}

ConditionVerdict verdict_of(double lhs, double rhs, double tol) {
    if (lhs == rhs) return ConditionVerdict::Fails;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (scale == 0.0) return ConditionVerdict::Fails;
    const double margin = std::abs(lhs - rhs) / scale;
    if (margin <= tol) return ConditionVerdict::NearDegenerate;
    return ConditionVerdict::Holds;
}

/// Closed forms of the e1/e2/e3 step conditions, as (lhs, rhs) whose
/// inequality is equivalent to the generic one.
std::pair<double, double> specialized_condition(const Wavevector& k, int axis,
                                                const PhysParams& p) {
    const double k2 = norm2(k);
    const Vec3 om = p.omega_hat();
    const double ok = dot(om, k);
    const double bk = dot(p.b0_hat, k);
    const double a = bk * bk + p.nu * k2 * k2;
    const double D = k2 * ok * ok + a * a;
    switch (axis) {
        case 0: {
            const double lhs = std::abs(k[1] * ok * k2 + k[0] * k[2] * a);
            const double rhs = std::abs(double(k[2])) * D / (p.nu + p.b0_hat[0] * p.b0_hat[0]);
            return {lhs, rhs};
        }
        case 1: {
            const double lhs = std::abs(-k[0] * ok * k2 + k[1] * k[2] * a);
            const double nb = p.nu + p.b0_hat[1] * p.b0_hat[1];
            const double rhs = D / (nb * nb + om[1] * om[1]) * std::abs(nb * k[2] - om[1] * k[0]);
            return {lhs, rhs};
        }
        case 2: {
            const double lhs = double(k[0]) * k[0] + double(k[1]) * k[1];
            return {lhs, 0.0};
        }
        default:
            throw std::logic_error("specialized_condition: bad axis");
    }
}

}  // namespace

std::optional<BracketTerm> canonical_term(const Wavevector& k, int parity, double coeff) {
    if (is_zero(k)) return std::nullopt;
    BracketTerm t;
    t.dir.parity = parity & 1;
    if (is_canonical_halfspace(k)) {
        t.dir.k = k;
        t.coeff = coeff;
    } else {
        t.dir.k = neg(k);
        t.coeff = (t.dir.parity == 1) ? -coeff : coeff;  // sin(-x) = -sin(x)
    }
    return t;
}

std::vector<BracketTerm> bracket_pair(const Wavevector& k, int m, const Wavevector& j, int m2,
                                      const PhysParams& p) {
    if (is_zero(k) || is_zero(j)) throw std::invalid_argument("bracket_pair: zero frequency");
    const double mk_j = mu_dot(k, j, p);
    const double mj_k = mu_dot(j, k, p);
    const int out_parity = (m + m2 + 1) & 1;
    const double sign_plus = ((m + 1) * (m2 + 1)) % 2 == 0 ? 1.0 : -1.0;
    const double sign_minus = (m * (m2 + 1)) % 2 == 0 ? 1.0 : -1.0;

    std::vector<BracketTerm> out;
    if (auto t = canonical_term(add(k, j), out_parity, 0.5 * sign_plus * (mk_j + mj_k)))
        out.push_back(*t);
    if (auto t = canonical_term(sub(k, j), out_parity, 0.5 * sign_minus * (mk_j - mj_k)))
        out.push_back(*t);
    return out;
}

ConditionEval new_direction_condition(const Wavevector& k, const Wavevector& j,
                                      const PhysParams& p, double tol) {
    if (is_zero(k) || is_zero(j))
        throw std::invalid_argument("new_direction_condition: zero frequency");
    ConditionEval ev;
    ev.lhs = std::abs(mu_dot(k, j, p));
    ev.rhs = std::abs(mu_dot(j, k, p));
    ev.verdict = verdict_of(ev.lhs, ev.rhs, tol);
    const double scale = std::max(ev.lhs, ev.rhs);
    ev.margin = scale > 0.0 ? std::abs(ev.lhs - ev.rhs) / scale : 0.0;

    const int axis = axis_of(j);
    if (axis >= 0) {
        const auto [slhs, srhs] = specialized_condition(k, axis, p);
        const ConditionVerdict sv = verdict_of(slhs, srhs, tol);
        const bool either_near = sv == ConditionVerdict::NearDegenerate ||
                                 ev.verdict == ConditionVerdict::NearDegenerate;
        if (!either_near && sv != ev.verdict)
            throw std::runtime_error(
                "new_direction_condition: specialized and generic evaluations disagree at k = (" +
                std::to_string(k[0]) + "," + std::to_string(k[1]) + "," + std::to_string(k[2]) +
                "), axis " + std::to_string(axis));
        if (either_near && ev.verdict == ConditionVerdict::Holds)
            ev.verdict = ConditionVerdict::NearDegenerate;
    }
    return ev;
}

// ---------------------------------------------------------------------------
// span_closure
// ---------------------------------------------------------------------------

namespace {

using DirSet = std::map<Wavevector, int>;  // canonical frequency -> parity bitmask

bool insert_dir(DirSet& set, const FrequencyDirection& d) {
    int& mask = set[d.k];
    const int bit = 1 << d.parity;
    if (mask & bit) return false;
    mask |= bit;
    return true;
}

std::vector<Wavevector> ball_frequencies(int N) {
    std::vector<Wavevector> out;
    for (int a = -N; a <= N; ++a)
        for (int b = -N; b <= N; ++b)
            for (int c = -N; c <= N; ++c) {
                const Wavevector k{a, b, c};
                if (is_zero(k) || norm2(k) > N * N) continue;
                if (is_canonical_halfspace(k)) out.push_back(k);
            }
    return out;
}

std::vector<FrequencyDirection> missing_directions(const DirSet& set, int N) {
    std::vector<FrequencyDirection> out;
    for (const Wavevector& k : ball_frequencies(N)) {
        const auto it = set.find(k);
        const int mask = it == set.end() ? 0 : it->second;
        for (int par = 0; par < 2; ++par)
            if (!(mask & (1 << par))) out.push_back({k, par});
    }
    return out;
}

}  // namespace

SpanReport span_closure(const std::vector<FrequencyDirection>& seeds, int N, const PhysParams& p,
                        double tol, int n_max) {
    if (seeds.empty()) throw std::invalid_argument("span_closure: seeds must be nonempty");
    if (N < 1) throw std::invalid_argument("span_closure: N >= 1 required");

    SpanReport report;
    report.N = N;

    DirSet known;
    for (const auto& s : seeds) {
        if (is_zero(s.k)) throw std::invalid_argument("span_closure: zero seed frequency");
        insert_dir(known, canonical_term(s.k, s.parity, 1.0)->dir);
    }

    // only frequencies holding both parities can act as bracket inputs
    std::vector<Wavevector> seed_freqs;
    for (const auto& [k, mask] : known)
        if (mask == 3) seed_freqs.push_back(k);

    std::vector<Wavevector> frontier = seed_freqs;

    auto covered = [&]() { return missing_directions(known, N).empty(); };

    if (covered()) {
        report.covered = true;
        report.n_of_N = 0;
        report.directions_known = known.size();
        return report;
    }

    for (int gen = 1; gen <= n_max; ++gen) {
        std::vector<Wavevector> next_frontier;
        for (const Wavevector& k : frontier) {
            for (const Wavevector& j : seed_freqs) {
                CertificateStep step;
                step.parent = k;
                step.seed = j;
                step.generation = gen;

                if (k == j) {
                    // only the 2k output survives; admissible iff the common
                    // coefficient M_u(k).k clears the degeneracy floor
                    const double c = mu_dot(k, k, p);
                    const Vec3 mu = symbol_Mu(k, p);
                    const double scale = std::sqrt(dot(mu, mu)) * std::sqrt(double(norm2(k)));
                    step.self_bracket = true;
                    step.lhs = std::abs(c);
                    step.rhs = 0.0;
                    step.margin = scale > 0.0 ? std::abs(c) / scale : 0.0;
                    if (c == 0.0 || scale == 0.0) continue;
                    if (step.margin <= tol) {
                        report.near_degenerate.push_back({k, j, step.lhs, 0.0, step.margin});
                        continue;
                    }
                    const Wavevector kk = add(k, k);
                    bool fresh = false;
                    for (int par = 0; par < 2; ++par)
                        if (insert_dir(known, canonical_term(kk, par, 1.0)->dir)) {
                            step.produced.push_back(canonical_term(kk, par, 1.0)->dir);
                            fresh = true;
                        }
                    if (fresh) {
                        next_frontier.push_back(canonical_term(kk, 0, 1.0)->dir.k);
                        report.certificate.push_back(std::move(step));
                    }
                    continue;
                }

                const ConditionEval ev = new_direction_condition(k, j, p, tol);
                step.lhs = ev.lhs;
                step.rhs = ev.rhs;
                step.margin = ev.margin;
                if (ev.verdict == ConditionVerdict::NearDegenerate) {
                    report.near_degenerate.push_back({k, j, ev.lhs, ev.rhs, ev.margin});
                    continue;
                }
                if (ev.verdict != ConditionVerdict::Holds) continue;

                bool fresh = false;
                for (const Wavevector& out : {add(k, j), sub(k, j)}) {
                    if (is_zero(out)) continue;
                    const Wavevector canon = is_canonical_halfspace(out) ? out : neg(out);
                    bool added = false;
                    for (int par = 0; par < 2; ++par)
                        if (insert_dir(known, {canon, par})) {
                            step.produced.push_back({canon, par});
                            added = true;
                        }
                    if (added) {
                        next_frontier.push_back(canon);
                        fresh = true;
                    }
                }
                if (fresh) report.certificate.push_back(std::move(step));
            }
        }

        if (covered()) {
            report.covered = true;
            report.n_of_N = gen;
            report.directions_known = known.size();
            return report;
        }
        if (next_frontier.empty()) {
            report.failure_reason = "closure saturated without covering H_N";
            break;
        }
        frontier = std::move(next_frontier);
    }

    report.covered = false;
    report.directions_known = known.size();
    report.missing = missing_directions(known, N);
    if (report.failure_reason.empty())
        report.failure_reason = "generation cap n_max reached before covering H_N";
    return report;
}

// ---------------------------------------------------------------------------
// constructive_path
// ---------------------------------------------------------------------------

namespace {

const Wavevector kE1{1, 0, 0};
const Wavevector kE2{0, 1, 0};
const Wavevector kE3{0, 0, 1};

struct PathBuilder {
    const PhysParams& p;
    double tol;
    SpanReport& report;
    DirSet known;
    std::map<Wavevector, int> generation;  // canonical frequency -> chain depth

    bool step(const Wavevector& parent, const Wavevector& seed, const Wavevector& produced) {
        const ConditionEval ev = new_direction_condition(parent, seed, p, tol);
        CertificateStep s;
        s.parent = parent;
        s.seed = seed;
        s.lhs = ev.lhs;
        s.rhs = ev.rhs;
        s.margin = ev.margin;
        if (ev.verdict == ConditionVerdict::NearDegenerate)
            report.near_degenerate.push_back({parent, seed, ev.lhs, ev.rhs, ev.margin});
        if (ev.verdict != ConditionVerdict::Holds) {
            report.failure_reason = "step condition violated at parent (" +
                                    std::to_string(parent[0]) + "," + std::to_string(parent[1]) +
                                    "," + std::to_string(parent[2]) + ") with seed axis " +
                                    std::to_string(axis_of(seed));
            return false;
        }
        const Wavevector pc = is_canonical_halfspace(parent) ? parent : neg(parent);
        const int gen = generation.count(pc) ? generation.at(pc) + 1 : 1;
        s.generation = gen;
        const Wavevector canon = is_canonical_halfspace(produced) ? produced : neg(produced);
        bool fresh = false;
        for (int par = 0; par < 2; ++par)
            if (insert_dir(known, {canon, par})) {
                s.produced.push_back({canon, par});
                fresh = true;
            }
        if (fresh) {
            auto it = generation.find(canon);
            if (it == generation.end() || it->second > gen) generation[canon] = gen;
            report.certificate.push_back(std::move(s));
        }
        return true;
    }
};

}  // namespace

SpanReport constructive_path(int N, const PhysParams& p, double tol, int k3_cap) {
    if (N < 1) throw std::invalid_argument("constructive_path: N >= 1 required");
    SpanReport report;
    report.N = N;

    // smallest K whose plane k3 = K admits every e1/e2 step over the box
    int K = -1;
    for (int cand = N + 1; cand <= k3_cap; ++cand) {
        bool ok = true;
        for (int a = -N; a <= N && ok; ++a)
            for (int b = -N; b <= N && ok; ++b) {
                const Wavevector k{a, b, cand};
                if (new_direction_condition(k, kE1, p, tol).verdict != ConditionVerdict::Holds ||
                    new_direction_condition(k, kE2, p, tol).verdict != ConditionVerdict::Holds)
                    ok = false;
            }
        if (ok) {
            K = cand;
            break;
        }
    }
    if (K < 0) {
        report.failure_reason =
            "no admissible far plane k3 = K found below cap " + std::to_string(k3_cap);
        return report;
    }
    report.far_plane_K = K;

    PathBuilder pb{p, tol, report, {}, {}};
    for (const Wavevector& e : {kE1, kE2, kE3}) {
        insert_dir(pb.known, {e, 0});
        insert_dir(pb.known, {e, 1});
        pb.generation[e] = 0;
    }

    auto fail = [&report, &pb]() {
        report.covered = false;
        report.directions_known = pb.known.size();
        report.missing = missing_directions(pb.known, report.N);
        return report;
    };

    // climb (1,0,0) -> (1,0,K) with e3 steps
    for (int l = 0; l < K; ++l)
        if (!pb.step({1, 0, l}, kE3, {1, 0, l + 1})) return fail();

    // fill the k3 = K plane: sweep k1 from (1,0,K), then each column in k2
    for (int a = 1; a < N; ++a)
        if (!pb.step({a, 0, K}, kE1, {a + 1, 0, K})) return fail();
    for (int a = 1; a > -N; --a)
        if (!pb.step({a, 0, K}, kE1, {a - 1, 0, K})) return fail();
    for (int a = -N; a <= N; ++a) {
        for (int b = 0; b < N; ++b)
            if (!pb.step({a, b, K}, kE2, {a, b + 1, K})) return fail();
        for (int b = 0; b > -N; --b)
            if (!pb.step({a, b, K}, kE2, {a, b - 1, K})) return fail();
    }

    // descend to every |k3| <= N with (k1,k2) != 0
    for (int a = -N; a <= N; ++a)
        for (int b = -N; b <= N; ++b) {
            if (a == 0 && b == 0) continue;
            for (int l = K; l > -N; --l)
                if (!pb.step({a, b, l}, kE3, {a, b, l - 1})) return fail();
        }

    // recover the e3 axis from (+-1, 0, l): pick the k1 sign making
    // (b0.k)^2 >= (b0)_1^2, which the route argument needs
    for (int l = -N; l <= N; ++l) {
        if (l == 0) continue;
        int k1 = 1;
        if (p.b0_hat[0] != 0.0 && p.b0_hat[2] != 0.0)
            k1 = (l * p.b0_hat[2] * p.b0_hat[0] > 0) ? 1 : -1;
        if (!pb.step({k1, 0, l}, kE1, {0, 0, l})) return fail();
    }

    report.covered = missing_directions(pb.known, N).empty();
    report.directions_known = pb.known.size();
    if (!report.covered) {
        report.missing = missing_directions(pb.known, N);
        report.failure_reason = "route completed but H_N not covered";
    } else {
        int n = 0;
        for (const Wavevector& k : ball_frequencies(N)) {
            const auto it = pb.generation.find(k);
            if (it != pb.generation.end()) n = std::max(n, it->second);
        }
        report.n_of_N = n;
    }
    return report;
}

bool replay_certificate(const SpanReport& report, const PhysParams& p, double tol) {
    for (const auto& s : report.certificate) {
        if (s.self_bracket) {
            if (std::abs(mu_dot(s.parent, s.parent, p)) != s.lhs) return false;
            if (s.lhs == 0.0) return false;
            continue;
        }
        const ConditionEval ev = new_direction_condition(s.parent, s.seed, p, tol);
        if (ev.verdict != ConditionVerdict::Holds) return false;
        if (ev.lhs != s.lhs || ev.rhs != s.rhs) return false;
        for (const auto& d : s.produced) {
            const Wavevector sum{s.parent[0] + s.seed[0], s.parent[1] + s.seed[1],
                                 s.parent[2] + s.seed[2]};
            const Wavevector dif{s.parent[0] - s.seed[0], s.parent[1] - s.seed[1],
                                 s.parent[2] - s.seed[2]};
            const auto csum = canonical_term(sum, d.parity, 1.0);
            const auto cdif = canonical_term(dif, d.parity, 1.0);
            const bool ok = (csum && csum->dir.k == d.k) || (cdif && cdif->dir.k == d.k);
            if (!ok) return false;
        }
    }
    return true;
}

}  // namespace msmhd
