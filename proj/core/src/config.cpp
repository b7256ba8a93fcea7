#include "msmhd/config.hpp"

#include "msmhd/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace msmhd {

double ExperimentConfig::eta_or_default() const {
    if (eta >= 0.0) return eta;
    return metric_eta_default(params, noise);
}

double ExperimentConfig::burn_in_or_default() const {
    if (burn_in >= 0.0) return burn_in;
    return 10.0 / params.kappa;  // 10 dissipation times of the |k| = 1 modes
}

FullInitSpec ExperimentConfig::full_init() const {
    FullInitSpec spec;
    spec.theta = init;
    spec.ub = ub_mode;
    spec.perturb_amplitude = perturb_amplitude;
    spec.perturb_kmax = perturb_kmax;
    spec.perturb_seed = perturb_seed;
    return spec;
}

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt(const Vec3& v) { return fmt(v[0]) + " " + fmt(v[1]) + " " + fmt(v[2]); }

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Parser {
    std::istringstream in;
    int line_no = 0;

    double num(const std::string& tok, int line) {
        if (tok == "inf") return std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("expected a number, got '" + tok + "'", line);
        }
    }

    long integer(const std::string& tok, int line) {
        try {
            std::size_t used = 0;
            const long v = std::stol(tok, &used);
            if (used != tok.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("expected an integer, got '" + tok + "'", line);
        }
    }

    bool boolean(const std::string& tok, int line) {
        if (tok == "true" || tok == "1") return true;
        if (tok == "false" || tok == "0") return false;
        throw ConfigError("expected true/false, got '" + tok + "'", line);
    }
};

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

InitSampler::Kind sampler_kind(const std::string& s, int line) {
    if (s == "zero") return InitSampler::Kind::Zero;
    if (s == "single-mode") return InitSampler::Kind::SingleMode;
    if (s == "gaussian-low-mode") return InitSampler::Kind::GaussianLowMode;
    if (s == "snapshot") return InitSampler::Kind::Snapshot;
    throw ConfigError("unknown sampler '" + s + "'", line);
}

std::string sampler_name(InitSampler::Kind k) {
    switch (k) {
        case InitSampler::Kind::Zero:
            return "zero";
        case InitSampler::Kind::SingleMode:
            return "single-mode";
        case InitSampler::Kind::GaussianLowMode:
            return "gaussian-low-mode";
        case InitSampler::Kind::Snapshot:
            return "snapshot";
    }
    return "zero";
}

void emit_sampler(std::ostringstream& os, const char* section, const InitSampler& s) {
    os << "[" << section << "]\n";
    os << "sampler = " << sampler_name(s.kind) << "\n";
    os << "k = " << s.k[0] << " " << s.k[1] << " " << s.k[2] << "\n";
    os << "parity = " << s.parity << "\n";
    os << "amplitude = " << fmt(s.amplitude) << "\n";
    os << "kmax = " << s.kmax << "\n";
    os << "seed = " << s.seed << "\n";
    if (!s.snapshot_path.empty()) os << "snapshot = " << s.snapshot_path << "\n";
    os << "\n";
}

void parse_sampler_key(InitSampler& s, Parser& p, const std::string& key, const std::string& val,
                       int line) {
    const auto toks = split_ws(val);
    if (key == "sampler") {
        s.kind = sampler_kind(val, line);
    } else if (key == "k") {
        if (toks.size() != 3) throw ConfigError("k needs three integers", line);
        for (int i = 0; i < 3; ++i) s.k[i] = static_cast<int>(p.integer(toks[i], line));
    } else if (key == "parity") {
        s.parity = static_cast<int>(p.integer(val, line));
    } else if (key == "amplitude") {
        s.amplitude = p.num(val, line);
    } else if (key == "kmax") {
        s.kmax = static_cast<int>(p.integer(val, line));
    } else if (key == "seed") {
        s.seed = static_cast<std::uint64_t>(p.integer(val, line));
    } else if (key == "snapshot") {
        s.snapshot_path = val;
    } else {
        throw ConfigError("unknown key '" + key + "'", line);
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.noise.entries.clear();       // noise modes come from the file
    cfg.eps_delta_list.clear();
    cfg.checkpoints.clear();
    cfg.snapshot_times.clear();
    bool saw_checkpoints = false;

    Parser p;
    p.in.str(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(p.in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("unterminated section header", line);
            section = s.substr(1, s.size() - 2);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", line);
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        const auto toks = split_ws(val);

        if (section == "system") {
            if (key == "type") {
                if (val != "limit" && val != "full" && val != "corrector1" && val != "corrector2")
                    throw ConfigError("unknown system '" + val + "'", line);
                cfg.system = val;
            } else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "grid") {
            if (key == "n")
                cfg.grid_n = static_cast<int>(p.integer(val, line));
            else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "params") {
            if (key == "eps")
                cfg.params.eps = p.num(val, line);
            else if (key == "delta")
                cfg.params.delta = p.num(val, line);
            else if (key == "nu")
                cfg.params.nu = p.num(val, line);
            else if (key == "kappa")
                cfg.params.kappa = p.num(val, line);
            else if (key == "lambda")
                cfg.params.lambda_colat = p.num(val, line);
            else if (key == "b0") {
                if (toks.size() != 3) throw ConfigError("b0 needs three numbers", line);
                for (int i = 0; i < 3; ++i) cfg.params.b0_hat[i] = p.num(toks[i], line);
            } else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "noise") {
            if (key == "seed")
                cfg.noise.seed = static_cast<std::uint64_t>(p.integer(val, line));
            else if (key == "mode") {
                if (toks.size() != 5)
                    throw ConfigError("mode needs 'k1 k2 k3 parity alpha'", line);
                NoiseEntry e;
                for (int i = 0; i < 3; ++i) e.k[i] = static_cast<int>(p.integer(toks[i], line));
                e.parity = static_cast<int>(p.integer(toks[3], line));
                e.alpha = p.num(toks[4], line);
                cfg.noise.entries.push_back(e);
            } else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "step") {
            if (key == "dt")
                cfg.step.dt = p.num(val, line);
            else if (key == "advection")
                cfg.step.advection = p.boolean(val, line);
            else if (key == "blowup_threshold")
                cfg.step.blowup_threshold = p.num(val, line);
            else if (key == "stop_l3sq")
                cfg.step.stop_l3sq = p.num(val, line);
            else if (key == "scheme")
                cfg.step.scheme = val;
            else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "run") {
            if (key == "horizon")
                cfg.horizon = p.num(val, line);
            else if (key == "n_traj")
                cfg.n_traj = static_cast<int>(p.integer(val, line));
            else if (key == "record_every")
                cfg.record_every = static_cast<int>(p.integer(val, line));
            else if (key == "n_threads")
                cfg.n_threads = static_cast<int>(p.integer(val, line));
            else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "init") {
            parse_sampler_key(cfg.init, p, key, val, line);
        } else if (section == "init_b") {
            parse_sampler_key(cfg.init_b, p, key, val, line);
        } else if (section == "init_ub") {
            if (key == "mode") {
                if (val == "matched")
                    cfg.ub_mode = FullInitSpec::UB::Matched;
                else if (val == "zero")
                    cfg.ub_mode = FullInitSpec::UB::Zero;
                else if (val == "perturbed")
                    cfg.ub_mode = FullInitSpec::UB::Perturbed;
                else
                    throw ConfigError("unknown init_ub mode '" + val + "'", line);
            } else if (key == "perturb_amplitude")
                cfg.perturb_amplitude = p.num(val, line);
            else if (key == "perturb_kmax")
                cfg.perturb_kmax = static_cast<int>(p.integer(val, line));
            else if (key == "perturb_seed")
                cfg.perturb_seed = static_cast<std::uint64_t>(p.integer(val, line));
            else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "metric") {
            if (key == "eta") {
                cfg.eta = (val == "auto") ? -1.0 : p.num(val, line);
            } else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "experiment") {
            if (key == "eps_delta") {
                if (toks.size() != 2) throw ConfigError("eps_delta needs two numbers", line);
                cfg.eps_delta_list.push_back({p.num(toks[0], line), p.num(toks[1], line)});
            } else if (key == "burn_in")
                cfg.burn_in = (val == "auto") ? -1.0 : p.num(val, line);
            else if (key == "checkpoints") {
                saw_checkpoints = true;
                for (const auto& t : toks) cfg.checkpoints.push_back(p.num(t, line));
            } else if (key == "samples")
                cfg.samples = static_cast<int>(p.integer(val, line));
            else if (key == "shared_noise")
                cfg.shared_noise = p.boolean(val, line);
            else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "output") {
            if (key == "dir")
                cfg.out_dir = val;
            else if (key == "write_final_snapshots")
                cfg.write_final_snapshots = p.boolean(val, line);
            else if (key == "snapshot_times")
                for (const auto& t : toks) cfg.snapshot_times.push_back(p.num(t, line));
            else
                throw ConfigError("unknown key '" + key + "'", line);
        } else if (section.empty()) {
            throw ConfigError("key outside any [section]", line);
        } else {
            throw ConfigError("unknown section '" + section + "'", line);
        }
    }
    if (!saw_checkpoints) cfg.checkpoints = {1.0, 2.0, 4.0, 8.0};
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "# msmhd experiment config v1\n";
    os << "[system]\ntype = " << cfg.system << "\n\n";
    os << "[grid]\nn = " << cfg.grid_n << "\n\n";
    os << "[params]\n";
    os << "eps = " << fmt(cfg.params.eps) << "\n";
    os << "delta = " << fmt(cfg.params.delta) << "\n";
    os << "nu = " << fmt(cfg.params.nu) << "\n";
    os << "kappa = " << fmt(cfg.params.kappa) << "\n";
    os << "lambda = " << fmt(cfg.params.lambda_colat) << "\n";
    os << "b0 = " << fmt(cfg.params.b0_hat) << "\n\n";
    os << "[noise]\n";
    os << "seed = " << cfg.noise.seed << "\n";
    for (const auto& e : cfg.noise.entries)
        os << "mode = " << e.k[0] << " " << e.k[1] << " " << e.k[2] << " " << e.parity << " "
           << fmt(e.alpha) << "\n";
    os << "\n[step]\n";
    os << "dt = " << fmt(cfg.step.dt) << "\n";
    os << "scheme = " << cfg.step.scheme << "\n";
    os << "advection = " << (cfg.step.advection ? "true" : "false") << "\n";
    os << "blowup_threshold = " << fmt(cfg.step.blowup_threshold) << "\n";
    os << "stop_l3sq = " << fmt(cfg.step.stop_l3sq) << "\n";
    os << "\n[run]\n";
    os << "horizon = " << fmt(cfg.horizon) << "\n";
    os << "n_traj = " << cfg.n_traj << "\n";
    os << "record_every = " << cfg.record_every << "\n";
    os << "n_threads = " << cfg.n_threads << "\n\n";
    emit_sampler(os, "init", cfg.init);
    emit_sampler(os, "init_b", cfg.init_b);
    os << "[init_ub]\n";
    os << "mode = "
       << (cfg.ub_mode == FullInitSpec::UB::Matched
               ? "matched"
               : (cfg.ub_mode == FullInitSpec::UB::Zero ? "zero" : "perturbed"))
       << "\n";
    os << "perturb_amplitude = " << fmt(cfg.perturb_amplitude) << "\n";
    os << "perturb_kmax = " << cfg.perturb_kmax << "\n";
    os << "perturb_seed = " << cfg.perturb_seed << "\n\n";
    os << "[metric]\n";
    if (cfg.eta < 0)
        os << "eta = auto\n";
    else
        os << "eta = " << fmt(cfg.eta) << "\n";
    os << "\n[experiment]\n";
    for (const auto& ed : cfg.eps_delta_list)
        os << "eps_delta = " << fmt(ed[0]) << " " << fmt(ed[1]) << "\n";
    if (cfg.burn_in < 0)
        os << "burn_in = auto\n";
    else
        os << "burn_in = " << fmt(cfg.burn_in) << "\n";
    os << "checkpoints =";
    for (double c : cfg.checkpoints) os << " " << fmt(c);
    os << "\n";
    os << "samples = " << cfg.samples << "\n";
    os << "shared_noise = " << (cfg.shared_noise ? "true" : "false") << "\n\n";
    os << "[output]\n";
    os << "dir = " << cfg.out_dir << "\n";
    os << "write_final_snapshots = " << (cfg.write_final_snapshots ? "true" : "false") << "\n";
    if (!cfg.snapshot_times.empty()) {
        os << "snapshot_times =";
        for (double t : cfg.snapshot_times) os << " " << fmt(t);
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Ensemble CSV persistence
// ---------------------------------------------------------------------------

void write_ensemble_csv(const std::string& prefix, const EnsembleRecord& rec) {
    {
        std::ofstream os(prefix + "_rows.csv");
        if (!os) throw std::runtime_error("cannot open " + prefix + "_rows.csv");
        os << "# msmhd-ensemble v1\n";
        os << "traj";
        for (const auto& c : rec.columns) os << "," << c;
        os << "\n";
        for (const auto& tr : rec.trajectories)
            for (const auto& row : tr.rows) {
                os << tr.traj;
                for (double v : row) os << "," << fmt(v);
                os << "\n";
            }
    }
    {
        std::ofstream os(prefix + "_summary.csv");
        if (!os) throw std::runtime_error("cannot open " + prefix + "_summary.csv");
        os << "# msmhd-ensemble v1\n";
        os << "traj,key,value\n";
        for (const auto& tr : rec.trajectories) {
            for (const auto& [k, v] : tr.summary) os << tr.traj << "," << k << "," << fmt(v) << "\n";
            os << tr.traj << ",stopped," << (tr.stopped ? 1 : 0) << "\n";
            os << tr.traj << ",stopped_step," << tr.stopped_step << "\n";
        }
    }
}

namespace {
std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace

EnsembleRecord read_ensemble_csv(const std::string& prefix) {
    EnsembleRecord rec;
    {
        std::ifstream is(prefix + "_rows.csv");
        if (!is) throw std::runtime_error("cannot open " + prefix + "_rows.csv");
        std::string line;
        std::getline(is, line);
        if (line != "# msmhd-ensemble v1")
            throw std::runtime_error("unsupported ensemble schema in " + prefix);
        std::getline(is, line);
        const auto header = split_csv(line);
        rec.columns.assign(header.begin() + 1, header.end());
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto toks = split_csv(line);
            const std::size_t traj = std::stoull(toks[0]);
            if (rec.trajectories.size() <= traj) rec.trajectories.resize(traj + 1);
            rec.trajectories[traj].traj = traj;
            std::vector<double> row;
            for (std::size_t i = 1; i < toks.size(); ++i) row.push_back(std::stod(toks[i]));
            rec.trajectories[traj].rows.push_back(std::move(row));
        }
    }
    {
        std::ifstream is(prefix + "_summary.csv");
        if (!is) throw std::runtime_error("cannot open " + prefix + "_summary.csv");
        std::string line;
        std::getline(is, line);
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto toks = split_csv(line);
            const std::size_t traj = std::stoull(toks[0]);
            if (rec.trajectories.size() <= traj) rec.trajectories.resize(traj + 1);
            if (toks[1] == "stopped")
                rec.trajectories[traj].stopped = toks[2] == "1";
            else if (toks[1] == "stopped_step")
                rec.trajectories[traj].stopped_step = std::stoull(toks[2]);
            else
                rec.trajectories[traj].summary[toks[1]] = std::stod(toks[2]);
        }
    }
    return rec;
}

}  // namespace msmhd
