#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isle/circuit.hpp"
#include "isle/gate_library.hpp"
#include "isle/param_space.hpp"

namespace isle {

enum class RunMode { d1, d2, both };

inline const char* to_string(RunMode m) {
    switch (m) {
    case RunMode::d1: return "d1";
    case RunMode::d2: return "d2";
    case RunMode::both: return "both";
    }
    throw std::logic_error("unknown RunMode");
}

// A user circuit from the config file: named paths of (kind, h) stages.
struct CircuitDecl {
    std::string name;
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> paths;
};

struct ExperimentConfig {
    // experiment
    std::string circuit = "GateChain";
    SetTag params = SetTag::ThrPar;
    RunMode mode = RunMode::both;
    long repetitions = 50;
    long samples_per_run = 1000;
    long sle_mc_samples = 50000;
    double target_loss = 0.15;
    double t_c = 0.0; // 0 means calibrate to target_loss
    long calibration_samples = 100000;
    long ground_truth_samples = 0;
    long scatter_samples = 1000;
    std::uint64_t seed = 20260819;
    std::string seed_source = "default";
    std::string out_dir = "out";
    int chain_stages = 5;
    double stage_h = 3.0;

    // explorer
    long mc_sim_capacity = 200;
    double expected_max_loss = 0.2;
    long safety_limit = 20;
    double eps_step = 0.02e-12;
    double eps_init = std::numeric_limits<double>::quiet_NaN();
    double eps_ceiling = std::numeric_limits<double>::quiet_NaN();

    // model
    SurrogateModel surrogate;
    Nominals nominals;
    SigmaRatios ratios;
    std::vector<GateKind> gates; // empty means the built-in library
    std::vector<CircuitDecl> circuits;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for '" + key + "': " + v);
    }
}

inline long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for '" + key + "': " + v);
    }
}

} // namespace config_detail

inline SetTag parse_set_tag(const std::string& v) {
    if (v == "one" || v == "OnePar") return SetTag::OnePar;
    if (v == "two" || v == "TwoPar") return SetTag::TwoPar;
    if (v == "three" || v == "ThrPar") return SetTag::ThrPar;
    throw std::invalid_argument("config: params must be one|two|three");
}

inline RunMode parse_run_mode(const std::string& v) {
    if (v == "d1") return RunMode::d1;
    if (v == "d2") return RunMode::d2;
    if (v == "both") return RunMode::both;
    throw std::invalid_argument("config: mode must be d1|d2|both");
}

// Key-value config text: [section] headers, key = value lines, # comments.
// Gate kinds live in [gate.NAME] sections, user circuits in [circuit.NAME]
// sections as path lines of KIND:h tokens.
inline ExperimentConfig parse_config_text(std::istream& in, ExperimentConfig cfg = {}) {
    using config_detail::to_double;
    using config_detail::to_long;
    using config_detail::trim;

    std::map<std::string, GateKind> gate_over;
    std::map<std::string, CircuitDecl> circ_over;

    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config: unterminated section at line " +
                                            std::to_string(lineno));
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (section == "experiment" || section.empty()) {
            if (key == "circuit") cfg.circuit = val;
            else if (key == "params") cfg.params = parse_set_tag(val);
            else if (key == "mode") cfg.mode = parse_run_mode(val);
            else if (key == "repetitions") cfg.repetitions = to_long(key, val);
            else if (key == "samples_per_run") cfg.samples_per_run = to_long(key, val);
            else if (key == "sle_mc_samples") cfg.sle_mc_samples = to_long(key, val);
            else if (key == "target_loss") cfg.target_loss = to_double(key, val);
            else if (key == "t_c") cfg.t_c = to_double(key, val);
            else if (key == "calibration_samples") cfg.calibration_samples = to_long(key, val);
            else if (key == "ground_truth_samples") cfg.ground_truth_samples = to_long(key, val);
            else if (key == "scatter_samples") cfg.scatter_samples = to_long(key, val);
            else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(to_long(key, val));
                cfg.seed_source = "config";
            } else if (key == "out") cfg.out_dir = val;
            else if (key == "chain_stages") cfg.chain_stages = static_cast<int>(to_long(key, val));
            else if (key == "stage_h") cfg.stage_h = to_double(key, val);
            else throw std::invalid_argument("config: unknown experiment key '" + key + "'");
        } else if (section == "explorer") {
            if (key == "mc_sim_capacity") cfg.mc_sim_capacity = to_long(key, val);
            else if (key == "expected_max_loss") cfg.expected_max_loss = to_double(key, val);
            else if (key == "safety_limit") cfg.safety_limit = to_long(key, val);
            else if (key == "eps_step") cfg.eps_step = to_double(key, val);
            else if (key == "eps_init") cfg.eps_init = (val == "auto")
                                                           ? std::numeric_limits<double>::quiet_NaN()
                                                           : to_double(key, val);
            else if (key == "eps_ceiling") cfg.eps_ceiling = (val == "auto")
                                                                 ? std::numeric_limits<double>::quiet_NaN()
                                                                 : to_double(key, val);
            else throw std::invalid_argument("config: unknown explorer key '" + key + "'");
        } else if (section == "surrogate") {
            if (key == "alpha") cfg.surrogate.alpha = to_double(key, val);
            else if (key == "k_time") cfg.surrogate.k_time = to_double(key, val);
            else throw std::invalid_argument("config: unknown surrogate key '" + key + "'");
        } else if (section == "parameters") {
            if (key == "mu_leff") cfg.nominals.l_eff = to_double(key, val);
            else if (key == "mu_vdd") cfg.nominals.v_dd = to_double(key, val);
            else if (key == "mu_vth") cfg.nominals.v_th = to_double(key, val);
            else if (key == "ratio_leff") cfg.ratios.l_eff = to_double(key, val);
            else if (key == "ratio_vdd") cfg.ratios.v_dd = to_double(key, val);
            else if (key == "ratio_vth") cfg.ratios.v_th = to_double(key, val);
            else throw std::invalid_argument("config: unknown parameters key '" + key + "'");
        } else if (section.rfind("gate.", 0) == 0) {
            const std::string name = section.substr(5);
            GateKind defaults{name, 1.0, 1.0, 0.05};
            for (const GateKind& builtin : default_gate_library().kinds) {
                if (builtin.name == name) defaults = builtin;
            }
            GateKind& k = gate_over.try_emplace(name, defaults).first->second;
            if (key == "c_g") k.c_g = to_double(key, val);
            else if (key == "c_p") k.c_p = to_double(key, val);
            else if (key == "c_x") k.c_x = to_double(key, val);
            else throw std::invalid_argument("config: unknown gate key '" + key + "'");
        } else if (section.rfind("circuit.", 0) == 0) {
            const std::string name = section.substr(8);
            CircuitDecl& c = circ_over.try_emplace(name, CircuitDecl{name, {}}).first->second;
            std::vector<std::pair<std::string, double>> stages;
            std::istringstream toks(val);
            std::string tok;
            while (toks >> tok) {
                const std::size_t colon = tok.find(':');
                if (colon == std::string::npos) {
                    throw std::invalid_argument("config: path stage must be KIND:h, got '" + tok +
                                                "'");
                }
                stages.emplace_back(tok.substr(0, colon),
                                    to_double("h", tok.substr(colon + 1)));
            }
            if (stages.empty()) {
                throw std::invalid_argument("config: empty path '" + key + "' in circuit '" +
                                            name + "'");
            }
            c.paths.emplace_back(key, std::move(stages));
        } else {
            throw std::invalid_argument("config: unknown section '" + section + "'");
        }
    }

    for (auto& [name, k] : gate_over) cfg.gates.push_back(k);
    for (auto& [name, c] : circ_over) cfg.circuits.push_back(c);
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("config: cannot open '" + path + "'");
    }
    return parse_config_text(in, std::move(cfg));
}

// The ISLE_MASTER_SEED environment variable outranks config and CLI seeds.
inline void apply_seed_env(ExperimentConfig& cfg) {
    if (const char* env = std::getenv("ISLE_MASTER_SEED")) {
        try {
            cfg.seed = static_cast<std::uint64_t>(std::stoull(env));
        } catch (const std::exception&) {
            throw std::invalid_argument("ISLE_MASTER_SEED must be an unsigned integer");
        }
        cfg.seed_source = "env";
    }
}

// Declared gates override the builtin kinds by name; the rest stay available
// so partial overrides keep the builtin circuits valid.
inline GateLibrary library_from_config(const ExperimentConfig& cfg) {
    GateLibrary lib = default_gate_library();
    for (const GateKind& k : cfg.gates) {
        bool replaced = false;
        for (GateKind& e : lib.kinds) {
            if (e.name == k.name) {
                if (k.name == "INV" && k.c_g != 1.0) {
                    throw std::invalid_argument("config: INV must have logical effort 1");
                }
                e = k;
                replaced = true;
                break;
            }
        }
        if (!replaced) lib.add(k);
    }
    return lib;
}

inline CircuitModel circuit_from_config(const ExperimentConfig& cfg, const GateLibrary& lib) {
    for (const CircuitDecl& decl : cfg.circuits) {
        if (decl.name != cfg.circuit) continue;
        CircuitModel c;
        c.name = decl.name;
        c.note = "declared in config";
        for (const auto& [label, stages] : decl.paths) {
            Path p;
            p.label = label;
            for (const auto& [kind, h] : stages) p.gates.push_back({lib.index_of(kind), h});
            c.paths.push_back(std::move(p));
        }
        validate_circuit(c, lib);
        return c;
    }
    return builtin_circuit(cfg.circuit, lib, cfg.chain_stages, cfg.stage_h);
}

inline ParameterSet parameter_set_from_config(const ExperimentConfig& cfg) {
    return make_parameter_set(cfg.params, cfg.nominals, cfg.ratios);
}

} // namespace isle
