#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "isle/gate_library.hpp"
#include "isle/param_space.hpp"

namespace isle {

struct GateInstance {
    int kind = -1;  // index into the gate library
    double h = 1.0; // electrical effort driven by this stage
};

struct Path {
    std::string label;
    std::vector<GateInstance> gates;
};

// Statically critical paths of one circuit. Delay = max over paths of the
// per-path stage-delay sum.
struct CircuitModel {
    std::string name;
    std::vector<Path> paths;
    std::string note;
};

struct TimingSpec {
    double t_c = 0.0; // seconds
};

inline void validate_circuit(const CircuitModel& circ, const GateLibrary& lib) {
    if (circ.paths.empty()) {
        throw std::invalid_argument("validate_circuit: circuit has no paths");
    }
    for (const Path& path : circ.paths) {
        if (path.gates.empty()) {
            throw std::invalid_argument("validate_circuit: empty path '" + path.label + "'");
        }
        for (const GateInstance& g : path.gates) {
            lib.at(g.kind);
            if (!(g.h > 0.0)) {
                throw std::invalid_argument("validate_circuit: effort must be positive");
            }
        }
    }
}

inline double path_delay_full(const Surrogate& sur, const GateLibrary& lib, const Path& path,
                              const OperatingPoint& op) {
    double d = 0.0;
    for (const GateInstance& g : path.gates) {
        d += sur.stage_delay(lib.at(g.kind), op, g.h);
    }
    return d;
}

inline double path_delay_sle(const Surrogate& sur, const GateLibrary& lib,
                             const CharacterizationSet& cs, const Path& path,
                             const ParameterVector& x, const OperatingPoint& op) {
    const double tau = characterize_tau(sur, op);
    double d = 0.0;
    for (const GateInstance& g : path.gates) {
        const PgFit f = cs.pg(g.kind, x);
        d += tau * (f.p + f.g * g.h);
    }
    return d;
}

inline double circuit_delay_full(const Surrogate& sur, const GateLibrary& lib,
                                 const CircuitModel& circ, const OperatingPoint& op) {
    double worst = 0.0;
    for (const Path& path : circ.paths) {
        worst = std::max(worst, path_delay_full(sur, lib, path, op));
    }
    return worst;
}

inline double circuit_delay_sle(const Surrogate& sur, const GateLibrary& lib,
                                const CharacterizationSet& cs, const CircuitModel& circ,
                                const ParameterVector& x, const OperatingPoint& op) {
    double worst = 0.0;
    for (const Path& path : circ.paths) {
        worst = std::max(worst, path_delay_sle(sur, lib, cs, path, x, op));
    }
    return worst;
}

// Failure indicators use strict comparison: a circuit meeting t_c exactly
// passes.
inline bool indicator_full(double delay, double t_c) { return delay > t_c; }
inline bool indicator_sle(double sle_delay, double t_eps) { return sle_delay > t_eps; }

// Bundles circuit, library, surrogate, parameter set and both effort-model
// characterizations behind delay/indicator calls.
class CircuitEvaluator {
public:
    CircuitEvaluator(const Surrogate& sur, const GateLibrary& lib, const CircuitModel& circ,
                     const ParameterSet& set)
        : sur_(sur), lib_(lib), circ_(circ), set_(set),
          cs_d1_(build_characterization(sur, lib, SleMode::d1, set)),
          cs_d2_(build_characterization(sur, lib, SleMode::d2, set)) {
        validate_circuit(circ_, lib_);
    }

    double full_delay(const ParameterVector& x) const {
        return circuit_delay_full(sur_, lib_, circ_, operating_point(set_, x));
    }
    double sle_delay(const ParameterVector& x, SleMode mode) const {
        return circuit_delay_sle(sur_, lib_, charset(mode), circ_, x, operating_point(set_, x));
    }
    bool fails_full(const ParameterVector& x, double t_c) const {
        return indicator_full(full_delay(x), t_c);
    }
    bool fails_sle(const ParameterVector& x, double t_eps, SleMode mode) const {
        return indicator_sle(sle_delay(x, mode), t_eps);
    }

    const CharacterizationSet& charset(SleMode mode) const {
        return mode == SleMode::d1 ? cs_d1_ : cs_d2_;
    }
    const Surrogate& surrogate() const { return sur_; }
    const GateLibrary& library() const { return lib_; }
    const CircuitModel& circuit() const { return circ_; }
    const ParameterSet& parameter_set() const { return set_; }

private:
    Surrogate sur_;
    GateLibrary lib_;
    CircuitModel circ_;
    ParameterSet set_;
    CharacterizationSet cs_d1_;
    CharacterizationSet cs_d2_;
};

// Built-in benchmark: a 10-node inverter chain measured over nodes 3 to 8
// (five stages). The unmeasured pre/postcursor stages only shape the load of
// the edge stages, so the path carries just the measured segment.
inline CircuitModel inverter_chain(const GateLibrary& lib, int stages = 5, double h = 3.0) {
    if (stages < 1) {
        throw std::invalid_argument("inverter_chain: need at least one stage");
    }
    CircuitModel c;
    c.name = "InverterChain";
    c.note = "nodes 3-8 of a 10-node inverter chain; driver/load folded into edge-stage efforts";
    Path p;
    p.label = "measured";
    const int inv = lib.index_of("INV");
    for (int i = 0; i < stages; ++i) p.gates.push_back({inv, h});
    c.paths.push_back(std::move(p));
    return c;
}

// Built-in benchmark: same topology with the measured segment cycling
// NAND2 / NOR2 / INV.
inline CircuitModel gate_chain(const GateLibrary& lib, int stages = 5, double h = 3.0) {
    if (stages < 1) {
        throw std::invalid_argument("gate_chain: need at least one stage");
    }
    CircuitModel c;
    c.name = "GateChain";
    c.note = "nodes 3-8 of a 10-node chain; measured stages cycle NAND2/NOR2/INV";
    Path p;
    p.label = "measured";
    const int cycle[3] = {lib.index_of("NAND2"), lib.index_of("NOR2"), lib.index_of("INV")};
    for (int i = 0; i < stages; ++i) p.gates.push_back({cycle[i % 3], h});
    c.paths.push_back(std::move(p));
    return c;
}

inline CircuitModel builtin_circuit(const std::string& name, const GateLibrary& lib,
                                    int stages = 5, double h = 3.0) {
    if (name == "InverterChain") return inverter_chain(lib, stages, h);
    if (name == "GateChain") return gate_chain(lib, stages, h);
    throw std::invalid_argument("builtin_circuit: unknown circuit '" + name + "'");
}

} // namespace isle
