#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "isle/param_space.hpp"

namespace isle {

// One gate flavor. c_g is the logical effort, c_p the parasitic delay, c_x an
// x-coupling factor that the effort model cannot fully represent.
struct GateKind {
    std::string name;
    double c_g = 1.0;
    double c_p = 1.0;
    double c_x = 0.0;
};

struct SurrogateModel {
    double alpha = 1.3;
    double k_time = 5.6e-5; // seconds * volts^(alpha-1) / meter
};

struct GateLibrary {
    std::vector<GateKind> kinds;

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            if (kinds[i].name == name) return static_cast<int>(i);
        }
        throw std::invalid_argument("GateLibrary: unknown gate kind '" + name + "'");
    }
    const GateKind& at(int idx) const {
        if (idx < 0 || static_cast<std::size_t>(idx) >= kinds.size()) {
            throw std::out_of_range("GateLibrary: kind index out of range");
        }
        return kinds[static_cast<std::size_t>(idx)];
    }
    void add(const GateKind& k) {
        if (!(k.c_g > 0.0) || k.c_p < 0.0 || k.c_x < 0.0) {
            throw std::invalid_argument("GateLibrary: c_g must be > 0, c_p and c_x >= 0");
        }
        if (k.name == "INV" && k.c_g != 1.0) {
            throw std::invalid_argument("GateLibrary: INV must have logical effort 1");
        }
        for (const auto& e : kinds) {
            if (e.name == k.name) {
                throw std::invalid_argument("GateLibrary: duplicate kind '" + k.name + "'");
            }
        }
        kinds.push_back(k);
    }
};

inline GateLibrary default_gate_library(double c_x = 0.05) {
    GateLibrary lib;
    lib.add({"INV", 1.0, 1.0, c_x});
    lib.add({"NAND2", 4.0 / 3.0, 2.0, c_x});
    lib.add({"NOR2", 5.0 / 3.0, 2.0, c_x});
    return lib;
}

// Stand-in for the transistor-level simulator. Affine in h; the c_x terms
// couple the parasitic and effort parts to the parameter excursion rho(x)
// with different strengths, which is what the effort model mis-fits.
struct Surrogate {
    SurrogateModel model;
    Nominals nominal;

    double rho(const OperatingPoint& op) const {
        return (op.l_eff / nominal.l_eff - 1.0) + (nominal.v_dd / op.v_dd - 1.0);
    }

    double stage_delay(const GateKind& kind, const OperatingPoint& op, double h) const {
        if (!(op.v_dd > op.v_th)) {
            throw std::domain_error("Surrogate: V_dd must exceed V_th");
        }
        if (!(h >= 0.0)) {
            throw std::invalid_argument("Surrogate: electrical effort must be >= 0");
        }
        const double base =
            model.k_time * op.l_eff * op.v_dd / std::pow(op.v_dd - op.v_th, model.alpha);
        const double r = rho(op);
        const double d =
            base * (kind.c_p * (1.0 + kind.c_x * r) + kind.c_g * (1.0 + kind.c_x * r / 2.0) * h);
        // zero is legitimate: the parasitic-free reference probe at h = 0
        if (d < 0.0 || !std::isfinite(d)) {
            throw std::domain_error("Surrogate: non-physical stage delay");
        }
        return d;
    }
};

// Per-x time unit: the delay-vs-h slope of an idealized reference inverter
// (no parasitic, no coupling, unit effort), measured by a two-point probe.
// Equals k_time * L_eff * V_dd / (V_dd - V_th)^alpha.
inline double characterize_tau(const Surrogate& sur, const OperatingPoint& op) {
    static const GateKind ref{"_REF_INV", 1.0, 0.0, 0.0};
    return sur.stage_delay(ref, op, 1.0) - sur.stage_delay(ref, op, 0.0);
}

struct PgFit {
    double p;
    double g;
};

// Two-point fit of delay(h) = tau(x) * (p + g*h) through oracle measurements
// at h1 and h2. Exact here because the surrogate is affine in h.
inline PgFit characterize_gate(const Surrogate& sur, const GateKind& kind,
                               const OperatingPoint& op, double h1 = 1.0, double h2 = 4.0) {
    if (h1 == h2) {
        throw std::invalid_argument("characterize_gate: fit efforts must differ");
    }
    const double d1 = sur.stage_delay(kind, op, h1);
    const double d2 = sur.stage_delay(kind, op, h2);
    const double tau = characterize_tau(sur, op);
    const double slope = (d2 - d1) / (h2 - h1);
    const double intercept = d1 - slope * h1;
    return {intercept / tau, slope / tau};
}

enum class SleMode { d1, d2 };

inline const char* to_string(SleMode m) { return m == SleMode::d1 ? "d1" : "d2"; }

// Effort-model coefficients for one gate kind. d1 freezes p and g at the
// nominal point; d2 carries first-order response-surface slopes in the
// active parameters, built from characterization probes at nominal +/- sigma.
struct GateCharacterization {
    double p0 = 0.0;
    double g0 = 0.0;
    std::array<double, 3> dp{};
    std::array<double, 3> dg{};
};

struct CharacterizationSet {
    SleMode mode = SleMode::d1;
    std::vector<GateCharacterization> by_kind;
    std::array<double, 3> mu{};
    std::uint32_t dim = 0;

    PgFit pg(int kind_idx, const ParameterVector& x) const {
        const GateCharacterization& c = by_kind[static_cast<std::size_t>(kind_idx)];
        double p = c.p0;
        double g = c.g0;
        if (mode == SleMode::d2) {
            for (std::uint32_t j = 0; j < dim; ++j) {
                const double dx = x[j] - mu[j];
                p += c.dp[j] * dx;
                g += c.dg[j] * dx;
            }
        }
        return {p, g};
    }
};

inline CharacterizationSet build_characterization(const Surrogate& sur, const GateLibrary& lib,
                                                  SleMode mode, const ParameterSet& set) {
    if (lib.kinds.empty()) {
        throw std::invalid_argument("build_characterization: empty gate library");
    }
    CharacterizationSet cs;
    cs.mode = mode;
    cs.dim = static_cast<std::uint32_t>(set.dim());
    const ParameterVector x0 = nominal_vector(set);
    for (std::uint32_t j = 0; j < cs.dim; ++j) cs.mu[j] = x0[j];

    for (const GateKind& kind : lib.kinds) {
        GateCharacterization c;
        const PgFit base = characterize_gate(sur, kind, operating_point(set, x0));
        c.p0 = base.p;
        c.g0 = base.g;
        if (mode == SleMode::d2) {
            for (std::uint32_t j = 0; j < cs.dim; ++j) {
                const double step = set.defs[j].sigma;
                if (!(step > 0.0)) continue;
                ParameterVector lo = x0, hi = x0;
                lo[j] -= step;
                hi[j] += step;
                const PgFit flo = characterize_gate(sur, kind, operating_point(set, lo));
                const PgFit fhi = characterize_gate(sur, kind, operating_point(set, hi));
                c.dp[j] = (fhi.p - flo.p) / (2.0 * step);
                c.dg[j] = (fhi.g - flo.g) / (2.0 * step);
            }
        }
        cs.by_kind.push_back(c);
    }
    return cs;
}

// Optional lookup-table stand-in: caches tau/p/g keyed by x quantized to a
// grid of sigma fractions. Off by default everywhere; exists for parity with
// a table-driven characterization strategy.
class QuantizedMemo {
public:
    QuantizedMemo(const Surrogate& sur, const CharacterizationSet& cs, const ParameterSet& set,
                  double quantum_sigmas)
        : sur_(sur), cs_(cs), set_(set), q_(quantum_sigmas) {
        if (!(q_ > 0.0)) {
            throw std::invalid_argument("QuantizedMemo: quantum must be positive");
        }
    }

    ParameterVector quantize(const ParameterVector& x) const {
        ParameterVector r = x;
        for (std::size_t j = 0; j < set_.dim(); ++j) {
            const double step = set_.defs[j].sigma * q_;
            r[j] = set_.defs[j].mu + std::round((x[j] - set_.defs[j].mu) / step) * step;
        }
        return r;
    }

    double tau(const ParameterVector& x) {
        return entry(x).tau;
    }
    PgFit pg(int kind_idx, const ParameterVector& x) {
        const Entry& e = entry(x);
        return e.pg[static_cast<std::size_t>(kind_idx)];
    }

private:
    struct Entry {
        double tau;
        std::vector<PgFit> pg;
    };

    const Entry& entry(const ParameterVector& x) {
        const ParameterVector q = quantize(x);
        std::uint64_t key = 0xcbf29ce484222325ull;
        for (std::size_t j = 0; j < set_.dim(); ++j) {
            std::uint64_t bits;
            const double d = q[j];
            static_assert(sizeof(bits) == sizeof(d));
            __builtin_memcpy(&bits, &d, sizeof(bits));
            key = (key ^ bits) * 0x100000001b3ull;
        }
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Entry e;
        e.tau = characterize_tau(sur_, operating_point(set_, q));
        e.pg.reserve(cs_.by_kind.size());
        for (std::size_t k = 0; k < cs_.by_kind.size(); ++k) {
            e.pg.push_back(cs_.pg(static_cast<int>(k), q));
        }
        return cache_.emplace(key, std::move(e)).first->second;
    }

    const Surrogate& sur_;
    const CharacterizationSet& cs_;
    const ParameterSet& set_;
    double q_;
    std::unordered_map<std::uint64_t, Entry> cache_;
};

} // namespace isle
