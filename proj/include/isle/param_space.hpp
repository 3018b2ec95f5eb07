#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "isle/rng.hpp"

namespace isle {

// Which process/environment parameters vary statistically. The rest stay at
// their nominal values.
enum class SetTag { OnePar, TwoPar, ThrPar };

inline const char* to_string(SetTag tag) {
    switch (tag) {
    case SetTag::OnePar: return "one";
    case SetTag::TwoPar: return "two";
    case SetTag::ThrPar: return "three";
    }
    throw std::logic_error("unknown SetTag");
}

// Nominal operating values; parameters outside the active set are pinned here.
struct Nominals {
    double l_eff = 0.13e-6; // meters
    double v_dd = 1.2;      // volts
    double v_th = 0.3;      // volts
};

// 3*sigma/mu ratios for each physical parameter.
struct SigmaRatios {
    double l_eff = 0.15;
    double v_dd = 0.10;
    double v_th = 0.10;
};

struct ParameterDef {
    std::string name;
    double mu = 0.0;
    double sigma = 0.0; // make_parameter_set enforces sigma > 0
};

struct ParameterSet {
    SetTag tag = SetTag::ThrPar;
    std::vector<ParameterDef> defs;
    Nominals nominals;

    std::size_t dim() const { return defs.size(); }
};

// One sampled point, ordered like ParameterSet::defs. Fixed capacity three.
struct ParameterVector {
    std::array<double, 3> v{};
    std::uint32_t n = 0;

    double operator[](std::size_t i) const { return v[i]; }
    double& operator[](std::size_t i) { return v[i]; }
    std::size_t size() const { return n; }
};

// Physical point fed to the delay surrogate, inactive axes at nominal.
struct OperatingPoint {
    double l_eff;
    double v_dd;
    double v_th;
};

// Tallies of extreme draws, kept for the run manifest.
struct DrawAudit {
    long beyond_6_sigma = 0;
    double max_abs_z = 0.0;
};

inline ParameterSet make_parameter_set(SetTag tag, const Nominals& nom = {},
                                       const SigmaRatios& ratios = {}) {
    auto def = [](const char* name, double mu, double ratio) {
        if (!(mu > 0.0) || !(ratio > 0.0)) {
            throw std::invalid_argument("make_parameter_set: mu and sigma ratio must be positive");
        }
        return ParameterDef{name, mu, ratio * mu / 3.0};
    };
    ParameterSet set;
    set.tag = tag;
    set.nominals = nom;
    set.defs.push_back(def("l_eff", nom.l_eff, ratios.l_eff));
    if (tag == SetTag::TwoPar || tag == SetTag::ThrPar) {
        set.defs.push_back(def("v_dd", nom.v_dd, ratios.v_dd));
    }
    if (tag == SetTag::ThrPar) {
        set.defs.push_back(def("v_th", nom.v_th, ratios.v_th));
    }
    return set;
}

inline ParameterVector nominal_vector(const ParameterSet& set) {
    ParameterVector x;
    x.n = static_cast<std::uint32_t>(set.dim());
    for (std::size_t i = 0; i < set.dim(); ++i) x.v[i] = set.defs[i].mu;
    return x;
}

// Draw sample i of the stream. Component j consumes uniform index i*dim + j,
// so the full sequence is random-access and order-independent.
inline ParameterVector draw_at(const ParameterSet& set, const RandomSource& src,
                               std::uint64_t index, DrawAudit* audit = nullptr) {
    const std::size_t dim = set.dim();
    ParameterVector x;
    x.n = static_cast<std::uint32_t>(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const double z = normal_draw(src, index * dim + j);
        if (!std::isfinite(z)) {
            throw std::runtime_error("draw_at: non-finite draw");
        }
        if (audit) {
            const double az = std::fabs(z);
            if (az > 6.0) ++audit->beyond_6_sigma;
            if (az > audit->max_abs_z) audit->max_abs_z = az;
        }
        x.v[j] = set.defs[j].mu + set.defs[j].sigma * z;
    }
    return x;
}

inline std::vector<ParameterVector> draw_samples(const ParameterSet& set, std::size_t count,
                                                 const RandomSource& src,
                                                 DrawAudit* audit = nullptr) {
    std::vector<ParameterVector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(draw_at(set, src, i, audit));
    return out;
}

// Joint density of the independent-Gaussian parameter model.
inline double density(const ParameterSet& set, const ParameterVector& x) {
    if (x.size() != set.dim()) {
        throw std::invalid_argument("density: dimension mismatch");
    }
    static constexpr double kInvSqrt2Pi = 0.3989422804014327;
    double f = 1.0;
    for (std::size_t j = 0; j < set.dim(); ++j) {
        if (!std::isfinite(x[j])) {
            throw std::invalid_argument("density: non-finite component");
        }
        const double s = set.defs[j].sigma;
        if (!(s > 0.0)) {
            throw std::domain_error("density: sigma must be positive");
        }
        const double z = (x[j] - set.defs[j].mu) / s;
        f *= kInvSqrt2Pi / s * std::exp(-0.5 * z * z);
    }
    return f;
}

// Map a sampled vector to the physical axes, filling omitted ones from the
// nominal point.
inline OperatingPoint operating_point(const ParameterSet& set, const ParameterVector& x) {
    if (x.size() != set.dim()) {
        throw std::invalid_argument("operating_point: dimension mismatch");
    }
    OperatingPoint op{set.nominals.l_eff, set.nominals.v_dd, set.nominals.v_th};
    if (set.dim() >= 1) op.l_eff = x[0];
    if (set.dim() >= 2) op.v_dd = x[1];
    if (set.dim() >= 3) op.v_th = x[2];
    return op;
}

} // namespace isle
