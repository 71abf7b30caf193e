#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "plume/errors.hpp"
#include "plume/vec3.hpp"

namespace plume {

/// Exactly two molecule species are supported. Type 1 is conventionally the
/// non-degradable tracer, type 2 the degradable one.
enum class Species : std::uint8_t { type1 = 1, type2 = 2 };

constexpr std::size_t species_index(Species s) { return s == Species::type1 ? 0 : 1; }

constexpr Species species_from_index(std::size_t i) {
    return i == 0 ? Species::type1 : Species::type2;
}

/// One tracer molecule. `release_step` is the sampling-interval index at which
/// it left the transmitter; dead particles take part in no counts.
struct Particle {
    Species species = Species::type1;
    Vec3 position;
    std::uint32_t release_step = 0;
    bool alive = true;
};

/// Spherical continuous-release transmitter. `release_per_step` discretizes
/// the release flux to whole particles per sampling interval; each particle is
/// type 1 with probability `p1`, type 2 otherwise.
struct TxConfig {
    Vec3 position;
    double radius = 0.1;
    std::uint32_t release_per_step = 1;
    double p1 = 1.0;

    double p2() const { return 1.0 - p1; }

    friend bool operator==(const TxConfig&, const TxConfig&) = default;

    void validate() const {
        if (!(radius > 0.0) || !std::isfinite(radius)) {
            throw ConfigError("TxConfig: radius must be positive and finite");
        }
        if (release_per_step < 1) {
            throw ConfigError("TxConfig: release_per_step must be >= 1");
        }
        if (!(p1 >= 0.0 && p1 <= 1.0)) {
            throw ConfigError("TxConfig: p1 must lie in [0,1]");
        }
    }
};

/// Transparent spherical receiver; counts molecules within `radius`
/// (boundary inclusive) without absorbing them.
struct RxConfig {
    Vec3 position;
    double radius = 0.1;

    friend bool operator==(const RxConfig&, const RxConfig&) = default;

    void validate() const {
        if (!(radius > 0.0) || !std::isfinite(radius)) {
            throw ConfigError("RxConfig: radius must be positive and finite");
        }
    }
};

/// Stochastic velocity surrogate for the unresolved turbulence: a per-particle
/// Ornstein-Uhlenbeck fluctuation plus a shared, slowly varying crosswind
/// meander. Times are in units of the sampling interval.
struct SurrogateParams {
    double sigma_u = 0.0;      ///< stationary std-dev of the per-particle fluctuation, per axis
    double tau_L = 10.0;       ///< Lagrangian correlation time of the fluctuation
    double meander_amp = 0.0;  ///< stationary std-dev of the shared crosswind meander velocity
    double meander_tau = 50.0; ///< correlation time of the meander

    void validate(double dt) const {
        if (!(sigma_u >= 0.0) || !(meander_amp >= 0.0)) {
            throw ConfigError("SurrogateParams: amplitudes must be non-negative");
        }
        if (!(tau_L >= dt) || !(meander_tau >= dt)) {
            throw ConfigError("SurrogateParams: correlation times must be >= dt");
        }
    }
};

/// Global simulation parameters. The sampling interval `dt` doubles as the
/// integration step; all timings are expressed in multiples of it.
struct SimParams {
    double dt = 1.0;
    double mean_wind = 0.0;  ///< wind speed along +x
    Vec3 domain_min{-1.0, -1.0, -1.0};
    Vec3 domain_max{1.0, 1.0, 1.0};
    std::array<double, 2> p_deg{0.0, 0.0};  ///< per-species per-step degradation probability
    SurrogateParams surrogate;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ConfigError("SimParams: dt must be positive and finite");
        }
        if (!(mean_wind >= 0.0) || !std::isfinite(mean_wind)) {
            throw ConfigError("SimParams: mean_wind must be non-negative and finite");
        }
        if (!(domain_min.x < domain_max.x && domain_min.y < domain_max.y &&
              domain_min.z < domain_max.z)) {
            throw ConfigError("SimParams: degenerate domain (min must be < max componentwise)");
        }
        for (double p : p_deg) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ConfigError("SimParams: degradation probabilities must lie in [0,1]");
            }
        }
        surrogate.validate(dt);
    }
};

}  // namespace plume
