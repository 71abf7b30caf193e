#pragma once

// Plume transport: mean wind plus a stochastic turbulence surrogate
// (per-particle Ornstein-Uhlenbeck fluctuations and a shared crosswind
// meander), with per-step species degradation and domain culling.
//
// A particle released at step s first appears in snapshot s at its release
// position and starts moving, degrading and being culled from step s+1 on.
// That convention makes "steps since release" equal both the number of
// advection steps and the number of survival draws a particle has seen.

#include <cstdint>
#include <functional>
#include <vector>

#include "plume/rng.hpp"
#include "plume/trajectory.hpp"
#include "plume/types.hpp"

namespace plume {

/// One particle plus its attached fluctuation state, the per-particle unit
/// the bulk simulator mirrors in column form.
struct ParticleState {
    Particle particle;
    Vec3 velocity_fluct;
};

/// One Ornstein-Uhlenbeck step of the fluctuation state given a standard
/// normal noise vector: v' = v*(1 - dt/tau_L) + sigma_u*sqrt(2*dt/tau_L)*xi.
inline Vec3 ou_step(const Vec3& state, const Vec3& noise, const SurrogateParams& sp, double dt) {
    const double decay = 1.0 - dt / sp.tau_L;
    const double scale = sp.sigma_u * std::sqrt(2.0 * dt / sp.tau_L);
    Vec3 next;
    next.x = state.x * decay + scale * noise.x;
    next.y = state.y * decay + scale * noise.y;
    next.z = state.z * decay + scale * noise.z;
    return next;
}

/// Updates the particle-attached fluctuation and returns the total velocity
/// fluctuation (particle OU state plus the shared meander offset).
template <typename Rng>
Vec3 step_fluctuation(ParticleState& state, const Vec3& meander, const SurrogateParams& sp,
                      double dt, Rng& rng) {
    const Vec3 noise{rng.normal(), rng.normal(), rng.normal()};
    state.velocity_fluct = ou_step(state.velocity_fluct, noise, sp, dt);
    Vec3 total;
    total.x = state.velocity_fluct.x + meander.x;
    total.y = state.velocity_fluct.y + meander.y;
    total.z = state.velocity_fluct.z + meander.z;
    return total;
}

/// Explicit Euler move by the mean wind (along +x) plus the given total
/// fluctuation.
inline void advect(ParticleState& state, const Vec3& fluctuation, double mean_wind, double dt) {
    Vec3& p = state.particle.position;
    p.x = p.x + dt * (mean_wind + fluctuation.x);
    p.y = p.y + dt * (0.0 + fluctuation.y);
    p.z = p.z + dt * (0.0 + fluctuation.z);
}

/// Independent per-particle survival draws: an alive particle of species i
/// dies with probability p_deg[i]. Dead particles stay dead.
template <typename Rng>
void apply_degradation(std::vector<Particle>& particles, const std::array<double, 2>& p_deg,
                       Rng& rng) {
    for (Particle& p : particles) {
        if (!p.alive) continue;
        const double prob = p_deg[species_index(p.species)];
        if (prob > 0.0 && rng.bernoulli(prob)) {
            p.alive = false;
        }
    }
}

/// New release batch: positions uniform in the transmitter ball, species
/// drawn Bernoulli(p1) per particle.
template <typename Rng>
std::vector<Particle> release(const TxConfig& tx, std::uint32_t step, Rng& position_rng,
                              Rng& species_rng) {
    tx.validate();
    std::vector<Particle> out;
    out.reserve(tx.release_per_step);
    for (std::uint32_t k = 0; k < tx.release_per_step; ++k) {
        Particle p;
        p.species = species_rng.bernoulli(tx.p1) ? Species::type1 : Species::type2;
        p.position = sample_uniform_in_sphere(tx.position, tx.radius, position_rng);
        p.release_step = step;
        p.alive = true;
        out.push_back(p);
    }
    return out;
}

struct StepStats {
    std::uint32_t step = 0;
    std::uint64_t released = 0;
    std::uint64_t degraded = 0;
    std::uint64_t culled = 0;
    std::uint64_t alive = 0;
};

struct SimSummary {
    std::uint32_t steps = 0;
    std::uint64_t total_released = 0;
    std::uint64_t total_degraded = 0;
    std::uint64_t total_culled = 0;
    std::uint64_t final_alive = 0;
};

/// Column-stored particle population driven by counter-based substreams:
/// every draw is keyed by (stream, particle id, step), so results do not
/// depend on update order.
class Simulator {
public:
    Simulator(const TxConfig& tx, const SimParams& params);

    using SnapshotSink = std::function<void(const TrajectorySnapshot&)>;

    /// Runs `n_steps` sampling intervals, invoking the sink once per emitted
    /// snapshot. Deterministic for a fixed seed.
    SimSummary run(std::uint32_t n_steps, const SnapshotSink& sink);

    std::vector<TrajectorySnapshot> run_collect(std::uint32_t n_steps);

    const std::vector<StepStats>& step_stats() const { return stats_; }

private:
    void release_batch(std::uint32_t step);
    void compact(const std::vector<std::uint8_t>& dead);

    TxConfig tx_;
    SimParams params_;

    std::uint64_t key_release_;
    std::uint64_t key_species_;
    std::uint64_t key_turbulence_;
    std::uint64_t key_degradation_;
    std::uint64_t key_meander_;

    // population columns
    std::vector<double> px_, py_, pz_;
    std::vector<double> vx_, vy_, vz_;
    std::vector<std::uint8_t> species_;
    std::vector<std::uint32_t> release_step_;
    std::vector<std::uint64_t> id_;

    std::vector<double> nx_, ny_, nz_;  // per-step noise scratch

    Vec3 meander_{};  // shared crosswind meander velocity (x stays 0)
    std::uint64_t next_id_ = 0;
    std::vector<StepStats> stats_;
    SimSummary summary_;
};

}  // namespace plume
