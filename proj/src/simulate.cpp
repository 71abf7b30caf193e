#include "plume/simulate.hpp"

#include <cmath>

#include "plume/kernels.hpp"

namespace plume {

Simulator::Simulator(const TxConfig& tx, const SimParams& params) : tx_(tx), params_(params) {
    tx_.validate();
    params_.validate();
    key_release_ = stream_key(params.seed, StreamId::release);
    key_species_ = stream_key(params.seed, StreamId::species);
    key_turbulence_ = stream_key(params.seed, StreamId::turbulence);
    key_degradation_ = stream_key(params.seed, StreamId::degradation);
    key_meander_ = stream_key(params.seed, StreamId::meander);
}

void Simulator::release_batch(std::uint32_t step) {
    const SurrogateParams& sp = params_.surrogate;
    for (std::uint32_t k = 0; k < tx_.release_per_step; ++k) {
        const std::uint64_t pid = next_id_++;
        EntityStream pos_rng(key_release_, pid, step);
        EntityStream species_rng(key_species_, pid, step);
        const Vec3 pos = sample_uniform_in_sphere(tx_.position, tx_.radius, pos_rng);
        const bool type1 = species_rng.bernoulli(tx_.p1);
        px_.push_back(pos.x);
        py_.push_back(pos.y);
        pz_.push_back(pos.z);
        // fluctuation state starts from its stationary distribution
        vx_.push_back(sp.sigma_u * pos_rng.normal());
        vy_.push_back(sp.sigma_u * pos_rng.normal());
        vz_.push_back(sp.sigma_u * pos_rng.normal());
        species_.push_back(type1 ? 1 : 2);
        release_step_.push_back(step);
        id_.push_back(pid);
    }
}

void Simulator::compact(const std::vector<std::uint8_t>& dead) {
    std::size_t w = 0;
    const std::size_t n = id_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (dead[i]) continue;
        if (w != i) {
            px_[w] = px_[i];
            py_[w] = py_[i];
            pz_[w] = pz_[i];
            vx_[w] = vx_[i];
            vy_[w] = vy_[i];
            vz_[w] = vz_[i];
            species_[w] = species_[i];
            release_step_[w] = release_step_[i];
            id_[w] = id_[i];
        }
        ++w;
    }
    px_.resize(w);
    py_.resize(w);
    pz_.resize(w);
    vx_.resize(w);
    vy_.resize(w);
    vz_.resize(w);
    species_.resize(w);
    release_step_.resize(w);
    id_.resize(w);
}

SimSummary Simulator::run(std::uint32_t n_steps, const SnapshotSink& sink) {
    const auto& k = kernels::active();
    const SurrogateParams& sp = params_.surrogate;
    const double dt = params_.dt;
    const double decay = 1.0 - dt / sp.tau_L;
    const double scale = sp.sigma_u * std::sqrt(2.0 * dt / sp.tau_L);
    const double m_decay = 1.0 - dt / sp.meander_tau;
    const double m_scale = sp.meander_amp * std::sqrt(2.0 * dt / sp.meander_tau);

    stats_.clear();
    stats_.reserve(n_steps);
    summary_ = {};
    TrajectorySnapshot snap;

    for (std::uint32_t step = 0; step < n_steps; ++step) {
        StepStats st;
        st.step = step;
        const std::size_t n = id_.size();

        // shared meander velocity, one update per step
        {
            EntityStream mrng(key_meander_, 0, step);
            meander_.y = meander_.y * m_decay + m_scale * mrng.normal();
            meander_.z = meander_.z * m_decay + m_scale * mrng.normal();
        }

        if (n > 0) {
            nx_.resize(n);
            ny_.resize(n);
            nz_.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                EntityStream trng(key_turbulence_, id_[i], step);
                nx_[i] = trng.normal();
                ny_[i] = trng.normal();
                nz_[i] = trng.normal();
            }
            k.ou_update(vx_.data(), nx_.data(), decay, scale, n);
            k.ou_update(vy_.data(), ny_.data(), decay, scale, n);
            k.ou_update(vz_.data(), nz_.data(), decay, scale, n);

            k.advect(px_.data(), vx_.data(), params_.mean_wind, meander_.x, dt, n);
            k.advect(py_.data(), vy_.data(), 0.0, meander_.y, dt, n);
            k.advect(pz_.data(), vz_.data(), 0.0, meander_.z, dt, n);

            std::vector<std::uint8_t> dead(n, 0);
            const std::array<double, 2>& p_deg = params_.p_deg;
            if (p_deg[0] > 0.0 || p_deg[1] > 0.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double prob = p_deg[species_[i] - 1];
                    if (prob <= 0.0) continue;
                    EntityStream drng(key_degradation_, id_[i], step);
                    if (drng.bernoulli(prob)) {
                        dead[i] = 1;
                        ++st.degraded;
                    }
                }
            }
            const Vec3& lo = params_.domain_min;
            const Vec3& hi = params_.domain_max;
            for (std::size_t i = 0; i < n; ++i) {
                if (dead[i]) continue;
                if (px_[i] < lo.x || px_[i] > hi.x || py_[i] < lo.y || py_[i] > hi.y ||
                    pz_[i] < lo.z || pz_[i] > hi.z) {
                    dead[i] = 1;
                    ++st.culled;
                }
            }
            if (st.degraded + st.culled > 0) {
                compact(dead);
            }
        }

        release_batch(step);
        st.released = tx_.release_per_step;
        st.alive = id_.size();

        snap.step = step;
        snap.species.assign(species_.begin(), species_.end());
        snap.release_step.assign(release_step_.begin(), release_step_.end());
        snap.x.assign(px_.begin(), px_.end());
        snap.y.assign(py_.begin(), py_.end());
        snap.z.assign(pz_.begin(), pz_.end());
        if (sink) {
            sink(snap);
        }

        summary_.total_released += st.released;
        summary_.total_degraded += st.degraded;
        summary_.total_culled += st.culled;
        stats_.push_back(st);
    }
    summary_.steps = n_steps;
    summary_.final_alive = id_.size();
    return summary_;
}

std::vector<TrajectorySnapshot> Simulator::run_collect(std::uint32_t n_steps) {
    std::vector<TrajectorySnapshot> out;
    out.reserve(n_steps);
    run(n_steps, [&out](const TrajectorySnapshot& s) { out.push_back(s); });
    return out;
}

}  // namespace plume
