#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "plume/types.hpp"
#include "plume/vec3.hpp"

namespace plume {

/// All alive particles at one sampling instant, stored column-wise so the
/// counting and advection kernels can stream over contiguous arrays.
/// `species` holds raw values 1 or 2.
struct TrajectorySnapshot {
    std::uint32_t step = 0;
    std::vector<std::uint8_t> species;
    std::vector<std::uint32_t> release_step;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;

    std::size_t size() const { return species.size(); }

    void reserve(std::size_t n) {
        species.reserve(n);
        release_step.reserve(n);
        x.reserve(n);
        y.reserve(n);
        z.reserve(n);
    }

    void add(Species s, std::uint32_t released_at, const Vec3& pos) {
        species.push_back(static_cast<std::uint8_t>(s));
        release_step.push_back(released_at);
        x.push_back(pos.x);
        y.push_back(pos.y);
        z.push_back(pos.z);
    }

    Vec3 position(std::size_t i) const { return {x[i], y[i], z[i]}; }

    friend bool operator==(const TrajectorySnapshot&, const TrajectorySnapshot&) = default;
};

/// Self-describing preamble of a trajectory container: everything needed to
/// re-derive the scenario and ground truth without the original config.
struct TrajectoryHeader {
    std::uint16_t schema_version = 1;
    double dt = 1.0;
    double mean_wind = 0.0;
    Vec3 domain_min;
    Vec3 domain_max;
    TxConfig tx;
    std::array<double, 2> p_deg{0.0, 0.0};
    std::uint64_t seed = 0;
    std::uint32_t n_steps = 0;

    friend bool operator==(const TrajectoryHeader&, const TrajectoryHeader&) = default;
};

inline TrajectoryHeader make_trajectory_header(const TxConfig& tx, const SimParams& params,
                                               std::uint32_t n_steps) {
    TrajectoryHeader h;
    h.dt = params.dt;
    h.mean_wind = params.mean_wind;
    h.domain_min = params.domain_min;
    h.domain_max = params.domain_max;
    h.tx = tx;
    h.p_deg = params.p_deg;
    h.seed = params.seed;
    h.n_steps = n_steps;
    return h;
}

}  // namespace plume
