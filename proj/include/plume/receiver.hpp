#pragma once

// Transparent spherical receivers: per-species molecule counts from
// trajectory snapshots. Counting is boundary inclusive and non-absorbing;
// overlapping receivers double-count.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "plume/trajectory.hpp"
#include "plume/types.hpp"

namespace plume {

/// Per-species count time series observed at one receiver, with the ground
/// truth attached for supervision.
struct ObservationWindow {
    RxConfig rx;
    std::uint32_t t0_step = 0;
    std::vector<std::uint32_t> y1;  // species 1 counts, one per sampling step
    std::vector<std::uint32_t> y2;  // species 2 counts
    double true_distance = 0.0;

    std::size_t length() const { return y1.size(); }
};

/// Counts alive molecules of each species within the receiver ball
/// (squared-distance test, boundary inclusive). Index 0 = species 1.
std::array<std::uint32_t, 2> count_in_sphere(const TrajectorySnapshot& snapshot,
                                             const RxConfig& rx);

/// Extracts the window [t0_step, t0_step+length) from consecutive snapshots.
/// Throws DataError if the snapshots do not cover the window.
ObservationWindow sample_window(std::span<const TrajectorySnapshot> snapshots, const RxConfig& rx,
                                std::uint32_t t0_step, std::uint32_t length,
                                const Vec3& tx_position);

/// Dense per-receiver count series over a step range, rx-major layout.
struct CountTable {
    std::uint32_t first_step = 0;
    std::uint32_t n_steps = 0;
    std::size_t n_rx = 0;
    std::vector<std::uint32_t> y1;  // [rx * n_steps + (step - first_step)]
    std::vector<std::uint32_t> y2;

    std::span<const std::uint32_t> series1(std::size_t rx) const {
        return {y1.data() + rx * n_steps, n_steps};
    }
    std::span<const std::uint32_t> series2(std::size_t rx) const {
        return {y2.data() + rx * n_steps, n_steps};
    }
};

/// Accumulates counts for many receivers while snapshots stream past.
/// Each snapshot is indexed by x once (sort + gather), then every receiver
/// queries only the particles inside its x-slab.
class CountTableBuilder {
public:
    CountTableBuilder(std::vector<RxConfig> receivers, std::uint32_t first_step,
                      std::uint32_t n_steps);

    void add(const TrajectorySnapshot& snapshot);

    CountTable take();

    const std::vector<RxConfig>& receivers() const { return receivers_; }

private:
    std::vector<RxConfig> receivers_;
    CountTable table_;
    // per-snapshot scratch, kept across calls to avoid reallocation
    std::vector<std::uint32_t> order_;
    std::vector<double> sx_, sy_, sz_;
    std::vector<std::uint8_t> sspecies_;
};

/// Slices one observation window out of a count table.
ObservationWindow window_from_table(const CountTable& table, std::size_t rx_index,
                                    const RxConfig& rx, std::uint32_t t0_step,
                                    std::uint32_t length, const Vec3& tx_position);

}  // namespace plume
