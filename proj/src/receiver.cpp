#include "plume/receiver.hpp"

#include <algorithm>
#include <numeric>

#include "plume/errors.hpp"
#include "plume/kernels.hpp"

namespace plume {

std::array<std::uint32_t, 2> count_in_sphere(const TrajectorySnapshot& snapshot,
                                             const RxConfig& rx) {
    std::uint32_t counts[2] = {0, 0};
    kernels::active().count_sphere(snapshot.x.data(), snapshot.y.data(), snapshot.z.data(),
                                   snapshot.species.data(), snapshot.size(), rx.position.x,
                                   rx.position.y, rx.position.z, rx.radius * rx.radius, counts);
    return {counts[0], counts[1]};
}

ObservationWindow sample_window(std::span<const TrajectorySnapshot> snapshots, const RxConfig& rx,
                                std::uint32_t t0_step, std::uint32_t length,
                                const Vec3& tx_position) {
    if (length < 1) {
        throw DataError("sample_window: window length must be >= 1");
    }
    // locate t0 among (sorted, consecutive) snapshot steps
    const auto it = std::lower_bound(
        snapshots.begin(), snapshots.end(), t0_step,
        [](const TrajectorySnapshot& s, std::uint32_t step) { return s.step < step; });
    const std::size_t first = static_cast<std::size_t>(it - snapshots.begin());
    if (first + length > snapshots.size()) {
        throw DataError("sample_window: window exceeds available snapshots");
    }
    ObservationWindow w;
    w.rx = rx;
    w.t0_step = t0_step;
    w.true_distance = distance(tx_position, rx.position);
    w.y1.resize(length);
    w.y2.resize(length);
    for (std::uint32_t l = 0; l < length; ++l) {
        const TrajectorySnapshot& snap = snapshots[first + l];
        if (snap.step != t0_step + l) {
            throw DataError("sample_window: snapshots do not cover the window contiguously");
        }
        const auto counts = count_in_sphere(snap, rx);
        w.y1[l] = counts[0];
        w.y2[l] = counts[1];
    }
    return w;
}

CountTableBuilder::CountTableBuilder(std::vector<RxConfig> receivers, std::uint32_t first_step,
                                     std::uint32_t n_steps)
    : receivers_(std::move(receivers)) {
    table_.first_step = first_step;
    table_.n_steps = n_steps;
    table_.n_rx = receivers_.size();
    table_.y1.assign(table_.n_rx * n_steps, 0);
    table_.y2.assign(table_.n_rx * n_steps, 0);
}

void CountTableBuilder::add(const TrajectorySnapshot& snapshot) {
    if (snapshot.step < table_.first_step || snapshot.step >= table_.first_step + table_.n_steps) {
        return;
    }
    const std::size_t n = snapshot.size();
    const std::uint32_t col = snapshot.step - table_.first_step;

    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::sort(order_.begin(), order_.end(), [&snapshot](std::uint32_t a, std::uint32_t b) {
        return snapshot.x[a] < snapshot.x[b];
    });
    sx_.resize(n);
    sy_.resize(n);
    sz_.resize(n);
    sspecies_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t j = order_[i];
        sx_[i] = snapshot.x[j];
        sy_[i] = snapshot.y[j];
        sz_[i] = snapshot.z[j];
        sspecies_[i] = snapshot.species[j];
    }

    const auto& kern = kernels::active();
    for (std::size_t r = 0; r < receivers_.size(); ++r) {
        const RxConfig& rx = receivers_[r];
        const auto lo = std::lower_bound(sx_.begin(), sx_.end(), rx.position.x - rx.radius);
        const auto hi = std::upper_bound(lo, sx_.end(), rx.position.x + rx.radius);
        const std::size_t begin = static_cast<std::size_t>(lo - sx_.begin());
        const std::size_t span = static_cast<std::size_t>(hi - lo);
        if (span == 0) continue;
        std::uint32_t counts[2] = {0, 0};
        kern.count_sphere(sx_.data() + begin, sy_.data() + begin, sz_.data() + begin,
                          sspecies_.data() + begin, span, rx.position.x, rx.position.y,
                          rx.position.z, rx.radius * rx.radius, counts);
        table_.y1[r * table_.n_steps + col] = counts[0];
        table_.y2[r * table_.n_steps + col] = counts[1];
    }
}

CountTable CountTableBuilder::take() { return std::move(table_); }

ObservationWindow window_from_table(const CountTable& table, std::size_t rx_index,
                                    const RxConfig& rx, std::uint32_t t0_step,
                                    std::uint32_t length, const Vec3& tx_position) {
    if (t0_step < table.first_step ||
        t0_step + length > table.first_step + table.n_steps) {
        throw DataError("window_from_table: window outside the tabulated step range");
    }
    const std::uint32_t off = t0_step - table.first_step;
    ObservationWindow w;
    w.rx = rx;
    w.t0_step = t0_step;
    w.true_distance = distance(tx_position, rx.position);
    const auto s1 = table.series1(rx_index);
    const auto s2 = table.series2(rx_index);
    w.y1.assign(s1.begin() + off, s1.begin() + off + length);
    w.y2.assign(s2.begin() + off, s2.begin() + off + length);
    return w;
}

}  // namespace plume
