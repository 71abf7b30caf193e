#include <doctest.h>

#include <cmath>

#include "plume/errors.hpp"
#include "plume/receiver.hpp"
#include "plume/rng.hpp"

using namespace plume;

namespace {

TrajectorySnapshot random_snapshot(std::uint32_t step, std::size_t n, RandomStream& rng) {
    TrajectorySnapshot s;
    s.step = step;
    for (std::size_t i = 0; i < n; ++i) {
        s.add(rng.bernoulli(0.4) ? Species::type2 : Species::type1, 0,
              {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    }
    return s;
}

std::array<std::uint32_t, 2> brute_force_count(const TrajectorySnapshot& s, const RxConfig& rx) {
    std::array<std::uint32_t, 2> counts{0, 0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (distance(s.position(i), rx.position) <= rx.radius) {
            ++counts[s.species[i] - 1];
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("count_in_sphere: interior and exact-boundary molecules are counted") {
    TrajectorySnapshot s;
    s.step = 0;
    s.add(Species::type1, 0, {1.0, 1.0, 1.0});        // at the center
    s.add(Species::type2, 0, {1.5, 1.0, 1.0});        // exactly on the boundary
    s.add(Species::type1, 0, {1.0 + 0.5001, 1.0, 1.0});  // just outside

    RxConfig rx;
    rx.position = {1.0, 1.0, 1.0};
    rx.radius = 0.5;
    const auto counts = count_in_sphere(s, rx);
    CHECK(counts[0] == 1);
    CHECK(counts[1] == 1);
}

TEST_CASE("count_in_sphere: random snapshots against the brute-force oracle") {
    RandomStream rng(41, StreamId::dataset);
    for (int trial = 0; trial < 30; ++trial) {
        const TrajectorySnapshot s = random_snapshot(0, 50, rng);
        RxConfig rx;
        rx.position = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        rx.radius = rng.uniform(0.1, 1.5);
        const auto got = count_in_sphere(s, rx);
        const auto want = brute_force_count(s, rx);
        CHECK(got == want);
    }
}

TEST_CASE("count table builder equals per-snapshot brute force for many receivers") {
    RandomStream rng(43, StreamId::dataset);
    std::vector<RxConfig> rxs;
    for (int i = 0; i < 25; ++i) {
        rxs.push_back({{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)},
                       rng.uniform(0.1, 0.8)});
    }
    CountTableBuilder builder(rxs, 2, 6);
    std::vector<TrajectorySnapshot> snaps;
    for (std::uint32_t step = 0; step < 10; ++step) {
        snaps.push_back(random_snapshot(step, 120, rng));
        builder.add(snaps.back());
    }
    const CountTable table = builder.take();
    for (std::size_t r = 0; r < rxs.size(); ++r) {
        for (std::uint32_t step = 2; step < 8; ++step) {
            const auto want = brute_force_count(snaps[step], rxs[r]);
            CHECK(table.series1(r)[step - 2] == want[0]);
            CHECK(table.series2(r)[step - 2] == want[1]);
        }
    }
}

TEST_CASE("sample_window: fills counts and ground truth, rejects bad ranges") {
    RandomStream rng(47, StreamId::dataset);
    std::vector<TrajectorySnapshot> snaps;
    for (std::uint32_t step = 0; step < 12; ++step) {
        snaps.push_back(random_snapshot(step, 60, rng));
    }
    RxConfig rx;
    rx.position = {0.5, 0.0, 0.0};
    rx.radius = 1.0;
    const Vec3 tx{-1.0, 0.0, 0.0};

    const ObservationWindow w = sample_window(snaps, rx, 3, 5, tx);
    CHECK(w.length() == 5);
    CHECK(w.t0_step == 3);
    CHECK(w.true_distance == doctest::Approx(1.5));
    for (std::uint32_t l = 0; l < 5; ++l) {
        const auto want = brute_force_count(snaps[3 + l], rx);
        CHECK(w.y1[l] == want[0]);
        CHECK(w.y2[l] == want[1]);
    }

    CHECK_THROWS_AS(sample_window(snaps, rx, 8, 5, tx), DataError);
    CHECK_THROWS_AS(sample_window(snaps, rx, 0, 13, tx), DataError);
}

TEST_CASE("a receiver covering the whole domain counts every particle") {
    RandomStream rng(53, StreamId::dataset);
    const TrajectorySnapshot s = random_snapshot(0, 500, rng);
    RxConfig rx;
    rx.position = {0, 0, 0};
    rx.radius = 100.0;
    const auto counts = count_in_sphere(s, rx);
    std::array<std::uint32_t, 2> want{0, 0};
    for (std::uint8_t sp : s.species) ++want[sp - 1];
    CHECK(counts == want);
}

TEST_CASE("disjoint receivers never double-count") {
    RandomStream rng(59, StreamId::dataset);
    const TrajectorySnapshot s = random_snapshot(0, 300, rng);
    // a row of disjoint receivers along x
    std::uint64_t total = 0;
    for (int i = 0; i < 8; ++i) {
        RxConfig rx;
        rx.position = {-1.75 + 0.5 * i, 0.0, 0.0};
        rx.radius = 0.24;
        const auto counts = count_in_sphere(s, rx);
        total += counts[0] + counts[1];
    }
    CHECK(total <= s.size());
}
