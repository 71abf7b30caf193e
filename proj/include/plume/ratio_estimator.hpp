#pragma once

// Closed-form source-distance estimate from the observed abundance ratio of
// the degradable species over the non-degradable one. Inverting the expected
// per-step survival decay gives
//
//   d_hat = clamp( v * (log(r_obs) - log(r0)) / log(1 - p_deg2), 0, d_max )
//
// with r0 the release ratio and v the fitted distance-per-step scale.

#include <cstdint>
#include <span>

#include "plume/trajectory.hpp"
#include "plume/types.hpp"

namespace plume {

struct RatioEstimatorParams {
    double velocity_scale = 1.0;  ///< distance travelled per sampling step
    double release_ratio = 1.0;   ///< p2/p1 at the source
    double p_deg2 = 0.03;         ///< per-step degradation probability of species 2
    double d_max = 1.0;           ///< largest distance supported by the data

    /// p_deg2 at 0 or 1 makes the inversion degenerate and is rejected.
    void validate() const;
};

double estimate_distance_from_ratio(double observed_ratio, const RatioEstimatorParams& params);

/// Least-squares slope through the origin of (steps since release, distance
/// to source), pooled over particles and snapshots.
struct VelocityFit {
    double scale = 0.0;
    double r_squared = 0.0;
    std::uint64_t n = 0;
};

class VelocityFitAccumulator {
public:
    void add(double steps_since_release, double distance_to_source);

    /// Pools alive particles of the given species from one snapshot.
    void add_snapshot(const TrajectorySnapshot& snapshot, const Vec3& source,
                      Species species = Species::type1);

    /// Throws DataError with fewer than 2 points or a degenerate abscissa.
    VelocityFit finish() const;

private:
    double sxx_ = 0.0, sxy_ = 0.0, sy_ = 0.0, syy_ = 0.0;
    std::uint64_t n_ = 0;
};

/// Convenience wrapper over the accumulator. Only the non-degradable species
/// feeds the fit, so degradation cannot bias it.
VelocityFit fit_velocity_scale(std::span<const TrajectorySnapshot> snapshots, const Vec3& source);

}  // namespace plume
