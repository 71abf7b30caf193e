#include "plume/ratio_estimator.hpp"

#include <algorithm>
#include <cmath>

#include "plume/errors.hpp"

namespace plume {

void RatioEstimatorParams::validate() const {
    if (!(velocity_scale > 0.0) || !std::isfinite(velocity_scale)) {
        throw ConfigError("RatioEstimatorParams: velocity_scale must be positive");
    }
    if (!(release_ratio > 0.0) || !std::isfinite(release_ratio)) {
        throw ConfigError("RatioEstimatorParams: release_ratio must be positive");
    }
    if (!(p_deg2 > 0.0 && p_deg2 < 1.0)) {
        throw ConfigError(
            "RatioEstimatorParams: p_deg2 must lie strictly inside (0,1); the endpoints make "
            "the log-ratio inversion degenerate");
    }
    if (!(d_max > 0.0) || !std::isfinite(d_max)) {
        throw ConfigError("RatioEstimatorParams: d_max must be positive");
    }
}

double estimate_distance_from_ratio(double observed_ratio, const RatioEstimatorParams& params) {
    params.validate();
    if (!(observed_ratio > 0.0)) {
        throw DataError("estimate_distance_from_ratio: observed ratio must be positive");
    }
    const double raw = params.velocity_scale *
                       (std::log(observed_ratio) - std::log(params.release_ratio)) /
                       std::log1p(-params.p_deg2);
    return std::clamp(raw, 0.0, params.d_max);
}

void VelocityFitAccumulator::add(double steps_since_release, double distance_to_source) {
    sxx_ += steps_since_release * steps_since_release;
    sxy_ += steps_since_release * distance_to_source;
    sy_ += distance_to_source;
    syy_ += distance_to_source * distance_to_source;
    ++n_;
}

void VelocityFitAccumulator::add_snapshot(const TrajectorySnapshot& snapshot, const Vec3& source,
                                          Species species) {
    const std::uint8_t want = static_cast<std::uint8_t>(species);
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
        if (snapshot.species[i] != want) continue;
        const double age = static_cast<double>(snapshot.step - snapshot.release_step[i]);
        add(age, distance(snapshot.position(i), source));
    }
}

VelocityFit VelocityFitAccumulator::finish() const {
    if (n_ < 2) {
        throw DataError("velocity fit: need at least 2 (age, distance) points");
    }
    if (!(sxx_ > 0.0)) {
        throw DataError("velocity fit: all ages are zero, slope undefined");
    }
    VelocityFit fit;
    fit.n = n_;
    fit.scale = sxy_ / sxx_;
    const double ss_res = syy_ - 2.0 * fit.scale * sxy_ + fit.scale * fit.scale * sxx_;
    const double ss_tot = syy_ - sy_ * sy_ / static_cast<double>(n_);
    if (ss_tot > 0.0) {
        fit.r_squared = 1.0 - ss_res / ss_tot;
    } else {
        // all distances identical; a perfect fit iff residuals vanish
        fit.r_squared = ss_res <= 1e-12 * std::max(1.0, syy_) ? 1.0 : 0.0;
    }
    return fit;
}

VelocityFit fit_velocity_scale(std::span<const TrajectorySnapshot> snapshots, const Vec3& source) {
    VelocityFitAccumulator acc;
    for (const TrajectorySnapshot& s : snapshots) {
        acc.add_snapshot(s, source);
    }
    return acc.finish();
}

}  // namespace plume
