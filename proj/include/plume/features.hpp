#pragma once

// Whiff/blank segmentation and the scalar signal features derived from an
// observation window. A sample belongs to a whiff when its count reaches
// half the window mean; an all-zero window is one long blank.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plume/receiver.hpp"

namespace plume {

struct Run {
    std::uint32_t start = 0;
    std::uint32_t length = 0;
    bool is_whiff = false;
};

struct WhiffSegmentation {
    double threshold = 0.0;
    std::vector<Run> runs;  // maximal runs, in order, alternating
    std::uint32_t n_whiffs = 0;
    std::uint32_t n_blanks = 0;
    std::uint32_t whiff_samples = 0;
};

/// Half the empirical mean of the series.
double whiff_threshold(std::span<const std::uint32_t> y);

WhiffSegmentation segment(std::span<const std::uint32_t> y);

/// Mean count over the whole window.
double mean_intensity(std::span<const std::uint32_t> y);

/// Mean count over whiff samples; 0 when the window has no whiffs.
double whiff_mean_intensity(std::span<const std::uint32_t> y, const WhiffSegmentation& seg);

/// Mean |backward difference| over whiff samples; the first window sample has
/// no predecessor and is excluded. 0 when nothing qualifies.
double whiff_slope_magnitude(std::span<const std::uint32_t> y, const WhiffSegmentation& seg);

/// Fraction of the window inside whiffs divided by the number of whiffs.
double mean_whiff_duration(const WhiffSegmentation& seg, std::size_t window_len);

/// Fraction of the window inside blanks divided by the number of blanks.
double mean_blank_duration(const WhiffSegmentation& seg, std::size_t window_len);

/// Fraction of samples inside whiffs, in [0,1].
double intermittency_factor(const WhiffSegmentation& seg, std::size_t window_len);

/// Ratio of mean observed counts, species 2 over species 1, with an additive
/// epsilon in both numerator and denominator. Strictly positive.
double observed_type_ratio(std::span<const std::uint32_t> y1, std::span<const std::uint32_t> y2,
                           double epsilon);

// ---------------------------------------------------------------------------

enum class Feature : std::uint8_t {
    observed_ratio = 0,
    mean_intensity,
    whiff_intensity,
    whiff_slope,
    whiff_duration,
    blank_duration,
    intermittency,
};

inline constexpr std::size_t kFeatureCount = 7;

const char* feature_name(Feature f);

/// Ordered feature subset, canonically [observed_ratio, mean_intensity, ...].
struct FeatureMask {
    std::uint8_t bits = 0;

    static FeatureMask all() { return {(1u << kFeatureCount) - 1}; }
    static FeatureMask of(std::initializer_list<Feature> fs) {
        FeatureMask m;
        for (Feature f : fs) m.set(f);
        return m;
    }

    void set(Feature f) { bits |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(f)); }
    bool contains(Feature f) const {
        return bits & (1u << static_cast<unsigned>(f));
    }
    std::size_t count() const { return static_cast<std::size_t>(__builtin_popcount(bits)); }
    bool empty() const { return bits == 0; }

    friend bool operator==(FeatureMask a, FeatureMask b) = default;
};

/// Comma-separated feature names for CSV headers and reports.
std::string mask_to_string(FeatureMask mask);

/// Parses names like "r_obs,intermittency". Throws ConfigError on unknown names.
FeatureMask mask_from_string(const std::string& text);

struct FeatureVector {
    std::vector<double> values;  // canonical feature order, masked
    FeatureMask mask;
    bool log_applied = false;
};

/// Additive offset inside the log transform, admitting exact-zero features.
inline constexpr double kLogOffset = 1e-6;

/// Computes the masked features of a window; when `apply_log` is set each
/// value becomes log(value + 1e-6).
FeatureVector build_feature_vector(const ObservationWindow& window, FeatureMask mask,
                                   double epsilon, bool apply_log = true);

}  // namespace plume
