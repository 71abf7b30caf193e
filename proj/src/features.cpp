#include "plume/features.hpp"

#include <cmath>

#include "plume/errors.hpp"

namespace plume {

namespace {

double mean_of(std::span<const std::uint32_t> y) {
    double sum = 0.0;
    for (std::uint32_t v : y) sum += v;
    return y.empty() ? 0.0 : sum / static_cast<double>(y.size());
}

}  // namespace

double whiff_threshold(std::span<const std::uint32_t> y) {
    if (y.empty()) {
        throw DataError("whiff_threshold: empty series");
    }
    return 0.5 * mean_of(y);
}

WhiffSegmentation segment(std::span<const std::uint32_t> y) {
    if (y.empty()) {
        throw DataError("segment: empty series");
    }
    WhiffSegmentation seg;
    seg.threshold = whiff_threshold(y);
    const std::uint32_t n = static_cast<std::uint32_t>(y.size());
    if (seg.threshold == 0.0) {
        // all-zero window: a single blank, no whiffs
        seg.runs.push_back({0, n, false});
        seg.n_blanks = 1;
        return seg;
    }
    const auto in_whiff = [&](std::uint32_t l) {
        return static_cast<double>(y[l]) >= seg.threshold;
    };
    std::uint32_t start = 0;
    bool cur = in_whiff(0);
    for (std::uint32_t l = 1; l <= n; ++l) {
        if (l == n || in_whiff(l) != cur) {
            seg.runs.push_back({start, l - start, cur});
            if (cur) {
                ++seg.n_whiffs;
                seg.whiff_samples += l - start;
            } else {
                ++seg.n_blanks;
            }
            if (l < n) {
                start = l;
                cur = in_whiff(l);
            }
        }
    }
    return seg;
}

double mean_intensity(std::span<const std::uint32_t> y) { return mean_of(y); }

double whiff_mean_intensity(std::span<const std::uint32_t> y, const WhiffSegmentation& seg) {
    if (seg.whiff_samples == 0) return 0.0;
    double sum = 0.0;
    for (const Run& r : seg.runs) {
        if (!r.is_whiff) continue;
        for (std::uint32_t l = r.start; l < r.start + r.length; ++l) {
            sum += y[l];
        }
    }
    return sum / static_cast<double>(seg.whiff_samples);
}

double whiff_slope_magnitude(std::span<const std::uint32_t> y, const WhiffSegmentation& seg) {
    double sum = 0.0;
    std::uint64_t n = 0;
    for (const Run& r : seg.runs) {
        if (!r.is_whiff) continue;
        for (std::uint32_t l = r.start; l < r.start + r.length; ++l) {
            if (l == 0) continue;  // no predecessor
            sum += std::fabs(static_cast<double>(y[l]) - static_cast<double>(y[l - 1]));
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double mean_whiff_duration(const WhiffSegmentation& seg, std::size_t window_len) {
    if (seg.n_whiffs == 0) return 0.0;
    const double fraction =
        static_cast<double>(seg.whiff_samples) / static_cast<double>(window_len);
    return fraction / static_cast<double>(seg.n_whiffs);
}

double mean_blank_duration(const WhiffSegmentation& seg, std::size_t window_len) {
    if (seg.n_blanks == 0) return 0.0;
    const std::uint32_t blank_samples =
        static_cast<std::uint32_t>(window_len) - seg.whiff_samples;
    const double fraction = static_cast<double>(blank_samples) / static_cast<double>(window_len);
    return fraction / static_cast<double>(seg.n_blanks);
}

double intermittency_factor(const WhiffSegmentation& seg, std::size_t window_len) {
    return static_cast<double>(seg.whiff_samples) / static_cast<double>(window_len);
}

double observed_type_ratio(std::span<const std::uint32_t> y1, std::span<const std::uint32_t> y2,
                           double epsilon) {
    if (!(epsilon > 0.0)) {
        throw DataError("observed_type_ratio: epsilon must be positive");
    }
    return (mean_of(y2) + epsilon) / (mean_of(y1) + epsilon);
}

const char* feature_name(Feature f) {
    switch (f) {
        case Feature::observed_ratio: return "r_obs";
        case Feature::mean_intensity: return "mean_intensity";
        case Feature::whiff_intensity: return "whiff_intensity";
        case Feature::whiff_slope: return "whiff_slope";
        case Feature::whiff_duration: return "whiff_duration";
        case Feature::blank_duration: return "blank_duration";
        case Feature::intermittency: return "intermittency";
    }
    return "?";
}

std::string mask_to_string(FeatureMask mask) {
    std::string out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const Feature f = static_cast<Feature>(i);
        if (!mask.contains(f)) continue;
        if (!out.empty()) out += ',';
        out += feature_name(f);
    }
    return out;
}

FeatureMask mask_from_string(const std::string& text) {
    FeatureMask mask;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string name = text.substr(pos, comma - pos);
        const auto b = name.find_first_not_of(" \t");
        const auto e = name.find_last_not_of(" \t");
        name = b == std::string::npos ? std::string() : name.substr(b, e - b + 1);
        if (!name.empty()) {
            bool found = false;
            for (std::size_t i = 0; i < kFeatureCount; ++i) {
                if (name == feature_name(static_cast<Feature>(i))) {
                    mask.set(static_cast<Feature>(i));
                    found = true;
                    break;
                }
            }
            if (name == "all") {
                mask = FeatureMask::all();
                found = true;
            }
            if (!found) {
                throw ConfigError("unknown feature name '" + name + "'");
            }
        }
        pos = comma + 1;
    }
    return mask;
}

FeatureVector build_feature_vector(const ObservationWindow& window, FeatureMask mask,
                                   double epsilon, bool apply_log) {
    if (mask.empty()) {
        throw ConfigError("build_feature_vector: empty feature mask");
    }
    FeatureVector fv;
    fv.mask = mask;
    fv.log_applied = apply_log;
    fv.values.reserve(mask.count());

    const std::span<const std::uint32_t> y1(window.y1);
    const std::span<const std::uint32_t> y2(window.y2);
    WhiffSegmentation seg;
    const bool needs_seg = mask.contains(Feature::whiff_intensity) ||
                           mask.contains(Feature::whiff_slope) ||
                           mask.contains(Feature::whiff_duration) ||
                           mask.contains(Feature::blank_duration) ||
                           mask.contains(Feature::intermittency);
    if (needs_seg) {
        seg = segment(y1);
    }
    const std::size_t len = window.length();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const Feature f = static_cast<Feature>(i);
        if (!mask.contains(f)) continue;
        double v = 0.0;
        switch (f) {
            case Feature::observed_ratio: v = observed_type_ratio(y1, y2, epsilon); break;
            case Feature::mean_intensity: v = mean_intensity(y1); break;
            case Feature::whiff_intensity: v = whiff_mean_intensity(y1, seg); break;
            case Feature::whiff_slope: v = whiff_slope_magnitude(y1, seg); break;
            case Feature::whiff_duration: v = mean_whiff_duration(seg, len); break;
            case Feature::blank_duration: v = mean_blank_duration(seg, len); break;
            case Feature::intermittency: v = intermittency_factor(seg, len); break;
        }
        fv.values.push_back(apply_log ? std::log(v + kLogOffset) : v);
    }
    return fv;
}

}  // namespace plume
