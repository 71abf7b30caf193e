#include "plume/metrics.hpp"

#include "plume/errors.hpp"

namespace plume {

double normalized_squared_error(std::span<const double> estimates,
                                std::span<const double> truths) {
    if (estimates.size() != truths.size()) {
        throw MetricError("normalized_squared_error: estimate/truth length mismatch");
    }
    const std::size_t n = truths.size();
    if (n < 2) {
        throw MetricError("normalized_squared_error: need at least 2 samples");
    }
    double sum = 0.0;
    for (double d : truths) sum += d;
    const double mean = sum / static_cast<double>(n);

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = estimates[i] - truths[i];
        const double c = truths[i] - mean;
        num += e * e;
        den += c * c;
    }
    if (den == 0.0) {
        throw MetricError(
            "normalized_squared_error: all true values identical, normalization undefined");
    }
    return num / den;
}

}  // namespace plume
