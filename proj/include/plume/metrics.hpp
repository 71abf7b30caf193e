#pragma once

#include <span>

namespace plume {

/// Squared estimation error normalized by the error of always guessing the
/// mean of the true values: sum((est-true)^2) / sum((true-mean)^2).
/// 0 = perfect, 1 = no better than the mean guess. Throws MetricError on
/// mismatched lengths, fewer than 2 samples, or identical truths.
double normalized_squared_error(std::span<const double> estimates,
                                std::span<const double> truths);

}  // namespace plume
