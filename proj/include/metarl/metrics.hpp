#pragma once

#include <vector>

namespace metarl {

/// Trailing mean with a truncated head window: element k averages elements
/// max(0, k-window+1)..k.
std::vector<double> moving_average(const std::vector<double>& series, int window = 20);

/// Percentile with linear interpolation between order statistics, p in [0, 1].
double quantile(std::vector<double> values, double p);

struct IqrBands {
    std::vector<double> q1;
    std::vector<double> median;
    std::vector<double> q3;
};

/// Per-index 25th/50th/75th percentiles across the given series. All series
/// must have equal length.
IqrBands iqr_bands(const std::vector<std::vector<double>>& per_seed_series);

}  // namespace metarl
