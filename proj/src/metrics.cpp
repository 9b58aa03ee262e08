#include "metarl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metarl {

std::vector<double> moving_average(const std::vector<double>& series, int window) {
    if (series.empty()) throw std::invalid_argument("moving_average: empty series");
    if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");

    std::vector<double> out(series.size());
    for (std::size_t k = 0; k < series.size(); ++k) {
        const std::size_t first = k + 1 >= static_cast<std::size_t>(window)
                                      ? k + 1 - static_cast<std::size_t>(window)
                                      : 0;
        double sum = 0.0;
        for (std::size_t i = first; i <= k; ++i) sum += series[i];
        out[k] = sum / static_cast<double>(k - first + 1);
    }
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile: empty input");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p out of range");

    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

IqrBands iqr_bands(const std::vector<std::vector<double>>& per_seed_series) {
    if (per_seed_series.size() < 2)
        throw std::invalid_argument("iqr_bands: need at least two series");
    const std::size_t length = per_seed_series.front().size();
    for (const auto& s : per_seed_series)
        if (s.size() != length) throw std::invalid_argument("iqr_bands: mismatched lengths");

    IqrBands bands;
    bands.q1.resize(length);
    bands.median.resize(length);
    bands.q3.resize(length);
    std::vector<double> column(per_seed_series.size());
    for (std::size_t k = 0; k < length; ++k) {
        for (std::size_t s = 0; s < per_seed_series.size(); ++s)
            column[s] = per_seed_series[s][k];
        bands.q1[k] = quantile(column, 0.25);
        bands.median[k] = quantile(column, 0.50);
        bands.q3[k] = quantile(column, 0.75);
    }
    return bands;
}

}  // namespace metarl
