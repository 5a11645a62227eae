#pragma once

#include <span>
#include <vector>

namespace sadiv {

double mean(std::span<const double> x);
double median(std::span<const double> x);

// Pearson product-moment correlation; 0 if either side is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

// Kendall's tau-b via merge-sort inversion counting (O(n log n)).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Fraction of `sample` strictly below `value`, as a percentage in [0, 100].
double percentile_below(std::span<const double> sample, double value);

}  // namespace sadiv
