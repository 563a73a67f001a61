#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "strobe/sampler.hpp"
#include "strobe/stroboscope.hpp"

namespace strobe {

// Total variation distance between two defined distributions on the same time
// points.
double tv_distance(const TimeDistribution& a, const TimeDistribution& b);

double dist_mean(const TimeDistribution& dist);
double dist_variance(const TimeDistribution& dist);

double sample_mean(const std::vector<double>& xs);
// Unbiased (n - 1) sample variance.
double sample_variance(const std::vector<double>& xs);

// Least-squares polynomial fit; returns coefficients c[0] + c[1] x + ... +
// c[degree] x^degree.
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y,
                            std::size_t degree);

// Mean / variance of the measured position in one time column of a counts
// matrix (position-binned outcomes only).
double column_position_mean(const CountsMatrix& counts, const OutcomeBinning& binning,
                            std::size_t column);
double column_position_variance(const CountsMatrix& counts, const OutcomeBinning& binning,
                                std::size_t column);

// Wilson-Hilferty approximation to the chi-square quantile at z standard
// normal deviations.
inline double chi2_critical(double dof, double z) {
    const double a = 2.0 / (9.0 * dof);
    const double c = 1.0 - a + z * std::sqrt(a);
    return dof * c * c * c;
}

}  // namespace strobe
