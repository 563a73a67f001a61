#include "strobe/stats.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "strobe/errors.hpp"

namespace strobe {

double tv_distance(const TimeDistribution& a, const TimeDistribution& b) {
    require(a.status == DistStatus::defined && b.status == DistStatus::defined,
            Errc::invalid_argument, "TV distance needs defined distributions");
    require(a.times.size() == b.times.size(), Errc::binning_mismatch,
            "distributions have different lengths");
    double tv = 0.0;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        require(std::abs(a.times[i] - b.times[i]) <= 1e-9 * (1.0 + std::abs(a.times[i])),
                Errc::binning_mismatch, "distribution time points differ");
        tv += std::abs(a.probs[i] - b.probs[i]);
    }
    return 0.5 * tv;
}

double dist_mean(const TimeDistribution& dist) {
    require(dist.status == DistStatus::defined, Errc::invalid_argument,
            "mean of an undefined distribution");
    double mu = 0.0;
    for (std::size_t i = 0; i < dist.times.size(); ++i) mu += dist.times[i] * dist.probs[i];
    return mu;
}

double dist_variance(const TimeDistribution& dist) {
    const double mu = dist_mean(dist);
    double var = 0.0;
    for (std::size_t i = 0; i < dist.times.size(); ++i) {
        const double d = dist.times[i] - mu;
        var += d * d * dist.probs[i];
    }
    return var;
}

double sample_mean(const std::vector<double>& xs) {
    require(!xs.empty(), Errc::invalid_argument, "mean of an empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    require(xs.size() >= 2, Errc::invalid_argument, "variance needs >= 2 samples");
    const double mu = sample_mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return s / static_cast<double>(xs.size() - 1);
}

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y,
                            std::size_t degree) {
    require(x.size() == y.size(), Errc::invalid_argument, "fit inputs have different lengths");
    require(x.size() >= degree + 1, Errc::invalid_argument, "fit is underdetermined");
    const auto rows = static_cast<Eigen::Index>(x.size());
    const auto cols = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double power = 1.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            design(i, j) = power;
            power *= x[static_cast<std::size_t>(i)];
        }
        rhs(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd coef = design.householderQr().solve(rhs);
    return std::vector<double>(coef.data(), coef.data() + coef.size());
}

double column_position_mean(const CountsMatrix& counts, const OutcomeBinning& binning,
                            std::size_t column) {
    require(binning.mode == BinningMode::position_bins, Errc::invalid_argument,
            "position statistics need position bins");
    require(column < counts.times.size(), Errc::invalid_argument, "column out of range");
    double total = 0.0;
    double mu = 0.0;
    for (std::size_t n = 0; n < counts.counts.size(); ++n) {
        const double c = static_cast<double>(counts.counts[n][column]);
        if (c == 0.0) continue;
        total += c;
        mu += c * binning.outcome_position(n);
    }
    require(total > 0.0, Errc::zero_denominator, "empty counts column");
    return mu / total;
}

double column_position_variance(const CountsMatrix& counts, const OutcomeBinning& binning,
                                std::size_t column) {
    const double mu = column_position_mean(counts, binning, column);
    double total = 0.0;
    double var = 0.0;
    for (std::size_t n = 0; n < counts.counts.size(); ++n) {
        const double c = static_cast<double>(counts.counts[n][column]);
        if (c == 0.0) continue;
        const double d = binning.outcome_position(n) - mu;
        total += c;
        var += c * d * d;
    }
    return var / total;
}

}  // namespace strobe
