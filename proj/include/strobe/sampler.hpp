#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "strobe/dynamics.hpp"
#include "strobe/rng.hpp"

namespace strobe {

enum class BinningMode { position_bins, detector_window, two_level };

// Maps a measurement to a finite outcome set. Position bins partition the
// grid; a detector window yields the binary inside/outside pair; two_level
// addresses the driven qubit states {excited, ground}.
struct OutcomeBinning {
    BinningMode mode = BinningMode::detector_window;
    std::vector<double> bin_edges;  // position_bins: N+1 strictly increasing edges
    double detector_x = 0.0;
    double halfwidth = 0.5;

    std::size_t n_outcomes() const {
        switch (mode) {
            case BinningMode::position_bins: return bin_edges.size() - 1;
            default: return 2;
        }
    }

    // Representative coordinate of outcome n (bin centre); position modes only.
    double outcome_position(std::size_t n) const;
    bool is_position_based() const { return mode != BinningMode::two_level; }

    static OutcomeBinning uniform_bins(const GridSpec& grid, std::size_t n_bins);
    static OutcomeBinning window(double center, double halfwidth);
    static OutcomeBinning two_level();

    void validate(const GridSpec& grid) const;
};

struct ProbabilityVector {
    std::vector<double> probs;

    void validate() const;
};

// A measured system: either a free Gaussian packet living on a grid, or a
// resonantly driven two-level atom.
struct FreeGaussianSystem {
    GaussianPacket packet;
    GridSpec grid;
    PhysicalConstants consts;
};

struct RabiSystem {
    RabiSpec spec;
};

using System = std::variant<FreeGaussianSystem, RabiSystem>;

// Born probabilities of the binned measurement on state psi.
ProbabilityVector outcome_probabilities(const WaveFunction& psi, const OutcomeBinning& binning);

// Inverse-CDF draw over half-open cumulative intervals [c_{n-1}, c_n).
std::size_t sample_outcome(const ProbabilityVector& pv, const RandomSource& rng,
                           std::uint64_t event, std::uint32_t draw = 0);

// Evaluates Born probabilities and densities of a System at arbitrary times.
// Immutable after construction and safe to share across threads; the free
// packet is propagated spectrally from a cached momentum representation, so
// each probe time acts on a fresh copy of the initial state.
class SystemEvolver {
public:
    explicit SystemEvolver(System system);

    const System& system() const { return system_; }
    bool on_grid() const;
    const GridSpec& grid() const;
    const PhysicalConstants& consts() const;

    WaveFunction state_at(double t) const;              // grid systems only
    std::vector<double> density_at(double t) const;     // |psi(t)|^2 on the grid
    ProbabilityVector probabilities(const OutcomeBinning& binning, double t) const;

private:
    System system_;
    std::vector<std::complex<double>> spectrum_;  // FFT of the prepared packet
    GridSpec grid_;
    PhysicalConstants consts_;
};

struct CountsMatrix {
    std::vector<std::vector<std::uint64_t>> counts;  // [outcome][time]
    std::vector<double> times;                       // t_m = t0 + m*tau, tau = T/M
    std::uint64_t shots_per_time = 0;

    std::size_t n_outcomes() const { return counts.size(); }
    std::size_t n_times() const { return times.size(); }
    std::uint64_t row_total(std::size_t n) const;
    std::uint64_t column_total(std::size_t m) const;
    void validate() const;

    CountsMatrix& merge(const CountsMatrix& other);  // elementwise sum of disjoint partitions
};

// Performs L projective measurements on fresh copies at each of the M probe
// times t_m = t0 + m T/M, m = 0..M-1. The draw for (shot j, column m) depends
// only on (seed, m, j), so any worker partition of the shots yields the same
// matrix.
CountsMatrix build_counts_matrix(const System& system, const OutcomeBinning& binning, double t0,
                                 double T, std::size_t M, std::uint64_t L, const SeedSpec& seed,
                                 unsigned workers = 1);

// Shot-range variant used by the worker partition tests.
CountsMatrix build_counts_partition(const SystemEvolver& evolver, const OutcomeBinning& binning,
                                    double t0, double T, std::size_t M, std::uint64_t shot_begin,
                                    std::uint64_t shot_end, const SeedSpec& seed);

}  // namespace strobe
