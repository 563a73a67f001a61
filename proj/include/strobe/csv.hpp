#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strobe/clock.hpp"
#include "strobe/continuous.hpp"
#include "strobe/detector.hpp"
#include "strobe/sampler.hpp"
#include "strobe/stroboscope.hpp"

namespace strobe::csv {

// Shortest representation that round-trips exactly; '.' decimal separator.
std::string format_double(double v);

// counts.csv: one row per counts-matrix cell.
std::string counts_csv(const CountsMatrix& counts);

// dist.csv: one row per (distribution, time) pair; undefined rows carry the
// literal UNDEFINED in the prob column.
std::string dist_csv(const std::vector<TimeDistribution>& dists);

// clock.csv: continuous reference curves on their evaluation nodes.
std::string clock_csv(const ClockDistribution& clock);
// Same layout for any density-over-time curve (e.g. the exact flow curve).
std::string curve_csv(int outcome, const std::vector<double>& times,
                      const std::vector<double>& density);

// moments.csv: labeled blocks of second-moment evolutions.
struct MomentBlock {
    std::string source;  // ode | closed | lindblad | ensemble
    std::vector<MomentSample> samples;
};
std::string moments_csv(const std::vector<MomentBlock>& blocks);

// trajectories.csv: per-trajectory readout records.
std::string trajectories_csv(const std::vector<Trajectory>& trajectories);

// clicks.csv: pooled click times by run.
std::string clicks_csv(const std::vector<ClickStream>& streams);

// zeno.csv: survival probability against the number of interruptions.
struct ZenoRow {
    std::uint64_t M = 0;
    double tau = 0.0;
    double survival = 0.0;
};
std::string zeno_csv(const std::vector<ZenoRow>& rows);

// Binary write with LF endings; raises IoError on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace strobe::csv
