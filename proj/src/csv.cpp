#include "strobe/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "strobe/errors.hpp"

namespace strobe::csv {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    require(res.ec == std::errc(), Errc::io_error, "number formatting failed");
    return std::string(buf, res.ptr);
}

namespace {

std::string dist_label(const TimeDistribution& d) {
    if (!std::isnan(d.threshold)) return format_double(d.threshold);
    return std::to_string(d.outcome);
}

}  // namespace

std::string counts_csv(const CountsMatrix& counts) {
    std::string out = "m,t_m,n,count\n";
    for (std::size_t m = 0; m < counts.n_times(); ++m)
        for (std::size_t n = 0; n < counts.n_outcomes(); ++n) {
            out += std::to_string(m);
            out += ',';
            out += format_double(counts.times[m]);
            out += ',';
            out += std::to_string(n);
            out += ',';
            out += std::to_string(counts.counts[n][m]);
            out += '\n';
        }
    return out;
}

std::string dist_csv(const std::vector<TimeDistribution>& dists) {
    std::string out = "kind,outcome_or_threshold,m,t_m,prob\n";
    for (const auto& d : dists) {
        const std::string head = std::string(dist_kind_name(d.kind)) + ',' + dist_label(d) + ',';
        for (std::size_t m = 0; m < d.times.size(); ++m) {
            out += head;
            out += std::to_string(m);
            out += ',';
            out += format_double(d.times[m]);
            out += ',';
            out += d.status == DistStatus::undefined ? "UNDEFINED" : format_double(d.probs[m]);
            out += '\n';
        }
    }
    return out;
}

std::string curve_csv(int outcome, const std::vector<double>& times,
                      const std::vector<double>& density) {
    require(times.size() == density.size(), Errc::invalid_argument,
            "curve arrays have different lengths");
    std::string out = "outcome,t,density\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out += std::to_string(outcome);
        out += ',';
        out += format_double(times[i]);
        out += ',';
        out += format_double(density[i]);
        out += '\n';
    }
    return out;
}

std::string clock_csv(const ClockDistribution& clock) {
    return curve_csv(static_cast<int>(clock.outcome), clock.times, clock.density);
}

std::string moments_csv(const std::vector<MomentBlock>& blocks) {
    std::string out = "t,mean_x,mean_p,var_x,var_p,cov,source\n";
    for (const auto& block : blocks)
        for (const auto& s : block.samples) {
            out += format_double(s.t);
            out += ',';
            out += format_double(s.state.mean_x);
            out += ',';
            out += format_double(s.state.mean_p);
            out += ',';
            out += format_double(s.state.var_x());
            out += ',';
            out += format_double(s.state.var_p());
            out += ',';
            out += format_double(s.state.sym_cov());
            out += ',';
            out += block.source;
            out += '\n';
        }
    return out;
}

std::string trajectories_csv(const std::vector<Trajectory>& trajectories) {
    std::string out = "traj_id,t,readout,cond_mean\n";
    for (const auto& traj : trajectories)
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            out += std::to_string(traj.id);
            out += ',';
            out += format_double(traj.times[i]);
            out += ',';
            out += format_double(traj.readouts[i]);
            out += ',';
            out += format_double(traj.cond_mean[i]);
            out += '\n';
        }
    return out;
}

std::string clicks_csv(const std::vector<ClickStream>& streams) {
    std::string out = "run_id,t_click\n";
    for (const auto& s : streams)
        for (double t : s.clicks) {
            out += std::to_string(s.run_id);
            out += ',';
            out += format_double(t);
            out += '\n';
        }
    return out;
}

std::string zeno_csv(const std::vector<ZenoRow>& rows) {
    std::string out = "M,tau,survival\n";
    for (const auto& r : rows) {
        out += std::to_string(r.M);
        out += ',';
        out += format_double(r.tau);
        out += ',';
        out += format_double(r.survival);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), Errc::io_error, "cannot open " + path + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    require(f.good(), Errc::io_error, "write to " + path + " failed");
}

}  // namespace strobe::csv
