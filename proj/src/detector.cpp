#include "strobe/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <thread>
#include <utility>

#include "strobe/errors.hpp"

namespace strobe {

OccupancyProfile::OccupancyProfile(Kind kind, std::function<double(double)> beta)
    : kind_(kind), beta_(std::move(beta)) {}

OccupancyProfile OccupancyProfile::rectangular(double t_start, double duration) {
    require(duration > 0.0, Errc::invalid_argument, "rectangular profile needs a positive width");
    const double t_stop = t_start + duration;
    return OccupancyProfile(Kind::rectangular, [t_start, t_stop](double t) {
        return (t >= t_start && t < t_stop) ? 1.0 : 0.0;
    });
}

OccupancyProfile OccupancyProfile::from_wavefunction(const System& system, const Region& region) {
    if (std::holds_alternative<RabiSystem>(system)) {
        const RabiSpec spec = std::get<RabiSystem>(system).spec;
        return OccupancyProfile(Kind::from_wavefunction,
                                [spec](double t) { return rabi_excited_prob(spec, t); });
    }
    require(!region.intervals.empty(), Errc::invalid_argument, "detector region is empty");
    auto evolver = std::make_shared<SystemEvolver>(system);
    return OccupancyProfile(Kind::from_wavefunction, [evolver, region](double t) {
        return region_probability(evolver->state_at(t), region);
    });
}

OccupancyProfile OccupancyProfile::tabulated(std::vector<double> times,
                                             std::vector<double> values) {
    require(times.size() == values.size(), Errc::invalid_argument,
            "occupancy table sizes differ");
    require(times.size() >= 2, Errc::invalid_argument, "occupancy table needs >= 2 points");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        require(times[i] < times[i + 1], Errc::invalid_argument,
                "occupancy table times must increase");
    for (double v : values)
        require(v >= 0.0 && v <= 1.0, Errc::invalid_argument,
                "occupancy values must lie in [0, 1]");
    auto ts = std::make_shared<std::vector<double>>(std::move(times));
    auto vs = std::make_shared<std::vector<double>>(std::move(values));
    return OccupancyProfile(Kind::tabulated, [ts, vs](double t) {
        if (t < ts->front() || t > ts->back()) return 0.0;
        const auto hi = std::upper_bound(ts->begin(), ts->end(), t);
        if (hi == ts->end()) return vs->back();
        if (hi == ts->begin()) return vs->front();
        const std::size_t j = static_cast<std::size_t>(hi - ts->begin());
        const double w = (t - (*ts)[j - 1]) / ((*ts)[j] - (*ts)[j - 1]);
        return (1.0 - w) * (*vs)[j - 1] + w * (*vs)[j];
    });
}

void ClickStream::validate() const {
    window.validate();
    require(kappa > 0.0, Errc::invalid_argument, "kappa must be positive");
    const double t_end = window.t0 + window.T;
    for (std::size_t i = 0; i < clicks.size(); ++i) {
        require(clicks[i] >= window.t0 && clicks[i] < t_end, Errc::invalid_window,
                "click outside the observation window");
        if (i > 0)
            require(clicks[i] > clicks[i - 1], Errc::invalid_argument,
                    "clicks must strictly increase");
    }
}

ClickStream click_stream(const OccupancyProfile& profile, double kappa, const WindowSpec& window,
                         const SeedSpec& seed, std::uint64_t run_id) {
    require(kappa > 0.0 && std::isfinite(kappa), Errc::invalid_argument,
            "kappa must be positive and finite");
    window.validate();

    ClickStream out;
    out.window = window;
    out.kappa = kappa;
    out.run_id = run_id;

    // Candidate arrivals at the ceiling rate 1/(2 kappa); candidate k at time
    // t is kept when u < beta(t), which thins the stream to rate
    // beta(t)/(2 kappa).
    RandomSource rng = seed.source(run_id);
    const double mean_gap = 2.0 * kappa;
    double t = window.t0;
    const double t_end = window.t0 + window.T;
    for (std::uint64_t k = 0;; ++k) {
        t += -std::log1p(-rng.uniform(k, 0)) * mean_gap;
        if (t >= t_end) break;
        if (rng.uniform(k, 1) < profile(t)) out.clicks.push_back(t);
    }
    out.validate();
    return out;
}

std::vector<ClickStream> click_ensemble(const OccupancyProfile& profile, double kappa,
                                        const WindowSpec& window, std::size_t n_runs,
                                        const SeedSpec& seed, std::size_t workers) {
    require(workers >= 1, Errc::invalid_argument, "workers must be >= 1");
    std::vector<ClickStream> streams(n_runs);
    const std::size_t used = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n_runs, 1));
    auto chunk = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r)
            streams[r] = click_stream(profile, kappa, window, seed, r);
    };
    if (used <= 1) {
        chunk(0, n_runs);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(used);
        for (std::size_t w = 0; w < used; ++w)
            pool.emplace_back(chunk, n_runs * w / used, n_runs * (w + 1) / used);
        for (auto& th : pool) th.join();
    }
    return streams;
}

TimeDistribution click_histogram(const std::vector<ClickStream>& streams, std::size_t M) {
    require(!streams.empty(), Errc::invalid_argument, "no click streams given");
    require(M >= 1, Errc::invalid_argument, "need at least one bin");
    const WindowSpec window = streams.front().window;
    for (const auto& s : streams) {
        require(s.window.t0 == window.t0 && s.window.T == window.T, Errc::binning_mismatch,
                "click streams cover different windows");
    }

    std::vector<double> counts(M, 0.0);
    double total = 0.0;
    const double bin_width = window.T / static_cast<double>(M);
    for (const auto& s : streams)
        for (double t : s.clicks) {
            auto bin = static_cast<std::size_t>((t - window.t0) / bin_width);
            if (bin >= M) bin = M - 1;
            counts[bin] += 1.0;
            total += 1.0;
        }
    require(total > 0.0, Errc::no_clicks, "every stream is empty");

    TimeDistribution dist;
    dist.kind = DistKind::click;
    dist.status = DistStatus::defined;
    dist.times.resize(M);
    dist.probs.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        dist.times[m] = window.t0 + static_cast<double>(m) * bin_width;
        dist.probs[m] = counts[m] / total;
    }
    dist.validate();
    return dist;
}

}  // namespace strobe
