#include "strobe/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "strobe/errors.hpp"

namespace strobe {
namespace fft {
namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

std::mutex plan_mutex;
std::map<std::size_t, PlanPair>& plan_cache() {
    static std::map<std::size_t, PlanPair> cache;
    return cache;
}

// Plans are created against a scratch buffer with FFTW_UNALIGNED so they can
// be executed on any caller buffer of the same size via fftw_execute_dft.
PlanPair plans_for(std::size_t n) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    PlanPair p;
    p.fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inv = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(p.fwd && p.inv, Errc::invalid_argument, "fftw plan creation failed");
    cache[n] = p;
    return p;
}

}  // namespace

void forward(std::vector<std::complex<double>>& a) {
    if (a.empty()) return;
    auto* buf = reinterpret_cast<fftw_complex*>(a.data());
    fftw_execute_dft(plans_for(a.size()).fwd, buf, buf);
}

void inverse(std::vector<std::complex<double>>& a) {
    if (a.empty()) return;
    auto* buf = reinterpret_cast<fftw_complex*>(a.data());
    fftw_execute_dft(plans_for(a.size()).inv, buf, buf);
    const double scale = 1.0 / static_cast<double>(a.size());
    for (auto& z : a) z *= scale;
}

}  // namespace fft
}  // namespace strobe
