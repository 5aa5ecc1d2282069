#include "fasteit/etalon.hpp"

#include "fasteit/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

namespace fasteit {

void FilterSpec::validate() const
{
    if (!(reflectivity > 0.0 && reflectivity < 1.0)) throw ConfigError("etalon reflectivity must lie in (0, 1)");
    if (!(fsr > 0.0)) throw ConfigError("etalon free spectral range must be positive");
    if (cascade < 1) throw ConfigError("etalon cascade must be at least 1");
    if (!(min_padded_duration >= 0.0)) throw ConfigError("etalon padding duration must be non-negative");
}

double FilterSpec::derived_linewidth() const
{
    return fsr * (1.0 - reflectivity) / (std::numbers::pi * std::sqrt(reflectivity));
}

std::optional<std::string> FilterSpec::consistency_warning() const
{
    if (!(linewidth > 0.0)) return std::nullopt;
    const double derived = derived_linewidth();
    const double rel = std::abs(derived - linewidth) / linewidth;
    if (rel <= 0.2) return std::nullopt;
    return "etalon linewidth " + std::to_string(linewidth / 1e6) + " MHz disagrees with " +
           std::to_string(derived / 1e6) + " MHz implied by R and FSR";
}

double FilterSpec::ringdown_time() const
{
    const double per_etalon = std::log(1e8) / (-std::log(reflectivity) * fsr);
    return per_etalon * static_cast<double>(cascade);
}

Complex transfer(double nu, const FilterSpec& spec)
{
    const double phase = std::numbers::pi * nu / spec.fsr;
    const Complex single = std::polar(1.0, -phase) * (1.0 - spec.reflectivity) /
                           (1.0 - spec.reflectivity * std::polar(1.0, -2.0 * phase));
    Complex out = single;
    for (int k = 1; k < spec.cascade; ++k) out *= single;
    return out;
}

std::size_t padded_length(std::size_t samples, double dt, const FilterSpec& spec)
{
    const double needed = std::max(spec.min_padded_duration, static_cast<double>(samples) * dt + spec.ringdown_time());
    const auto min_n = std::max<std::size_t>(samples, static_cast<std::size_t>(std::ceil(needed / dt)));
    std::size_t n = 1;
    while (n < min_n) n <<= 1;
    return n;
}

namespace {

struct FftwDeleter {
    void operator()(fftw_complex* p) const { fftw_free(p); }
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

}  // namespace

std::vector<Complex> apply_filter(std::span<const Complex> amplitude, double dt, const FilterSpec& spec,
                                  double carrier_offset, std::optional<std::size_t> fft_length)
{
    spec.validate();
    if (amplitude.size() < 2) throw ArgumentError("apply_filter: need at least two samples");
    if (!(dt > 0.0)) throw ArgumentError("apply_filter: sample spacing must be positive");

    const std::size_t n = fft_length.value_or(padded_length(amplitude.size(), dt, spec));
    if (n < amplitude.size()) throw ArgumentError("apply_filter: FFT length shorter than the record");

    std::unique_ptr<fftw_complex, FftwDeleter> buf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
    if (!buf) throw Error("apply_filter: FFT buffer allocation failed");
    std::unique_ptr<fftw_plan_s, FftwDeleter> forward, backward;
    {
        std::lock_guard lock(planner_mutex());
        const int len = static_cast<int>(n);
        forward.reset(fftw_plan_dft_1d(len, buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE));
        backward.reset(fftw_plan_dft_1d(len, buf.get(), buf.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    }

    auto* data = reinterpret_cast<Complex*>(buf.get());
    std::fill(data, data + n, Complex{0.0, 0.0});
    std::copy(amplitude.begin(), amplitude.end(), data);

    fftw_execute(forward.get());
    const double df = 1.0 / (static_cast<double>(n) * dt);
    for (std::size_t k = 0; k < n; ++k) {
        const double idx = k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
        data[k] *= transfer(idx * df - carrier_offset, spec);
    }
    fftw_execute(backward.get());

    const double norm = 1.0 / static_cast<double>(n);
    std::vector<Complex> out(amplitude.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = data[k] * norm;
    return out;
}

FilterKernel::FilterKernel(std::size_t samples, double dt, const FilterSpec& spec, double carrier_offset,
                           std::optional<std::size_t> fft_length)
    : samples_(samples)
{
    if (samples < 2) throw ArgumentError("FilterKernel: need at least two samples");
    const std::size_t n = fft_length.value_or(padded_length(samples, dt, spec));
    if (n < 2 * samples) throw ArgumentError("FilterKernel: FFT length must cover twice the record");
    // The impulse response is the filtered unit impulse.
    std::vector<Complex> impulse(n, Complex{0.0, 0.0});
    impulse[0] = 1.0;
    const std::vector<Complex> h = [&] {
        std::vector<Complex> full(n);
        std::unique_ptr<fftw_complex, FftwDeleter> buf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
        if (!buf) throw Error("FilterKernel: FFT buffer allocation failed");
        std::unique_ptr<fftw_plan_s, FftwDeleter> backward;
        {
            std::lock_guard lock(planner_mutex());
            backward.reset(fftw_plan_dft_1d(static_cast<int>(n), buf.get(), buf.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
        }
        auto* data = reinterpret_cast<Complex*>(buf.get());
        // FFT of a unit impulse is all ones, so the spectrum is the transfer function itself.
        const double df = 1.0 / (static_cast<double>(n) * dt);
        for (std::size_t k = 0; k < n; ++k) {
            const double idx = k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
            data[k] = transfer(idx * df - carrier_offset, spec);
        }
        fftw_execute(backward.get());
        const double norm = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) full[k] = data[k] * norm;
        return full;
    }();
    taps_.resize(2 * samples - 1);
    for (std::size_t i = 0; i < taps_.size(); ++i) {
        const auto lag = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(samples - 1);
        taps_[i] = h[static_cast<std::size_t>(lag < 0 ? lag + static_cast<std::ptrdiff_t>(n) : lag)];
    }
}

std::vector<Complex> FilterKernel::apply(std::span<const Complex> amplitude) const
{
    if (amplitude.size() != samples_) throw ArgumentError("FilterKernel: record length differs from the kernel");
    std::vector<Complex> out(samples_, Complex{0.0, 0.0});
    for (std::size_t m = 0; m < samples_; ++m) {
        const Complex x = amplitude[m];
        if (x == Complex{0.0, 0.0}) continue;
        const Complex* tap = taps_.data() + (samples_ - 1) - m;  // lag k - m at index k
        for (std::size_t k = 0; k < samples_; ++k) out[k] += tap[k] * x;
    }
    return out;
}

std::vector<Complex> apply_filter(std::span<const Complex> amplitude, std::span<const double> times,
                                  const FilterSpec& spec, double carrier_offset)
{
    if (times.size() != amplitude.size()) throw ArgumentError("apply_filter: time axis length mismatch");
    if (times.size() < 2) throw ArgumentError("apply_filter: need at least two samples");
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw ArgumentError("apply_filter: time axis must increase");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs((times[k] - times[k - 1]) - dt) > 1e-9 * dt)
            throw ArgumentError("apply_filter: non-uniform time axis at sample " + std::to_string(k));
    return apply_filter(amplitude, dt, spec, carrier_offset);
}

std::vector<Complex> amplitude_from_intensity(std::span<const double> intensity)
{
    std::vector<Complex> out(intensity.size());
    for (std::size_t k = 0; k < intensity.size(); ++k) out[k] = std::sqrt(std::max(intensity[k], 0.0));
    return out;
}

std::vector<double> intensity_of(std::span<const Complex> amplitude)
{
    std::vector<double> out(amplitude.size());
    for (std::size_t k = 0; k < amplitude.size(); ++k) out[k] = std::norm(amplitude[k]);
    return out;
}

}  // namespace fasteit
