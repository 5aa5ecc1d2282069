#pragma once

#include "fasteit/bloch_solver.hpp"

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fasteit {

struct FilterSpec {
    double reflectivity = 0.999;
    double fsr = 13.3e9;        // Hz
    double linewidth = 43e6;    // Hz, nominal; only checked for consistency
    int cascade = 1;            // identical etalons in series
    double min_padded_duration = 64e-9;  // s

    void validate() const;
    // FWHM implied by R and FSR: FSR (1 - R) / (pi sqrt(R)).
    double derived_linewidth() const;
    // Warning text when the nominal and derived linewidths differ by more than 20 %.
    std::optional<std::string> consistency_warning() const;
    // Time for the amplitude ringdown to fall by 1e-8, including the cascade.
    double ringdown_time() const;
};

// tr(nu) = e^{-i pi nu / FSR} (1 - R) / (1 - R e^{-2 i pi nu / FSR}), raised to the cascade power.
Complex transfer(double nu, const FilterSpec& spec);

// FFT length used by apply_filter for `samples` samples at spacing dt.
std::size_t padded_length(std::size_t samples, double dt, const FilterSpec& spec);

// Frequency-domain filtering of a uniformly sampled complex envelope. The record is zero
// padded, transformed, multiplied by transfer(nu - carrier_offset) and transformed back.
// Returns as many samples as the input.
std::vector<Complex> apply_filter(std::span<const Complex> amplitude, double dt, const FilterSpec& spec,
                                  double carrier_offset = 0.0, std::optional<std::size_t> fft_length = {});

// Same, after checking that the sample times are uniform (ArgumentError otherwise).
std::vector<Complex> apply_filter(std::span<const Complex> amplitude, std::span<const double> times,
                                  const FilterSpec& spec, double carrier_offset = 0.0);

// apply_filter for many records of one length: the padded transfer function is inverted
// once into its circular impulse response, and each record is convolved with it directly.
// Agrees with apply_filter to rounding.
class FilterKernel {
public:
    FilterKernel(std::size_t samples, double dt, const FilterSpec& spec, double carrier_offset = 0.0,
                 std::optional<std::size_t> fft_length = {});
    std::vector<Complex> apply(std::span<const Complex> amplitude) const;
    std::size_t samples() const { return samples_; }

private:
    std::size_t samples_;
    // h[(k - m) mod n] for k - m in [-(samples-1), samples-1], stored at offset samples-1.
    std::vector<Complex> taps_;
};

// Zero-phase amplitude sqrt(I) of a non-negative intensity profile.
std::vector<Complex> amplitude_from_intensity(std::span<const double> intensity);

std::vector<double> intensity_of(std::span<const Complex> amplitude);

}  // namespace fasteit
