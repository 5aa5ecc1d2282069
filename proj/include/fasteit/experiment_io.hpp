#pragma once

#include "fasteit/histogram.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fasteit {

enum class HistogramFormat { Auto, Comma, Tab, Whitespace };

// Delimiter-separated text. The first non-comment line is a header naming the time unit,
// e.g. "t_ps,counts"; each data row gives the start time of a bin and its counts.
// Comment lines "# key: value" may set background_rate, integration_time and repetition_rate
// (values with units). Errors are ParseError with the 1-based line number, IoError when
// the file cannot be opened.
TemporalHistogram load_histogram(const std::filesystem::path& path, HistogramFormat format = HistogramFormat::Auto);
TemporalHistogram parse_histogram(const std::string& text, HistogramFormat format = HistogramFormat::Auto);

// time_unit is one of s, ms, us, ns, ps, fs.
void write_histogram(const std::filesystem::path& path, const TemporalHistogram& hist,
                     const std::string& time_unit = "ps");

constexpr double kDefaultRepetitionRate = 80e6;  // Hz

// Flat background per bin: rate * integration_time * bin_width * repetition_rate, i.e. the
// wall-clock background folded onto one excitation period. Result is clamped at zero.
// Throws ContractError when the rate or integration time is missing.
double background_level(const TemporalHistogram& hist);
TemporalHistogram subtract_background(const TemporalHistogram& hist);

enum class NormalizeMode { Peak, Energy };

// Peak: max = 1. Energy: trapezoidal integral with spacing dt = 1. Throws DataError on an
// all-zero profile.
std::vector<double> normalize(std::span<const double> profile, NormalizeMode mode, double dt = 1.0);

struct WavePacket {
    std::size_t index = 0;
    double time = 0.0;        // s
    double height = 0.0;
    double prominence = 0.0;
};

// Local maxima whose topographic prominence is at least min_prominence * max(profile),
// in time order. Plateaus report their first sample.
std::vector<WavePacket> find_wave_packets(std::span<const double> times, std::span<const double> profile,
                                          double min_prominence = 0.01);

// Peak time of the second packet minus that of the first; NaN with fewer than two packets.
double packet_delay(const std::vector<WavePacket>& packets);

enum class Alignment { None, Peak };

struct ComparisonMetrics {
    double relative_l2 = 0.0;       // ||sim - meas|| / ||meas|| after peak normalization
    double peak_offset = 0.0;       // s, measured peak time minus simulated peak time (before alignment)
    double applied_shift = 0.0;     // s, shift added to the simulation time axis
    std::size_t overlap_bins = 0;
    std::vector<double> packet_delays_sim;   // s, packet k minus packet 0
    std::vector<double> packet_delays_meas;
    std::vector<double> packet_delay_differences;  // meas - sim, over packets found in both
};

// Interpolates the simulated profile at the bin centres that fall inside its support,
// peak-normalizes both and reports residuals. Throws ArgumentError when nothing overlaps.
ComparisonMetrics compare(std::span<const double> sim_times, std::span<const double> sim_profile,
                          const TemporalHistogram& meas, Alignment alignment = Alignment::None);

// Time column plus named value columns, all printed with %.17g.
void write_profile_csv(const std::filesystem::path& path, std::span<const double> times,
                       const std::vector<std::pair<std::string, std::span<const double>>>& columns);

}  // namespace fasteit
