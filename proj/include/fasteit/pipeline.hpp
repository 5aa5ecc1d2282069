#pragma once

#include "fasteit/config.hpp"
#include "fasteit/ensemble.hpp"
#include "fasteit/result_io.hpp"

#include <cstddef>
#include <vector>

namespace fasteit {

// Filtered intensity of an ensemble result according to the config's filter stage.
// Empty when the filter is disabled.
std::vector<double> filtered_profile(const EnsembleResult& ensemble, const ExperimentConfig& config);

// Runs the ensemble (and filter) for one config and collects the scalar metrics:
//   energy, energy_filtered, peak_time, packets, first_packet_time, second_packet_time,
//   packet_delay (NaN below two packets), atom_number, temperature.
RunResult simulate(const ExperimentConfig& config);

struct EitReport {
    RunResult on;
    RunResult off;
    double gain_filtered = 0.0;  // percent; the headline number when the filter is enabled
    double gain_raw = 0.0;       // percent, unfiltered profiles
};

// Control-on and control-off runs on identical grids; gains over the analysis window.
EitReport run_eit(const ExperimentConfig& config);

struct SweepRow {
    double temperature = 0.0;  // K
    RunResult result;
};

// One simulate() per temperature (K), in the given order.
std::vector<SweepRow> sweep_temperature(const ExperimentConfig& base, const std::vector<double>& temperatures);

// Removes repeated temperatures (within 1 mK), keeping first occurrences. Returns how many
// were dropped.
std::size_t deduplicate_temperatures(std::vector<double>& temperatures);

}  // namespace fasteit
