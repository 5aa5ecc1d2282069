#pragma once

#include "fasteit/atomic_model.hpp"
#include "fasteit/ensemble.hpp"
#include "fasteit/etalon.hpp"
#include "fasteit/propagation.hpp"
#include "fasteit/pulse_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace fasteit {

// Where the etalon sits in the pipeline.
//   Ensemble: filter the reduced profile (sqrt(I) with zero phase, or the coherent sum in
//             amplitude-average mode).
//   PerInstance: filter each instance amplitude, then intensity-average.
enum class FilterStage { Ensemble, PerInstance };

// Experiment description as read from a JSON file. Every physical value is a string with a
// unit ("134 ps", "-4 GHz", "60 C"); the structs hold SI values (angular where noted).
struct ExperimentConfig {
    struct Pulse {
        double tau = 134e-12;                      // s
        double center_detuning = kTwoPi * -4.0e9;  // rad/s
        double sigma = kTwoPi * 1.5e9;             // rad/s
        bool operator==(const Pulse&) const = default;
    } pulse;

    struct Cell {
        double length = 0.05;         // m
        double temperature = 333.15;  // K
        double beam_waist = 2e-3;     // m
        std::optional<double> atom_number;  // overrides the vapor-density value
        bool operator==(const Cell&) const = default;
    } cell;

    struct Atoms {
        double dipole = 2.537e-29;          // C m
        double decay_rate = kTwoPi * 1.5e6;  // rad/s, every Gamma_nm
        bool operator==(const Atoms&) const = default;
    } atoms;

    struct Propagation {
        double dt = 1.34e-12;  // s
        std::size_t time_samples = 747;
        Stencil stencil = Stencil::Characteristic;
        Integrator integrator = Integrator::ForwardEuler;
        SourceScaling source_scaling = SourceScaling::TotalAtoms;
        InitialState initial_state = InitialState::GroundF1;
        bool operator==(const Propagation&) const = default;
    } propagation;

    struct Ensemble {
        double detuning_min = kTwoPi * -13.9e9;  // rad/s
        double detuning_max = kTwoPi * 5.9e9;    // rad/s
        std::size_t detuning_points = 100;
        int doppler_points = 15;
        ReductionMode reduction = ReductionMode::IntensityAverage;
        std::size_t jobs = 1;
        bool operator==(const Ensemble&) const = default;
    } ensemble;

    struct Control {
        bool enabled = false;
        double field = 3e5;             // V/m
        std::optional<double> rabi;     // rad/s
        double detuning = 0.0;          // rad/s
        bool operator==(const Control&) const = default;
    } control;

    struct Filter {
        bool enabled = true;
        double reflectivity = 0.999;
        double fsr = 13.3e9;            // Hz
        double linewidth = 43e6;        // Hz
        int cascade = 1;
        double carrier_offset = 0.0;    // Hz
        double min_padded_duration = 64e-9;  // s
        FilterStage stage = FilterStage::PerInstance;
        bool operator==(const Filter&) const = default;
    } filter;

    struct Analysis {
        double window_start = 0.0;       // s
        double window_end = 746 * 1.34e-12;  // s
        double packet_prominence = 0.01;  // fraction of the profile maximum
        bool operator==(const Analysis&) const = default;
    } analysis;

    bool operator==(const ExperimentConfig&) const = default;

    // Throws ConfigError on inconsistent values.
    void validate() const;

    RbD1Constants constants() const;
    ProbePulse probe() const;
    VaporCell vapor_cell() const;
    FilterSpec filter_spec() const;
    GridSpec grid() const;
    std::vector<double> detuning_grid() const;
    // Ensemble settings; the per-instance filter is attached when the filter is enabled
    // in the PerInstance stage.
    EnsembleConfig ensemble_config() const;
};

// Missing keys keep their defaults; unknown keys and unitless physical values are
// ConfigErrors naming the offending key path.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

// Resolves a config name against the directory in $FASTEIT_CONFIG_DIR when the path is
// relative and does not exist as given.
std::filesystem::path resolve_config_path(const std::filesystem::path& path);

std::string to_string(Stencil s);
std::string to_string(Integrator i);
std::string to_string(SourceScaling s);
std::string to_string(InitialState s);
std::string to_string(ReductionMode r);
std::string to_string(FilterStage s);

}  // namespace fasteit
