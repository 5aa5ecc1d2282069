#pragma once

#include "fasteit/atomic_model.hpp"
#include "fasteit/etalon.hpp"
#include "fasteit/propagation.hpp"
#include "fasteit/pulse_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace fasteit {

enum class ReductionMode : std::uint8_t { IntensityAverage, AmplitudeAverage };

// CW control laser on the F=2 -> F'=1 transition.
struct ControlField {
    bool enabled = false;
    double field = 3e5;                 // V/m; mapped through d21
    std::optional<double> rabi;         // rad/s; overrides `field` when set
    double detuning = 0.0;              // rad/s from omega32

    // g_C1 b in rad/s, zero when disabled.
    double coupling_rate(const RbD1Constants& rb) const;
};

struct EnsembleConfig {
    double temperature = 333.15;  // K
    std::vector<double> detuning_grid = default_detuning_grid();
    int doppler_points = 15;
    ControlField control;
    ReductionMode reduction = ReductionMode::IntensityAverage;
    PropagationOptions propagation;
    // When set, each instance amplitude is filtered before the intensity average.
    std::optional<FilterSpec> per_instance_filter;
    double carrier_offset = 0.0;  // Hz
    bool keep_instances = false;
    std::size_t jobs = 1;

    void validate() const;
};

struct EnsembleResult {
    std::vector<double> time_axis;
    std::vector<double> intensity;
    // Weighted coherent sum; filled in AmplitudeAverage mode.
    std::vector<Complex> amplitude;
    // Filled when per_instance_filter is set.
    std::optional<std::vector<double>> filtered_intensity;
    std::vector<InstanceResult> per_instance;
    double total_weight = 0.0;
    std::size_t instances = 0;

    EnsembleConfig config;
    ProbePulse pulse;
    VaporCell cell;

    // Profile handed to the etalon: the coherent amplitude in AmplitudeAverage mode,
    // otherwise sqrt of the averaged intensity with zero phase.
    std::vector<Complex> filter_input() const;
};

class EnsembleError : public NumericalBlowup {
public:
    EnsembleError(const NumericalBlowup& cause, std::size_t detuning_index, std::size_t velocity_index,
                  double detuning, double velocity);
    std::size_t detuning_index() const noexcept { return detuning_index_; }
    std::size_t velocity_index() const noexcept { return velocity_index_; }

private:
    std::size_t detuning_index_;
    std::size_t velocity_index_;
};

// Sweeps every (detuning, velocity) class and reduces with weights w_i u_n in
// detuning-major order. Output bits do not depend on `jobs`.
EnsembleResult run_ensemble(const EnsembleConfig& config, const ProbePulse& pulse, const VaporCell& cell,
                            const RbD1Constants& rb = {});

// 100 (E_on - E_off) / E_off of two profiles sampled at dt over the window.
double transmission_gain(std::span<const double> on, std::span<const double> off, double dt,
                         std::pair<double, double> window);
double transmission_gain(const EnsembleResult& on, const EnsembleResult& off, std::pair<double, double> window);

}  // namespace fasteit
