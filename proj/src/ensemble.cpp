#include "fasteit/ensemble.hpp"

#include "fasteit/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace fasteit {

double ControlField::coupling_rate(const RbD1Constants& rb) const
{
    if (!enabled) return 0.0;
    return rabi.value_or(rb.d21 * field / constants::hbar);
}

void EnsembleConfig::validate() const
{
    if (detuning_grid.empty()) throw ConfigError("ensemble detuning grid is empty");
    for (std::size_t i = 1; i < detuning_grid.size(); ++i)
        if (!(detuning_grid[i] > detuning_grid[i - 1]))
            throw ConfigError("ensemble detuning grid must be strictly increasing");
    if (doppler_points != 1 && (doppler_points < 3 || doppler_points % 2 == 0))
        throw ConfigError("doppler_points must be 1 or an odd number >= 3");
    if (per_instance_filter) per_instance_filter->validate();
}

EnsembleError::EnsembleError(const NumericalBlowup& cause, std::size_t di, std::size_t vi, double detuning,
                             double velocity)
    : NumericalBlowup("instance (detuning #" + std::to_string(di) + " = " + std::to_string(detuning / kTwoPi / 1e9) +
                          " GHz, velocity #" + std::to_string(vi) + " = " + std::to_string(velocity) +
                          " m/s): " + cause.what(),
                      cause.time_index(), cause.slice_index()),
      detuning_index_(di),
      velocity_index_(vi)
{
}

std::vector<Complex> EnsembleResult::filter_input() const
{
    if (config.reduction == ReductionMode::AmplitudeAverage) return amplitude;
    return amplitude_from_intensity(intensity);
}

EnsembleResult run_ensemble(const EnsembleConfig& config, const ProbePulse& pulse, const VaporCell& cell,
                            const RbD1Constants& rb)
{
    config.validate();
    pulse.validate();
    if (std::abs(cell.temperature - config.temperature) > 1e-9)
        throw ConfigError("ensemble temperature does not match the vapor cell temperature");

    const DetuningEnsemble detunings = detuning_weights(pulse, config.detuning_grid);
    // A single velocity class means atoms at rest.
    const DopplerGrid doppler = config.doppler_points == 1 ? DopplerGrid{{0.0}, {1.0}}
                                                           : doppler_grid(config.temperature, config.doppler_points, rb);
    const Couplings g = couplings(cell, rb);
    const double control_amplitude = control_amplitude_from_rabi(config.control.coupling_rate(rb), g);

    const std::size_t nd = detunings.detunings.size();
    const std::size_t nv = doppler.velocities.size();
    const std::size_t count = nd * nv;
    std::vector<InstanceResult> results(count);
    std::vector<std::vector<double>> filtered(config.per_instance_filter ? count : 0);
    std::optional<FilterKernel> kernel;
    if (config.per_instance_filter)
        kernel.emplace(config.propagation.grid.time_samples, config.propagation.grid.dt, *config.per_instance_filter,
                       config.carrier_offset);

    auto run_one = [&](std::size_t idx) {
        const std::size_t i = idx / nv;
        const std::size_t n = idx % nv;
        const double v = doppler.velocities[n];
        const DopplerDetunings shifted = doppler_shift(detunings.detunings[i], config.control.detuning, v, rb);
        DrivingFields f;
        f.control = control_amplitude;
        f.delta_p = shifted.probe;
        f.delta_c = shifted.control;
        f.omega43 = rb.omega43;
        InstanceResult r = propagate_instance(pulse, f, cell, g, rb, config.propagation);
        r.detuning = detunings.detunings[i];
        r.velocity = v;
        if (config.per_instance_filter) {
            filtered[idx] = intensity_of(kernel->apply(r.output_amplitude));
        }
        results[idx] = std::move(r);
    };

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::size_t first_error_index = count;

    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= count) return;
            try {
                run_one(idx);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (idx < first_error_index) {
                    first_error_index = idx;
                    first_error = std::current_exception();
                }
                next.store(count);
            }
        }
    };

    const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, count);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
    }

    if (first_error) {
        const std::size_t i = first_error_index / nv;
        const std::size_t n = first_error_index % nv;
        try {
            std::rethrow_exception(first_error);
        } catch (const NumericalBlowup& e) {
            throw EnsembleError(e, i, n, detunings.detunings[i], doppler.velocities[n]);
        }
    }

    const std::size_t nt = config.propagation.grid.time_samples;
    EnsembleResult out;
    out.time_axis = config.propagation.grid.time_axis();
    out.intensity.assign(nt, 0.0);
    out.instances = count;
    out.config = config;
    out.pulse = pulse;
    out.cell = cell;
    if (config.reduction == ReductionMode::AmplitudeAverage) out.amplitude.assign(nt, Complex{0.0, 0.0});
    if (config.per_instance_filter) out.filtered_intensity.emplace(nt, 0.0);

    // Fixed detuning-major, velocity-minor order.
    for (std::size_t i = 0; i < nd; ++i)
        for (std::size_t n = 0; n < nv; ++n) {
            const double w = detunings.weights[i] * doppler.weights[n];
            const InstanceResult& r = results[i * nv + n];
            out.total_weight += w;
            if (config.reduction == ReductionMode::AmplitudeAverage) {
                for (std::size_t k = 0; k < nt; ++k) out.amplitude[k] += w * r.output_amplitude[k];
            } else {
                for (std::size_t k = 0; k < nt; ++k) out.intensity[k] += w * r.output_intensity[k];
            }
            if (config.per_instance_filter) {
                const std::vector<double>& fi = filtered[i * nv + n];
                for (std::size_t k = 0; k < nt; ++k) (*out.filtered_intensity)[k] += w * fi[k];
            }
        }
    if (config.reduction == ReductionMode::AmplitudeAverage)
        for (std::size_t k = 0; k < nt; ++k) out.intensity[k] = std::norm(out.amplitude[k]);

    if (config.keep_instances) out.per_instance = std::move(results);
    return out;
}

double transmission_gain(std::span<const double> on, std::span<const double> off, double dt,
                         std::pair<double, double> window)
{
    if (on.size() != off.size()) throw ArgumentError("transmission_gain: profiles differ in length");
    const double e_on = pulse_energy(on, dt, window);
    const double e_off = pulse_energy(off, dt, window);
    if (!(e_off > 0.0)) throw DataError("transmission_gain: reference energy is zero; gain undefined");
    return 100.0 * (e_on - e_off) / e_off;
}

double transmission_gain(const EnsembleResult& on, const EnsembleResult& off, std::pair<double, double> window)
{
    if (on.time_axis != off.time_axis) throw ArgumentError("transmission_gain: results use different time axes");
    const double dt = on.config.propagation.grid.dt;
    return transmission_gain(on.intensity, off.intensity, dt, window);
}

}  // namespace fasteit
