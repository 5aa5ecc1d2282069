#include "fasteit/pipeline.hpp"

#include "fasteit/errors.hpp"
#include "fasteit/experiment_io.hpp"

#include <cmath>
#include <limits>

namespace fasteit {

std::vector<double> filtered_profile(const EnsembleResult& ensemble, const ExperimentConfig& config)
{
    if (!config.filter.enabled) return {};
    if (ensemble.filtered_intensity) return *ensemble.filtered_intensity;
    return intensity_of(apply_filter(ensemble.filter_input(), config.propagation.dt, config.filter_spec(),
                                     config.filter.carrier_offset));
}

RunResult simulate(const ExperimentConfig& config)
{
    config.validate();
    const VaporCell cell = config.vapor_cell();
    const EnsembleResult ens = run_ensemble(config.ensemble_config(), config.probe(), cell, config.constants());

    RunResult r;
    r.config = config;
    r.time_axis = ens.time_axis;
    r.intensity = ens.intensity;
    r.filtered_intensity = filtered_profile(ens, config);
    r.provenance = current_provenance();

    const std::pair window{config.analysis.window_start, config.analysis.window_end};
    const double dt = config.propagation.dt;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.metrics["temperature"] = cell.temperature;
    r.metrics["atom_number"] = cell.atom_number;
    r.metrics["energy"] = pulse_energy(r.intensity, dt, window);
    r.metrics["energy_filtered"] = r.filtered_intensity.empty() ? nan : pulse_energy(r.filtered_intensity, dt, window);

    std::size_t peak = 0;
    for (std::size_t k = 1; k < r.intensity.size(); ++k)
        if (r.intensity[k] > r.intensity[peak]) peak = k;
    r.metrics["peak_time"] = r.time_axis[peak];

    const auto packets = find_wave_packets(r.time_axis, r.intensity, config.analysis.packet_prominence);
    r.metrics["packets"] = static_cast<double>(packets.size());
    r.metrics["first_packet_time"] = packets.size() > 0 ? packets[0].time : nan;
    r.metrics["second_packet_time"] = packets.size() > 1 ? packets[1].time : nan;
    r.metrics["packet_delay"] = packet_delay(packets);
    return r;
}

EitReport run_eit(const ExperimentConfig& config)
{
    ExperimentConfig on = config;
    on.control.enabled = true;
    ExperimentConfig off = config;
    off.control.enabled = false;

    EitReport rep;
    rep.off = simulate(off);
    rep.on = simulate(on);

    const std::pair window{config.analysis.window_start, config.analysis.window_end};
    const double dt = config.propagation.dt;
    rep.gain_raw = transmission_gain(rep.on.intensity, rep.off.intensity, dt, window);
    rep.gain_filtered = config.filter.enabled
                            ? transmission_gain(rep.on.filtered_intensity, rep.off.filtered_intensity, dt, window)
                            : rep.gain_raw;
    rep.on.metrics["transmission_gain"] = rep.gain_filtered;
    rep.on.metrics["transmission_gain_raw"] = rep.gain_raw;
    return rep;
}

std::vector<SweepRow> sweep_temperature(const ExperimentConfig& base, const std::vector<double>& temperatures)
{
    if (temperatures.empty()) throw ArgumentError("sweep_temperature: no temperatures given");
    std::vector<SweepRow> rows;
    rows.reserve(temperatures.size());
    for (double t : temperatures) {
        ExperimentConfig c = base;
        c.cell.temperature = t;
        rows.push_back({t, simulate(c)});
    }
    return rows;
}

std::size_t deduplicate_temperatures(std::vector<double>& temperatures)
{
    std::vector<double> kept;
    for (double t : temperatures) {
        bool seen = false;
        for (double k : kept) seen = seen || std::abs(k - t) < 1e-3;
        if (!seen) kept.push_back(t);
    }
    const std::size_t dropped = temperatures.size() - kept.size();
    temperatures = std::move(kept);
    return dropped;
}

}  // namespace fasteit
