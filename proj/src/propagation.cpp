#include "fasteit/propagation.hpp"

#include "fasteit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fasteit {

std::vector<double> GridSpec::time_axis() const
{
    std::vector<double> t(time_samples);
    for (std::size_t k = 0; k < time_samples; ++k) t[k] = dt * static_cast<double>(k);
    return t;
}

SliceGeometry SliceGeometry::make(double length, const GridSpec& grid)
{
    if (!(length > 0.0)) throw ConfigError("cell length must be positive");
    if (!(grid.dt > 0.0)) throw ConfigError("time step must be positive");
    if (grid.time_samples < 2) throw ConfigError("time grid needs at least two samples");
    SliceGeometry geo;
    geo.dz = grid.dz();
    geo.slices = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(length / geo.dz)));
    geo.last_dz = length - geo.dz * static_cast<double>(geo.slices - 1);
    return geo;
}

namespace {

bool finite(Complex z)
{
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

void update_diagnostics(StateDiagnostics& d, const AtomicState& s)
{
    d.max_trace_error = std::max(d.max_trace_error, std::abs(s.trace() - 1.0));
    d.max_hermiticity_defect = std::max(d.max_hermiticity_defect, s.hermiticity_defect());
    for (int i = 1; i <= 4; ++i) {
        d.min_population = std::min(d.min_population, s.rho(i, i).real());
        d.max_population = std::max(d.max_population, s.rho(i, i).real());
    }
}

}  // namespace

InstanceResult propagate_instance(const ProbePulse& pulse, const DrivingFields& fields, const VaporCell& cell,
                                  const Couplings& g, const RbD1Constants& rb, const PropagationOptions& options)
{
    const GridSpec& grid = options.grid;
    const SliceGeometry geo = SliceGeometry::make(cell.length, grid);
    const std::size_t nz = geo.slices;
    const std::size_t nt = grid.time_samples;
    const double dt = grid.dt;

    const ProbeDrivenGenerator generator(fields, g, rb);
    std::optional<ExponentialStepper> exponential;
    if (options.integrator == Integrator::ExponentialSplit) exponential.emplace(generator, dt);

    // With H = ... + a (g_P1 sigma_31 + g_P2 sigma_41) + h.c. and drho/dt = -i[H, rho],
    // the Heisenberg equation for the field operator gives da/dt = -i g <sigma_13>,
    // and <sigma_13> = rho_31. The sign makes the medium passive.
    const Complex source_factor{0.0, -1.0};
    std::vector<double> atoms_in_slice(nz);
    for (std::size_t j = 0; j < nz; ++j)
        atoms_in_slice[j] = options.source_scaling == SourceScaling::PerSlice
                                ? cell.atom_number * geo.width(j) / cell.length
                                : cell.atom_number;

    std::vector<AtomicState> atoms(nz, initial_state(options.initial_state));
    std::vector<Complex> field(nz + 1, Complex{0.0, 0.0});
    std::vector<Complex> previous(nz + 1, Complex{0.0, 0.0});
    std::vector<Complex> source(nz, Complex{0.0, 0.0});
    const double last_delay = geo.last_dz / geo.dz;  // in time steps
    const auto last_shift = static_cast<std::size_t>(std::floor(last_delay));
    const double last_frac = last_delay - static_cast<double>(last_shift);

    InstanceResult result;
    result.detuning = fields.delta_p;
    result.output_amplitude.resize(nt);
    result.output_intensity.resize(nt);
    StateDiagnostics diag;
    if (options.track_state_diagnostics) diag.min_population = diag.max_population = 0.0;

    FieldGrid fg;
    if (options.keep_field_grid) {
        fg.time_samples = nt;
        fg.positions = nz + 1;
        fg.dt = dt;
        fg.dz = geo.dz;
        fg.values.assign(nt * (nz + 1), Complex{0.0, 0.0});
    }

    field[0] = options.probe_scale * boundary_amplitude(0.0, pulse);
    if (options.keep_field_grid) fg.values[0] = field[0];
    result.output_amplitude[0] = field[nz];

    for (std::size_t k = 1; k < nt; ++k) {
        const double t = dt * static_cast<double>(k);
        previous.swap(field);
        // field now holds a(n_t - 2); keep the sample the stretched final cell needs.
        const Complex older = field[nz - 1];

        // Polarization source from the atoms at n_t - 1, then advance the atoms with a(n_t - 1).
        for (std::size_t j = 0; j < nz; ++j) {
            const AtomicState& s = atoms[j];
            source[j] = source_factor * atoms_in_slice[j] * (g.probe1 * s.rho(3, 1) + g.probe2 * s.rho(4, 1));
            if (exponential)
                exponential->step(atoms[j], previous[j]);
            else
                generator.step(atoms[j], previous[j], dt);
        }

        field[0] = options.probe_scale * boundary_amplitude(t, pulse);
        if (options.stencil == Stencil::Implicit) {
            for (std::size_t j = 1; j <= nz; ++j) {
                const double transport = constants::c / geo.width(j - 1);
                field[j] = (transport * field[j - 1] + previous[j] / dt + source[j - 1]) / (1.0 / dt + transport);
            }
        } else {
            for (std::size_t j = 1; j < nz; ++j) field[j] = previous[j - 1] + dt * source[j - 1];
            // Final stretched cell: trace the characteristic back last_delay steps on slice nz-1
            // and interpolate linearly between the bracketing samples.
            const std::size_t foot = nz - 1;
            Complex near{}, far{};
            if (last_shift == 0) {
                near = field[foot];
                far = previous[foot];
            } else {
                near = previous[foot];
                far = older;
            }
            field[nz] = (1.0 - last_frac) * near + last_frac * far + last_delay * dt * source[foot];
        }

        for (std::size_t j = 0; j <= nz; ++j)
            if (!finite(field[j])) throw NumericalBlowup(k, j);
        if (options.track_state_diagnostics)
            for (const AtomicState& s : atoms) update_diagnostics(diag, s);
        if (options.keep_field_grid) std::copy(field.begin(), field.end(), fg.values.begin() + static_cast<std::ptrdiff_t>(k * (nz + 1)));
        result.output_amplitude[k] = field[nz];
    }

    for (std::size_t k = 0; k < nt; ++k) result.output_intensity[k] = std::norm(result.output_amplitude[k]);
    if (options.track_state_diagnostics) result.diagnostics = diag;
    if (options.keep_field_grid) result.field = std::move(fg);
    return result;
}

double pulse_energy(std::span<const double> intensity, double dt, std::pair<double, double> window)
{
    const auto [lo, hi] = window;
    if (!(hi >= lo)) throw ArgumentError("pulse_energy: inverted window");
    if (intensity.size() < 2) throw ArgumentError("pulse_energy: need at least two samples");
    const double end = dt * static_cast<double>(intensity.size() - 1);
    if (lo < -dt || hi > end + dt) throw ArgumentError("pulse_energy: window outside the record");
    const double a = std::clamp(lo, 0.0, end);
    const double b = std::clamp(hi, 0.0, end);
    if (b <= a) return 0.0;

    auto sample = [&](double t) {
        const double x = t / dt;
        const auto i = std::min(static_cast<std::size_t>(std::floor(x)), intensity.size() - 2);
        const double f = x - static_cast<double>(i);
        return (1.0 - f) * intensity[i] + f * intensity[i + 1];
    };

    const auto first = static_cast<std::size_t>(std::ceil(a / dt));
    const auto last = static_cast<std::size_t>(std::floor(b / dt));
    if (first > last) return 0.5 * (sample(a) + sample(b)) * (b - a);

    double total = 0.0;
    const double ta = dt * static_cast<double>(first);
    total += 0.5 * (sample(a) + intensity[first]) * (ta - a);
    for (std::size_t k = first; k < last; ++k) total += 0.5 * (intensity[k] + intensity[k + 1]) * dt;
    const double tb = dt * static_cast<double>(last);
    total += 0.5 * (intensity[last] + sample(b)) * (b - tb);
    return total;
}

double pulse_energy(const InstanceResult& result, double dt, std::pair<double, double> window)
{
    return pulse_energy(result.output_intensity, dt, window);
}

}  // namespace fasteit
