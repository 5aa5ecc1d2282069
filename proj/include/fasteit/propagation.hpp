#pragma once

#include "fasteit/atomic_model.hpp"
#include "fasteit/bloch_solver.hpp"
#include "fasteit/pulse_model.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fasteit {

// Field update across one slice.
//   Characteristic: a(n_t, n_z) = a(n_t-1, n_z-1) + dt S(n_t-1, n_z-1), exact transport at dz = c dt.
//   Implicit: the backward-difference form
//     a(n_t,n_z) = [(c/dz) a(n_t,n_z-1) + a(n_t-1,n_z)/dt + S(n_t-1,n_z-1)] / (1/dt + c/dz),
//   which at dz = c dt smears the pulse and is not causal.
enum class Stencil : std::uint8_t { Characteristic, Implicit };

// Whether the polarization source is multiplied by the total atom number N = l A n
// or by the atoms of one slice, N dz / l.
enum class SourceScaling : std::uint8_t { TotalAtoms, PerSlice };

// Atomic-state time stepping.
//   ForwardEuler: theta + dt L(a) theta.
//   ExponentialSplit: see ExponentialStepper.
enum class Integrator : std::uint8_t { ForwardEuler, ExponentialSplit };

struct GridSpec {
    double dt = 1.34e-12;          // s
    std::size_t time_samples = 747;

    double dz() const { return constants::c * dt; }
    double duration() const { return dt * static_cast<double>(time_samples - 1); }
    std::vector<double> time_axis() const;
};

// Partition of the cell into Nz = round(l / dz) slices; the last one absorbs the remainder.
struct SliceGeometry {
    std::size_t slices = 0;
    double dz = 0.0;
    double last_dz = 0.0;

    static SliceGeometry make(double length, const GridSpec& grid);
    double width(std::size_t slice) const { return slice + 1 == slices ? last_dz : dz; }
};

struct PropagationOptions {
    GridSpec grid;
    Stencil stencil = Stencil::Characteristic;
    Integrator integrator = Integrator::ForwardEuler;
    SourceScaling source_scaling = SourceScaling::TotalAtoms;
    InitialState initial_state = InitialState::GroundF1;
    double probe_scale = 1.0;          // multiplies the boundary amplitude
    bool track_state_diagnostics = false;
    bool keep_field_grid = false;
};

struct StateDiagnostics {
    double max_trace_error = 0.0;
    double max_hermiticity_defect = 0.0;
    double min_population = 0.0;
    double max_population = 0.0;
};

// Complex probe amplitude on the full (n_t, n_z) grid, row-major in time.
struct FieldGrid {
    std::size_t time_samples = 0;
    std::size_t positions = 0;  // Nz + 1, including z = 0
    double dt = 0.0;
    double dz = 0.0;
    std::vector<Complex> values;

    Complex at(std::size_t n_t, std::size_t n_z) const { return values[n_t * positions + n_z]; }
};

struct InstanceResult {
    double detuning = 0.0;  // rad/s, probe detuning before Doppler shift
    double velocity = 0.0;  // m/s
    std::vector<Complex> output_amplitude;
    std::vector<double> output_intensity;
    std::optional<StateDiagnostics> diagnostics;
    std::optional<FieldGrid> field;
};

// Marches atoms and probe together across the cell for one detuning/velocity class.
// `fields` carries the Doppler-shifted detunings and the control amplitude; its probe
// member is ignored (the probe comes from the boundary pulse).
InstanceResult propagate_instance(const ProbePulse& pulse, const DrivingFields& fields, const VaporCell& cell,
                                  const Couplings& g, const RbD1Constants& rb,
                                  const PropagationOptions& options = {});

// Trapezoidal integral of a uniformly sampled intensity over [lo, hi] (sample k at k dt).
double pulse_energy(std::span<const double> intensity, double dt, std::pair<double, double> window);
double pulse_energy(const InstanceResult& result, double dt, std::pair<double, double> window);

}  // namespace fasteit
