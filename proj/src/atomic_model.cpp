#include "fasteit/atomic_model.hpp"

#include "fasteit/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace fasteit {

RbD1Constants RbD1Constants::with_dipole(double d)
{
    RbD1Constants rb;
    rb.dipole = d;
    rb.d11 = d / std::sqrt(6.0);
    rb.d12 = d / std::sqrt(1.2);
    rb.d21 = d / std::sqrt(2.0);
    rb.d22 = d / std::sqrt(2.0);
    return rb;
}

void RbD1Constants::set_decay(double gamma_nm)
{
    gamma31 = gamma32 = gamma41 = gamma42 = gamma_nm;
}

double RbD1Constants::decay(int excited, int ground) const
{
    if (excited == 3 && ground == 1) return gamma31;
    if (excited == 3 && ground == 2) return gamma32;
    if (excited == 4 && ground == 1) return gamma41;
    if (excited == 4 && ground == 2) return gamma42;
    throw ArgumentError("no decay channel " + std::to_string(excited) + "->" + std::to_string(ground));
}

double vapor_density(double T)
{
    if (!(T > 273.0)) throw DomainError("vapor_density: temperature must exceed 273 K, got " + std::to_string(T) + " K");
    if (!(T < 500.0)) throw DomainError("vapor_density: temperature must be below 500 K, got " + std::to_string(T) + " K");
    const double exponent = -94.04826 - 1961.258 / T - 0.03771687 * T + 42.57526 * std::log10(T);
    return constants::torr_to_pascal / (constants::k_B * T) * std::pow(10.0, exponent);
}

VaporCell VaporCell::make(double temperature_K, double length_m, double beam_waist_m)
{
    if (!(length_m > 0.0) || !(beam_waist_m > 0.0))
        throw ConfigError("vapor cell length and beam waist must be positive");
    VaporCell cell;
    cell.length = length_m;
    cell.temperature = temperature_K;
    cell.beam_waist = beam_waist_m;
    const double r = beam_waist_m / 2.0;
    cell.cross_section = std::numbers::pi * r * r;
    cell.density = vapor_density(temperature_K);
    cell.atom_number = cell.length * cell.cross_section * cell.density;
    return cell;
}

VaporCell VaporCell::with_atom_number(double n_atoms) const
{
    if (n_atoms < 0.0) throw ConfigError("atom number must be non-negative");
    VaporCell cell = *this;
    cell.density = n_atoms / (length * cross_section);
    cell.atom_number = n_atoms;
    return cell;
}

double doppler_velocity_limit(double T, const RbD1Constants& rb)
{
    return std::sqrt(8.0 * std::numbers::ln2 * constants::k_B * T / rb.mass);
}

DopplerGrid doppler_grid(double T, int points, const RbD1Constants& rb)
{
    if (points < 3 || points % 2 == 0)
        throw ConfigError("doppler grid needs an odd number of points >= 3, got " + std::to_string(points));
    if (!(T > 0.0)) throw DomainError("doppler grid: temperature must be positive");

    const double vmax = doppler_velocity_limit(T, rb);
    const int half = points / 2;
    DopplerGrid grid;
    grid.velocities.resize(points);
    grid.weights.resize(points);
    // Built by index from the centre so v(-n) == -v(n) bit for bit.
    for (int n = -half; n <= half; ++n) {
        const double v = vmax * static_cast<double>(n) / static_cast<double>(half);
        grid.velocities[n + half] = v;
        grid.weights[n + half] = std::exp(-rb.mass * v * v / (2.0 * constants::k_B * T));
    }
    // Pairwise summation from the tails inward keeps the sum symmetric.
    double total = grid.weights[half];
    for (int n = half; n >= 1; --n) total += grid.weights[half - n] + grid.weights[half + n];
    for (double& w : grid.weights) w /= total;
    return grid;
}

DopplerDetunings doppler_shift(double delta_p, double delta_c, double v, const RbD1Constants& rb)
{
    if (!(std::abs(v) < 1e4)) throw DomainError("doppler_shift: |v| must be below 1e4 m/s");
    const double probe_frequency = rb.omega31 + delta_p;
    const double control_frequency = rb.omega32 + delta_c;
    return {delta_p + probe_frequency * v / constants::c, delta_c + control_frequency * v / constants::c};
}

Couplings couplings(const VaporCell& cell, const RbD1Constants& rb)
{
    if (!(cell.length > 0.0) || !(cell.cross_section > 0.0))
        throw ConfigError("couplings: cell geometry must be positive");
    const double mode = 2.0 * cell.length * cell.cross_section * constants::epsilon0 * constants::hbar;
    const double probe_scale = std::sqrt(rb.omega31 / mode);
    const double control_scale = std::sqrt(rb.omega32 / mode);
    return {rb.d11 * probe_scale, rb.d12 * probe_scale, rb.d21 * control_scale, rb.d22 * control_scale};
}

}  // namespace fasteit
