#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace fasteit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Physical constants at the precision the simulation was specified with.
// These intentionally differ from CODATA in the trailing digits.
namespace constants {
inline constexpr double hbar = 1.0546e-34;        // J s
inline constexpr double c = 299792458.0;          // m/s
inline constexpr double k_B = 1.380e-23;          // J/K
inline constexpr double epsilon0 = 8.85e-12;      // F/m
inline constexpr double torr_to_pascal = 133.323;
}  // namespace constants

// Rb-87 D1 line: |1>=F=1, |2>=F=2, |3>=F'=1, |4>=F'=2.
struct RbD1Constants {
    double omega31 = kTwoPi * 377.1112248e12;  // rad/s
    double omega32 = kTwoPi * 377.1043901e12;  // rad/s
    double omega43 = kTwoPi * 816.65630e6;     // rad/s
    double dipole = 2.537e-29;                 // C m, reduced D1 dipole
    double d11 = dipole / std::sqrt(6.0);
    double d12 = dipole / std::sqrt(1.2);
    double d21 = dipole / std::sqrt(2.0);
    double d22 = dipole / std::sqrt(2.0);
    double gamma31 = kTwoPi * 1.5e6;
    double gamma32 = kTwoPi * 1.5e6;
    double gamma41 = kTwoPi * 1.5e6;
    double gamma42 = kTwoPi * 1.5e6;
    double mass = 1.443194628e-25;  // kg

    // Rebuilds the four transition dipoles from a new base dipole.
    static RbD1Constants with_dipole(double d);
    // All four decay rates set to one value (rad/s).
    void set_decay(double gamma_nm);

    double decay(int excited, int ground) const;
};

// Vapor density from the Rb vapor-pressure fit, in atoms/m^3.
// Valid for 273 K < T < 500 K; throws DomainError otherwise.
double vapor_density(double temperature_K);

struct VaporCell {
    double length = 0.05;           // m
    double temperature = 333.15;    // K
    double beam_waist = 2e-3;       // m
    double cross_section = 0.0;     // m^2, pi (w/2)^2
    double density = 0.0;           // atoms/m^3
    double atom_number = 0.0;       // l A n

    // Derives cross section, density and atom number from geometry and T.
    static VaporCell make(double temperature_K, double length_m = 0.05, double beam_waist_m = 2e-3);
    // Same geometry with an explicitly chosen atom number (density follows).
    VaporCell with_atom_number(double n_atoms) const;
};

struct DopplerGrid {
    std::vector<double> velocities;  // m/s, ascending, symmetric about 0
    std::vector<double> weights;     // sum to 1
};

// Doppler velocity classes over +-sqrt(8 ln2 k_B T / m). `points` must be odd and >= 3.
DopplerGrid doppler_grid(double temperature_K, int points, const RbD1Constants& rb = {});

// Half-range of the velocity discretization, sqrt(8 ln 2 k_B T / m).
double doppler_velocity_limit(double temperature_K, const RbD1Constants& rb = {});

struct DopplerDetunings {
    double probe;    // rad/s
    double control;  // rad/s
};

// Shifts probe and control detunings by the first-order Doppler effect of an atom moving
// at v along the beam. For the probe, nu_p = omega31 + delta_p; for the control,
// omega32 + delta_c.
DopplerDetunings doppler_shift(double delta_p, double delta_c, double velocity,
                               const RbD1Constants& rb = {});

// Field-atom coupling coefficients g = d sqrt(omega / (2 l A eps0 hbar)), rad/s.
struct Couplings {
    double probe1 = 0.0;    // F=1 -> F'=1
    double probe2 = 0.0;    // F=1 -> F'=2
    double control1 = 0.0;  // F=2 -> F'=1
    double control2 = 0.0;  // F=2 -> F'=2
};

Couplings couplings(const VaporCell& cell, const RbD1Constants& rb = {});

}  // namespace fasteit
