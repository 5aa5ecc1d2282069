#pragma once

#include "fasteit/atomic_model.hpp"
#include "fasteit/errors.hpp"
#include "fasteit/histogram.hpp"

#include <array>
#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace fasteit {

// Single-photon wave packet from the quantum dot together with the Gaussian
// distribution of its centre frequency.
struct ProbePulse {
    double tau = 134e-12;                      // s, emitter lifetime
    double gamma = 1.0 / (2.0 * 134e-12);      // rad/s, half decay rate
    double center_detuning = kTwoPi * -4.0e9;  // rad/s from omega31
    double sigma = kTwoPi * 1.5e9;             // rad/s

    static ProbePulse from_lifetime(double tau_s, double center_detuning = kTwoPi * -4.0e9,
                                    double sigma = kTwoPi * 1.5e9);
    void validate() const;
};

// a(z=0, t): zero before emission, e^{-gamma t} afterwards.
double boundary_amplitude(double t, const ProbePulse& pulse);

// Normalized Lorentzian power spectrum centred at omega_p.
double lorentzian_spectrum(double omega, const ProbePulse& pulse, double omega_p);

struct DetuningEnsemble {
    std::vector<double> detunings;  // rad/s
    std::vector<double> weights;
};

// 100 points over [-13.9, +5.9] GHz, in rad/s.
std::vector<double> default_detuning_grid(std::size_t points = 100, double lo_hz = -13.9e9,
                                          double hi_hz = 5.9e9);

DetuningEnsemble detuning_weights(const ProbePulse& pulse, std::span<const double> grid);

// f1(t) = q1 q3 / ((t - q2)^2 + q1^2) + q4
struct LorentzianParams {
    double q1 = 0.0;  // s, half-width
    double q2 = 0.0;  // s, centre
    double q3 = 0.0;  // s * counts
    double q4 = 0.0;  // baseline counts

    double operator()(double t) const { return q1 * q3 / ((t - q2) * (t - q2) + q1 * q1) + q4; }
};

struct LorentzianFit {
    LorentzianParams params;
    double residual = 0.0;  // sum of squared residuals
    int iterations = 0;
};

class FitError : public Error {
public:
    FitError(const std::string& what, LorentzianFit best) : Error(what), best_(best) {}
    const LorentzianFit& best() const noexcept { return best_; }

private:
    LorentzianFit best_;
};

struct FitOptions {
    int max_iterations = 200;
    double tolerance = 1e-8;  // relative parameter change
};

// Damped Gauss-Newton fit of f1 to the histogram bin centres.
LorentzianFit fit_lorentzian(const TemporalHistogram& hist, const FitOptions& options = {});

// Lifetime from an unweighted least-squares line through log(counts) over the window.
double extract_decay_time(const TemporalHistogram& hist, std::pair<double, double> window);

// Default pre-processing segment length.
inline constexpr double kFitSegment = 1.5e-9;

}  // namespace fasteit
