#include "fasteit/pulse_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fasteit {

ProbePulse ProbePulse::from_lifetime(double tau_s, double center_detuning, double sigma)
{
    ProbePulse p;
    p.tau = tau_s;
    p.gamma = 1.0 / (2.0 * tau_s);
    p.center_detuning = center_detuning;
    p.sigma = sigma;
    p.validate();
    return p;
}

void ProbePulse::validate() const
{
    if (!(tau > 0.0)) throw ConfigError("probe lifetime must be positive");
    if (!(sigma > 0.0)) throw ConfigError("probe detuning width must be positive");
    if (std::abs(gamma * 2.0 * tau - 1.0) > 1e-12) throw ConfigError("probe gamma must equal 1/(2 tau)");
}

double boundary_amplitude(double t, const ProbePulse& pulse)
{
    return t < 0.0 ? 0.0 : std::exp(-pulse.gamma * t);
}

double lorentzian_spectrum(double omega, const ProbePulse& pulse, double omega_p)
{
    const double x = omega - omega_p;
    return pulse.gamma / (std::numbers::pi * (x * x + pulse.gamma * pulse.gamma));
}

std::vector<double> default_detuning_grid(std::size_t points, double lo_hz, double hi_hz)
{
    if (points == 0) throw ConfigError("detuning grid needs at least one point");
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = kTwoPi * lo_hz;
        return grid;
    }
    const double step = (hi_hz - lo_hz) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = kTwoPi * (lo_hz + step * static_cast<double>(i));
    grid.back() = kTwoPi * hi_hz;
    return grid;
}

DetuningEnsemble detuning_weights(const ProbePulse& pulse, std::span<const double> grid)
{
    if (grid.empty()) throw ConfigError("detuning grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ConfigError("detuning grid must be strictly increasing");
    if (!(pulse.sigma > 0.0)) throw ConfigError("probe detuning width must be positive");

    DetuningEnsemble ens;
    ens.detunings.assign(grid.begin(), grid.end());
    ens.weights.resize(grid.size());
    const double two_var = 2.0 * pulse.sigma * pulse.sigma;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i] - pulse.center_detuning;
        ens.weights[i] = std::exp(-x * x / two_var);
    }
    const double total = std::accumulate(ens.weights.begin(), ens.weights.end(), 0.0);
    if (!(total > 0.0)) throw ConfigError("detuning grid lies entirely outside the probe distribution");
    for (double& w : ens.weights) w /= total;
    return ens;
}

namespace {

double median(std::vector<double> v)
{
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

// Parameters in fit units: time measured in bins from the first bin centre,
// counts relative to the peak count.
using Vec4 = Eigen::Vector4d;

struct ScaledModel {
    std::vector<double> x;
    std::vector<double> y;

    double sse(const Vec4& p) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - p[1];
            const double r = p[0] * p[2] / (d * d + p[0] * p[0]) + p[3] - y[i];
            s += r * r;
        }
        return s;
    }

    // Normal equations J^T J and J^T r for the current parameters.
    void normal_equations(const Vec4& p, Eigen::Matrix4d& jtj, Vec4& jtr) const
    {
        jtj.setZero();
        jtr.setZero();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - p[1];
            const double den = d * d + p[0] * p[0];
            const double r = p[0] * p[2] / den + p[3] - y[i];
            Vec4 j;
            j[0] = p[2] * (d * d - p[0] * p[0]) / (den * den);
            j[1] = 2.0 * p[0] * p[2] * d / (den * den);
            j[2] = p[0] / den;
            j[3] = 1.0;
            jtj.noalias() += j * j.transpose();
            jtr.noalias() += j * r;
        }
    }
};

}  // namespace

LorentzianFit fit_lorentzian(const TemporalHistogram& hist, const FitOptions& options)
{
    hist.validate();
    const std::size_t n = hist.size();
    if (n < 10) throw DataError("fit_lorentzian needs at least 10 bins, got " + std::to_string(n));

    const double width = hist.bin_width();
    const double t0 = hist.bin_center(0);
    const auto peak_it = std::max_element(hist.counts.begin(), hist.counts.end());
    const std::size_t peak_idx = static_cast<std::size_t>(peak_it - hist.counts.begin());
    const double peak = *peak_it;

    const std::size_t head = std::max<std::size_t>(1, n / 10);
    const double baseline = median(std::vector<double>(hist.counts.begin(), hist.counts.begin() + head));

    auto unscale = [&](const Vec4& p) {
        const double yscale = peak > 0.0 ? peak : 1.0;
        LorentzianParams q;
        q.q1 = p[0] * width;
        q.q2 = t0 + p[1] * width;
        q.q3 = p[2] * width * yscale;
        q.q4 = p[3] * yscale;
        return q;
    };

    if (!(peak > baseline)) {
        LorentzianFit degenerate;
        degenerate.params = {0.0, hist.bin_center(peak_idx), 0.0, baseline};
        throw FitError("fit_lorentzian: no bin rises above the baseline", degenerate);
    }

    const double half_level = baseline + 0.5 * (peak - baseline);
    std::size_t left = peak_idx;
    while (left > 0 && hist.counts[left] > half_level) --left;
    std::size_t right = peak_idx;
    while (right + 1 < n && hist.counts[right] > half_level) ++right;
    // Linear interpolation of the half-level crossings, in bins.
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double a = hist.counts[inside];
        const double b = hist.counts[outside];
        const double frac = a != b ? (a - half_level) / (a - b) : 0.5;
        return static_cast<double>(inside) + frac * (static_cast<double>(outside) - static_cast<double>(inside));
    };
    const double lx = left < peak_idx ? crossing(left + 1, left) : static_cast<double>(left);
    const double rx = right > peak_idx ? crossing(right - 1, right) : static_cast<double>(right);
    const double hwhm = std::max(0.5 * (rx - lx), 0.5);

    ScaledModel model;
    model.x.resize(n);
    model.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        model.x[i] = (hist.bin_center(i) - t0) / width;
        model.y[i] = hist.counts[i] / peak;
    }

    Vec4 p;
    p << hwhm, static_cast<double>(peak_idx), (peak - baseline) / peak * hwhm, baseline / peak;
    double cost = model.sse(p);
    double lambda = 1e-3;

    LorentzianFit fit;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        Eigen::Matrix4d jtj;
        Vec4 jtr;
        model.normal_equations(p, jtj, jtr);

        bool accepted = false;
        Vec4 step = Vec4::Zero();
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::Matrix4d a = jtj;
            for (int k = 0; k < 4; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-30);
            step = a.ldlt().solve(-jtr);
            Vec4 trial = p + step;
            if (trial[0] <= 0.0) trial[0] = 0.5 * p[0];
            const double trial_cost = model.sse(trial);
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                step = trial - p;
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }

        fit.params = unscale(p);
        fit.residual = cost * peak * peak;
        fit.iterations = iter;
        const double rel_change = step.cwiseAbs().cwiseQuotient(p.cwiseAbs().cwiseMax(1e-12)).maxCoeff();
        if (!accepted || rel_change < options.tolerance) {
            if (!(fit.params.q1 > 0.0) || !(fit.params.q3 > 0.0))
                throw FitError("fit_lorentzian: fit collapsed to a non-positive peak", fit);
            return fit;
        }
    }
    throw FitError("fit_lorentzian: no convergence after " + std::to_string(options.max_iterations) + " iterations",
                   fit);
}

double extract_decay_time(const TemporalHistogram& hist, std::pair<double, double> window)
{
    hist.validate();
    const auto [lo, hi] = window;
    if (!(hi > lo)) throw ArgumentError("extract_decay_time: window end must follow its start");
    if (lo < hist.bin_edges.front() || hi > hist.bin_edges.back())
        throw ArgumentError("extract_decay_time: window outside histogram support");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    const double t_ref = lo;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        const double t = hist.bin_center(i);
        if (t < lo || t > hi) continue;
        if (!(hist.counts[i] > 0.0))
            throw DataError("extract_decay_time: non-positive count in window at bin " + std::to_string(i));
        const double x = t - t_ref;
        const double y = std::log(hist.counts[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw DataError("extract_decay_time: fewer than two bins in window");
    const double mm = static_cast<double>(m);
    const double denom = mm * sxx - sx * sx;
    const double slope = (mm * sxy - sx * sy) / denom;
    if (!(slope < 0.0) || !std::isfinite(slope))
        throw DataError("extract_decay_time: counts do not decay over the window");
    return -1.0 / slope;
}

}  // namespace fasteit
