#include "fasteit/errors.hpp"
#include "fasteit/etalon.hpp"
#include "fasteit/pulse_model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace fasteit;

namespace {

constexpr double kDt = 1.34e-12;

double energy(const std::vector<Complex>& a)
{
    double e = 0.0;
    for (Complex z : a) e += std::norm(z);
    return e;
}

double relative_l2(const std::vector<Complex>& a, const std::vector<Complex>& b)
{
    double num = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) num += std::norm(a[k] - b[k]);
    return std::sqrt(num / energy(b));
}

std::vector<Complex> boundary_record(std::size_t n = 747, double dt = kDt)
{
    const ProbePulse p;
    std::vector<Complex> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = boundary_amplitude(dt * static_cast<double>(k), p);
    return a;
}

std::vector<Complex> random_record(std::mt19937_64& rng, std::size_t n = 747)
{
    std::normal_distribution<double> nd;
    std::vector<Complex> a(n);
    for (Complex& z : a) z = {nd(rng), nd(rng)};
    return a;
}

std::size_t peak_index(const std::vector<Complex>& a)
{
    std::size_t p = 0;
    for (std::size_t k = 1; k < a.size(); ++k)
        if (std::abs(a[k]) > std::abs(a[p])) p = k;
    return p;
}

}  // namespace

TEST_SUITE("etalon")
{
    TEST_CASE("transfer function analytics")
    {
        const FilterSpec spec;
        const Complex t0 = transfer(0.0, spec);
        CHECK(std::abs(t0.real() - 1.0) <= 1e-12);
        CHECK(std::abs(t0.imag()) <= 1e-12);
        const double r = spec.reflectivity;
        CHECK(std::abs(std::abs(transfer(spec.fsr / 2.0, spec)) - (1.0 - r) / (1.0 + r)) <= 1e-9);
        CHECK((1.0 - r) / (1.0 + r) == doctest::Approx(5.0025e-4).epsilon(1e-4));
        for (double nu : {1e6, 4.2e6, 3e8, 6.65e9, 2.1e10})
            CHECK(std::abs(transfer(nu, spec)) == doctest::Approx(std::abs(transfer(-nu, spec))).epsilon(1e-13));
        // Periodic in the free spectral range up to the linear phase.
        CHECK(std::abs(transfer(spec.fsr, spec)) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("half maximum at the derived linewidth")
    {
        const FilterSpec spec;
        const double fwhm = spec.derived_linewidth();
        CHECK(fwhm == doctest::Approx(4.2356e6).epsilon(1e-4));
        CHECK(std::norm(transfer(fwhm / 2.0, spec)) == doctest::Approx(0.5).epsilon(1e-5));
    }

    TEST_CASE("cascade raises the transfer to a power")
    {
        FilterSpec one;
        FilterSpec two = one;
        two.cascade = 3;
        for (double nu : {0.0, 2e6, 5e7, 6e9}) {
            const Complex a = transfer(nu, one);
            const Complex b = transfer(nu, two);
            CHECK(std::abs(b - a * a * a) <= 1e-14);
        }
        CHECK(two.ringdown_time() == doctest::Approx(3.0 * one.ringdown_time()));
    }

    TEST_CASE("spec validation and the linewidth warning")
    {
        FilterSpec s;
        CHECK_NOTHROW(s.validate());
        REQUIRE(s.consistency_warning().has_value());
        CHECK(s.consistency_warning()->find("43.000000 MHz") != std::string::npos);
        s.linewidth = s.derived_linewidth() * 1.1;
        CHECK_FALSE(s.consistency_warning().has_value());

        FilterSpec bad;
        bad.reflectivity = 1.0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad.reflectivity = 0.0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = FilterSpec{};
        bad.fsr = -1.0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = FilterSpec{};
        bad.cascade = 0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("padding covers the ringdown")
    {
        const FilterSpec spec;
        const std::size_t n = padded_length(747, kDt, spec);
        CHECK((n & (n - 1)) == 0);
        CHECK(static_cast<double>(n) * kDt >= spec.min_padded_duration);
        CHECK(static_cast<double>(n) * kDt >= 747 * kDt + spec.ringdown_time());
    }

    TEST_CASE("vanishing reflectivity is a pure delay")
    {
        FilterSpec spec;
        spec.reflectivity = 1e-12;
        // e^{-i pi nu / FSR} delays by 1/(2 FSR); pick dt so that is 28 whole samples.
        const double dt = 1.0 / (56.0 * spec.fsr);
        std::vector<Complex> in(2000, Complex{0.0, 0.0});
        for (std::size_t k = 0; k < in.size(); ++k) {
            const double t = (static_cast<double>(k) - 600.0) * dt;
            in[k] = std::exp(-t * t / (2.0 * std::pow(80.0 * dt, 2))) * std::polar(1.0, 0.01 * static_cast<double>(k));
        }
        const auto out = apply_filter(in, dt, spec);
        std::vector<Complex> shifted(in.size(), Complex{0.0, 0.0});
        for (std::size_t k = 28; k < in.size(); ++k) shifted[k] = in[k - 28];
        CHECK(relative_l2(out, shifted) <= 1e-6);
        CHECK(energy(out) == doctest::Approx(energy(in)).epsilon(1e-6));
    }

    TEST_CASE("continuous wave at the carrier is transmitted")
    {
        FilterSpec spec;
        spec.reflectivity = 0.99;  // about 43 MHz wide, rings for a few ns
        const std::vector<Complex> in(40000, Complex{1.0, 0.0});
        const auto out = apply_filter(in, kDt, spec);
        CHECK(std::abs(out.back()) == doctest::Approx(1.0).epsilon(2e-3));
        CHECK(std::abs(out[10]) < 0.05);

        // Detuned by many linewidths the same wave is rejected.
        std::vector<Complex> off(in.size());
        for (std::size_t k = 0; k < off.size(); ++k) off[k] = std::polar(1.0, kTwoPi * 2e9 * kDt * static_cast<double>(k));
        CHECK(std::abs(apply_filter(off, kDt, spec).back()) < 0.02);
    }

    TEST_CASE("carrier offset shifts the passband")
    {
        FilterSpec spec;
        spec.reflectivity = 0.99;
        std::vector<Complex> in(40000);
        for (std::size_t k = 0; k < in.size(); ++k) in[k] = std::polar(1.0, kTwoPi * 2e9 * kDt * static_cast<double>(k));
        const auto out = apply_filter(in, kDt, spec, 2e9);
        CHECK(std::abs(out.back()) == doctest::Approx(1.0).epsilon(2e-3));
    }

    TEST_CASE("energy contraction")
    {
        std::mt19937_64 rng(11);
        for (double r : {0.5, 0.9, 0.999}) {
            FilterSpec spec;
            spec.reflectivity = r;
            for (int trial = 0; trial < 3; ++trial) {
                const auto in = random_record(rng);
                CHECK(energy(apply_filter(in, kDt, spec)) <= energy(in));
            }
            const auto pulse = boundary_record();
            CHECK(energy(apply_filter(pulse, kDt, spec)) <= energy(pulse));
        }
    }

    TEST_CASE("linearity")
    {
        std::mt19937_64 rng(5);
        const FilterSpec spec;
        const auto x = random_record(rng);
        const auto y = random_record(rng);
        const Complex alpha{0.7, -1.3};
        const Complex beta{-2.1, 0.4};
        std::vector<Complex> mix(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) mix[k] = alpha * x[k] + beta * y[k];
        const auto fx = apply_filter(x, kDt, spec);
        const auto fy = apply_filter(y, kDt, spec);
        std::vector<Complex> expected(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) expected[k] = alpha * fx[k] + beta * fy[k];
        CHECK(relative_l2(apply_filter(mix, kDt, spec), expected) <= 1e-10);
    }

    TEST_CASE("doubling the pad leaves the output unchanged")
    {
        const FilterSpec spec;
        const auto in = boundary_record();
        const std::size_t n = padded_length(in.size(), kDt, spec);
        const auto base = apply_filter(in, kDt, spec, 0.0, n);
        const auto doubled = apply_filter(in, kDt, spec, 0.0, 2 * n);
        CHECK(relative_l2(doubled, base) <= 1e-4);
    }

    TEST_CASE("filtered pulse is delayed and stretched")
    {
        const FilterSpec spec;
        const auto in = boundary_record();
        const auto out = apply_filter(in, kDt, spec);
        REQUIRE(out.size() == in.size());
        CHECK(peak_index(out) > peak_index(in));
        // The narrow line keeps building up over the whole record.
        const double tail_out = std::abs(out.back()) / std::abs(out[peak_index(out)]);
        const double tail_in = std::abs(in.back()) / std::abs(in[0]);
        CHECK(tail_out > 0.5);
        CHECK(tail_out > 20.0 * tail_in);
    }

    TEST_CASE("kernel and FFT routes agree")
    {
        std::mt19937_64 rng(2);
        for (double offset : {0.0, 2.5e8}) {
            FilterSpec spec;
            spec.cascade = 2;
            const FilterKernel kernel(747, kDt, spec, offset);
            for (int trial = 0; trial < 2; ++trial) {
                const auto in = random_record(rng);
                CHECK(relative_l2(kernel.apply(in), apply_filter(in, kDt, spec, offset)) <= 1e-12);
            }
        }
        const FilterKernel kernel(747, kDt, FilterSpec{});
        CHECK_THROWS_AS(kernel.apply(std::vector<Complex>(10)), ArgumentError);
        CHECK_THROWS_AS(FilterKernel(747, kDt, FilterSpec{}, 0.0, 1000), ArgumentError);
    }

    TEST_CASE("input contracts")
    {
        const FilterSpec spec;
        std::vector<Complex> a(10, Complex{1.0, 0.0});
        std::vector<double> t(10);
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = kDt * static_cast<double>(k);
        CHECK_NOTHROW(apply_filter(a, t, spec));
        t[6] += 0.3 * kDt;
        CHECK_THROWS_AS(apply_filter(a, t, spec), ArgumentError);
        CHECK_THROWS_AS(apply_filter(a, std::vector<double>(3), spec), ArgumentError);
        CHECK_THROWS_AS(apply_filter(std::vector<Complex>(1), kDt, spec), ArgumentError);
        CHECK_THROWS_AS(apply_filter(a, -kDt, spec), ArgumentError);
        FilterSpec bad;
        bad.reflectivity = 2.0;
        CHECK_THROWS_AS(apply_filter(a, kDt, bad), ConfigError);
    }

    TEST_CASE("zero-phase amplitude of an intensity")
    {
        const std::vector<double> i{0.0, 0.25, 4.0, -1e-18};
        const auto a = amplitude_from_intensity(i);
        CHECK(a[1] == Complex{0.5, 0.0});
        CHECK(a[2] == Complex{2.0, 0.0});
        CHECK(a[3] == Complex{0.0, 0.0});
        const auto back = intensity_of(a);
        CHECK(back[2] == 4.0);
    }
}
