#include "fasteit/ensemble.hpp"
#include "fasteit/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

using namespace fasteit;

namespace {

constexpr double kGHz = kTwoPi * 1e9;

// Short records keep the suite fast; 300 samples cover the first packet.
EnsembleConfig small_config(std::size_t detunings = 5, int doppler = 3)
{
    EnsembleConfig c;
    c.detuning_grid = default_detuning_grid(detunings);
    c.doppler_points = doppler;
    c.propagation.grid.time_samples = 300;
    return c;
}

double sum(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_SUITE("ensemble")
{
    TEST_CASE("weights are complete")
    {
        const DetuningEnsemble d = detuning_weights(ProbePulse{}, default_detuning_grid());
        const DopplerGrid v = doppler_grid(333.15, 15);
        double total = 0.0;
        for (double wi : d.weights)
            for (double un : v.weights) total += wi * un;
        CHECK(std::abs(total - 1.0) <= 1e-10);

        const EnsembleResult r = run_ensemble(small_config(), ProbePulse{}, VaporCell::make(333.15));
        CHECK(r.instances == 15);
        CHECK(std::abs(r.total_weight - 1.0) <= 1e-10);
    }

    TEST_CASE("one detuning at rest is a single instance")
    {
        EnsembleConfig c = small_config();
        c.detuning_grid = {-kGHz * 2.0};
        c.doppler_points = 1;
        const VaporCell cell = VaporCell::make(333.15);
        const RbD1Constants rb;
        const EnsembleResult e = run_ensemble(c, ProbePulse{}, cell, rb);

        DrivingFields f;
        f.delta_p = -kGHz * 2.0;
        f.omega43 = rb.omega43;
        const InstanceResult r = propagate_instance(ProbePulse{}, f, cell, couplings(cell, rb), rb, c.propagation);
        REQUIRE(e.intensity.size() == r.output_intensity.size());
        for (std::size_t k = 0; k < r.output_intensity.size(); ++k) CHECK(e.intensity[k] == r.output_intensity[k]);
    }

    TEST_CASE("empty cell passes the pulse whatever the ensemble")
    {
        VaporCell cell = VaporCell::make(333.15);
        cell.atom_number = 0.0;
        EnsembleConfig single = small_config();
        single.detuning_grid = {0.0};
        single.doppler_points = 1;
        const EnsembleResult ref = run_ensemble(single, ProbePulse{}, cell);
        for (int doppler : {1, 3, 7}) {
            EnsembleConfig c = small_config(9, doppler);
            const EnsembleResult e = run_ensemble(c, ProbePulse{}, cell);
            for (std::size_t k = 0; k < e.intensity.size(); ++k)
                CHECK(e.intensity[k] == doctest::Approx(ref.intensity[k]).epsilon(1e-10).scale(1e-12));
        }
    }

    TEST_CASE("worker count does not change bits")
    {
        EnsembleConfig c = small_config(6, 3);
        c.per_instance_filter = FilterSpec{};
        const VaporCell cell = VaporCell::make(338.15);
        c.temperature = cell.temperature;
        c.jobs = 1;
        const EnsembleResult a = run_ensemble(c, ProbePulse{}, cell);
        for (std::size_t jobs : {4, 8, 64}) {
            c.jobs = jobs;
            const EnsembleResult b = run_ensemble(c, ProbePulse{}, cell);
            CHECK(a.intensity == b.intensity);
            CHECK(*a.filtered_intensity == *b.filtered_intensity);
        }
    }

    TEST_CASE("intensity average is non-negative")
    {
        const EnsembleResult r = run_ensemble(small_config(), ProbePulse{}, VaporCell::make(333.15));
        for (double v : r.intensity) CHECK(v >= 0.0);
        CHECK(r.amplitude.empty());
        const auto in = r.filter_input();
        for (std::size_t k = 0; k < in.size(); ++k) CHECK(std::norm(in[k]) == doctest::Approx(r.intensity[k]));
        CHECK(r.per_instance.empty());
    }

    TEST_CASE("amplitude average is the coherent sum")
    {
        EnsembleConfig c = small_config();
        c.reduction = ReductionMode::AmplitudeAverage;
        c.keep_instances = true;
        const EnsembleResult r = run_ensemble(c, ProbePulse{}, VaporCell::make(333.15));
        REQUIRE(r.per_instance.size() == 15);
        const DetuningEnsemble d = detuning_weights(ProbePulse{}, c.detuning_grid);
        const DopplerGrid v = doppler_grid(c.temperature, c.doppler_points);
        for (std::size_t k = 0; k < r.time_axis.size(); k += 37) {
            Complex expect{0.0, 0.0};
            for (std::size_t i = 0; i < 5; ++i)
                for (std::size_t n = 0; n < 3; ++n)
                    expect += d.weights[i] * v.weights[n] * r.per_instance[i * 3 + n].output_amplitude[k];
            CHECK(std::abs(r.amplitude[k] - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
            CHECK(r.intensity[k] == std::norm(r.amplitude[k]));
        }
        CHECK(r.filter_input() == r.amplitude);
    }

    TEST_CASE("per-instance filtering averages filtered intensities")
    {
        EnsembleConfig c = small_config(3, 3);
        c.per_instance_filter = FilterSpec{};
        c.keep_instances = true;
        const EnsembleResult r = run_ensemble(c, ProbePulse{}, VaporCell::make(333.15));
        REQUIRE(r.filtered_intensity.has_value());
        const DetuningEnsemble d = detuning_weights(ProbePulse{}, c.detuning_grid);
        const DopplerGrid v = doppler_grid(c.temperature, c.doppler_points);
        std::vector<double> expect(r.time_axis.size(), 0.0);
        for (std::size_t idx = 0; idx < r.per_instance.size(); ++idx) {
            const auto f = intensity_of(apply_filter(r.per_instance[idx].output_amplitude, c.propagation.grid.dt, FilterSpec{}));
            const double w = d.weights[idx / 3] * v.weights[idx % 3];
            for (std::size_t k = 0; k < f.size(); ++k) expect[k] += w * f[k];
        }
        const double scale = *std::max_element(expect.begin(), expect.end());
        for (std::size_t k = 0; k < expect.size(); ++k)
            CHECK(std::abs((*r.filtered_intensity)[k] - expect[k]) <= 1e-10 * scale);
        CHECK(sum(*r.filtered_intensity) < sum(r.intensity));
    }

    TEST_CASE("retained instances carry their coordinates")
    {
        EnsembleConfig c = small_config(4, 3);
        c.keep_instances = true;
        const EnsembleResult r = run_ensemble(c, ProbePulse{}, VaporCell::make(333.15));
        const DopplerGrid v = doppler_grid(c.temperature, 3);
        for (std::size_t idx = 0; idx < r.per_instance.size(); ++idx) {
            CHECK(r.per_instance[idx].detuning == c.detuning_grid[idx / 3]);
            CHECK(r.per_instance[idx].velocity == v.velocities[idx % 3]);
        }
    }

    TEST_CASE("configuration contracts")
    {
        const VaporCell cell = VaporCell::make(333.15);
        EnsembleConfig c = small_config();
        c.detuning_grid = {0.0, 1.0, 1.0};
        CHECK_THROWS_AS(run_ensemble(c, ProbePulse{}, cell), ConfigError);
        c = small_config();
        c.detuning_grid.clear();
        CHECK_THROWS_AS(run_ensemble(c, ProbePulse{}, cell), ConfigError);
        c = small_config();
        c.doppler_points = 4;
        CHECK_THROWS_AS(run_ensemble(c, ProbePulse{}, cell), ConfigError);
        c = small_config();
        c.temperature = 340.0;
        CHECK_THROWS_AS(run_ensemble(c, ProbePulse{}, cell), ConfigError);
        c = small_config();
        FilterSpec bad;
        bad.reflectivity = 1.5;
        c.per_instance_filter = bad;
        CHECK_THROWS_AS(run_ensemble(c, ProbePulse{}, cell), ConfigError);
    }

    TEST_CASE("blowup names the instance")
    {
        EnsembleConfig c = small_config(3, 3);
        c.propagation.grid.time_samples = 200;
        VaporCell cell = VaporCell::make(333.15);
        cell.atom_number = 1e40;
        try {
            run_ensemble(c, ProbePulse{}, cell);
            FAIL("expected an ensemble error");
        } catch (const EnsembleError& e) {
            const std::string what = e.what();
            CHECK(what.find("detuning #") != std::string::npos);
            CHECK(what.find("velocity #") != std::string::npos);
            CHECK(e.detuning_index() == 0);
            CHECK(e.velocity_index() == 0);
        }
    }

    TEST_CASE("zero control coupling equals control off")
    {
        const VaporCell cell = VaporCell::make(333.15);
        EnsembleConfig off = small_config();
        EnsembleConfig on = off;
        on.control.enabled = true;
        on.control.rabi = 0.0;
        const EnsembleResult a = run_ensemble(off, ProbePulse{}, cell);
        const EnsembleResult b = run_ensemble(on, ProbePulse{}, cell);
        CHECK(transmission_gain(b, a, {0.0, 4e-10}) == 0.0);
    }

    TEST_CASE("control strength changes the gain")
    {
        const VaporCell cell = VaporCell::make(333.15);
        EnsembleConfig off = small_config();
        EnsembleConfig on = off;
        on.control.enabled = true;
        EnsembleConfig stronger = on;
        stronger.control.field *= 2.0;
        const EnsembleResult a = run_ensemble(off, ProbePulse{}, cell);
        const double g1 = transmission_gain(run_ensemble(on, ProbePulse{}, cell), a, {0.0, 4e-10});
        const double g2 = transmission_gain(run_ensemble(stronger, ProbePulse{}, cell), a, {0.0, 4e-10});
        CHECK(g1 != 0.0);
        CHECK(g2 != g1);
    }

    TEST_CASE("transmission gain arithmetic")
    {
        const std::vector<double> off{0.2, 1.0, 0.6, 0.1, 0.0};
        std::vector<double> on = off;
        CHECK(transmission_gain(on, off, 1e-12, {0.0, 4e-12}) == 0.0);
        for (double& v : on) v *= 1.2777;
        CHECK(transmission_gain(on, off, 1e-12, {0.0, 4e-12}) == doctest::Approx(27.77).epsilon(1e-12));
        const std::vector<double> zero(5, 0.0);
        CHECK_THROWS_AS(transmission_gain(on, zero, 1e-12, {0.0, 4e-12}), DataError);
        CHECK_THROWS_AS(transmission_gain(on, std::vector<double>(4, 1.0), 1e-12, {0.0, 3e-12}), ArgumentError);
    }

    TEST_CASE("filtered transmission falls as the vapor warms")
    {
        // Raw energy at this dt is not monotone (explicit coupling gains energy as N grows);
        // the etalon-passed energy is.
        double previous = INFINITY;
        for (double celsius : {55.0, 60.0, 65.0, 70.0, 75.0}) {
            CAPTURE(celsius);
            EnsembleConfig c = small_config(10, 3);
            c.propagation.grid.time_samples = 747;
            c.temperature = celsius + 273.15;
            c.per_instance_filter = FilterSpec{};
            const EnsembleResult r = run_ensemble(c, ProbePulse{}, VaporCell::make(c.temperature));
            const double e = pulse_energy(*r.filtered_intensity, c.propagation.grid.dt, {0.0, 1e-9});
            CHECK(e < previous);
            previous = e;
        }
    }
}
