#include "fasteit/errors.hpp"
#include "fasteit/experiment_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace fasteit;
namespace fs = std::filesystem;

namespace {

std::string histogram_text(std::size_t rows, double width_ps = 1.34)
{
    std::ostringstream s;
    s << "t_ps,counts\n";
    for (std::size_t i = 0; i < rows; ++i) s << static_cast<double>(i) * width_ps << ',' << (i % 17) << '\n';
    return s.str();
}

std::size_t error_line(const std::string& text)
{
    try {
        parse_histogram(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "fasteit_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

// Two-packet test profile: a sharp spike and a broader, later bump.
std::vector<double> two_packets(const std::vector<double>& t, double second = 250e-12)
{
    std::vector<double> y(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double a = (t[k] - 170e-12) / 5e-12;
        const double b = (t[k] - second) / 30e-12;
        y[k] = std::exp(-a * a) + 0.3 * std::exp(-b * b);
    }
    return y;
}

std::vector<double> axis(std::size_t n = 747, double dt = 1.34e-12)
{
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = dt * static_cast<double>(k);
    return t;
}

}  // namespace

TEST_SUITE("experiment-io")
{
    TEST_CASE("happy-path histogram")
    {
        const TemporalHistogram h = parse_histogram(histogram_text(747));
        CHECK(h.size() == 747);
        CHECK(h.bin_edges.size() == 748);
        CHECK(h.bin_width() == doctest::Approx(1.34e-12).epsilon(1e-12));
        CHECK(h.counts[18] == 1.0);
        CHECK_FALSE(h.background_rate.has_value());
    }

    TEST_CASE("delimiters and metadata")
    {
        const std::string tab = "# background_rate: 5 Hz\n# integration_time: 10 h\n# a free comment\n"
                                "t_ns\tcounts\n0\t3\n0.5\t7\n1.0\t2\n";
        const TemporalHistogram h = parse_histogram(tab);
        CHECK(h.size() == 3);
        CHECK(h.bin_width() == doctest::Approx(0.5e-9));
        CHECK(*h.background_rate == 5.0);
        CHECK(*h.integration_time == doctest::Approx(36000.0));
        const TemporalHistogram w = parse_histogram("t_ps counts\n10   1\n20   2\n", HistogramFormat::Whitespace);
        CHECK(w.bin_edges.front() == doctest::Approx(10e-12));
        CHECK(w.bin_edges.back() == doctest::Approx(30e-12));
    }

    TEST_CASE("parse errors carry the line")
    {
        CHECK(error_line("t_ps,counts\n0,1\n1,-3\n2,1\n") == 3);
        CHECK(error_line("t_ps,counts\n0,1\n1,x\n") == 3);
        CHECK(error_line("t_ps,counts\n0,1\n1\n") == 3);
        CHECK(error_line("t_ps,counts\n0,1\n1,1\n2.5,1\n") == 4);
        CHECK(error_line("t_ps,counts\n0,1\n0,1\n") == 3);
        CHECK(error_line("time,counts\n0,1\n") == 1);
        CHECK(error_line("t_min,counts\n0,1\n") == 1);
        CHECK(error_line("# background_rate: 5\nt_ps,counts\n0,1\n1,1\n") == 1);
        try {
            parse_histogram("");
            FAIL("empty input parsed");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("no data rows") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_histogram("t_ps,counts\n"), ParseError);
        CHECK_THROWS_AS(parse_histogram("t_ps,counts\n5,1\n"), ParseError);
    }

    TEST_CASE("file round trip and IO errors")
    {
        TemporalHistogram h = TemporalHistogram::uniform(-20e-12, 4e-12, {0, 1, 5, 2.5, 0});
        h.background_rate = 5.0;
        h.integration_time = 3600.0;
        h.repetition_rate = 76e6;
        const fs::path p = scratch("hist.csv");
        write_histogram(p, h);
        const TemporalHistogram back = load_histogram(p);
        CHECK(back.counts == h.counts);
        CHECK(*back.background_rate == 5.0);
        CHECK(*back.repetition_rate == 76e6);
        for (std::size_t i = 0; i < h.bin_edges.size(); ++i)
            CHECK(back.bin_edges[i] == doctest::Approx(h.bin_edges[i]).epsilon(1e-12));

        CHECK_THROWS_AS(load_histogram(scratch("missing.csv")), IoError);
        std::ofstream(scratch("bad.csv")) << "t_ps,counts\n0,1\n1,-2\n";
        try {
            load_histogram(scratch("bad.csv"));
            FAIL("negative counts parsed");
        } catch (const ParseError& e) {
            const std::string what = e.what();
            CHECK(what.find("bad.csv") != std::string::npos);
            CHECK(what.find("(line 3)") == what.rfind("(line"));
        }
    }

    TEST_CASE("background subtraction")
    {
        TemporalHistogram h = TemporalHistogram::uniform(0.0, 4e-12, {10, 20, 30});
        CHECK_THROWS_AS(background_level(h), ContractError);
        h.background_rate = 0.0;
        h.integration_time = 3600.0;
        CHECK(subtract_background(h).counts == h.counts);

        // 5 counts/s over 10 h, folded onto 4 ps bins of an 80 MHz train.
        h.background_rate = 5.0;
        h.integration_time = 36000.0;
        const double level = background_level(h);
        CHECK(level == doctest::Approx(5.0 * 36000.0 * 4e-12 * 80e6));
        TemporalHistogram flat = h;
        flat.counts.assign(3, level);
        for (double c : subtract_background(flat).counts) CHECK(c == 0.0);

        std::vector<double> pulse(200);
        TemporalHistogram shaped = h;
        shaped.counts.resize(pulse.size());
        shaped.bin_edges.clear();
        for (std::size_t i = 0; i < pulse.size(); ++i) {
            pulse[i] = 1000.0 * std::exp(-static_cast<double>(i) / 30.0);
            shaped.counts[i] = pulse[i] + level;
            shaped.bin_edges.push_back(4e-12 * static_cast<double>(i));
        }
        shaped.bin_edges.push_back(4e-12 * 200.0);
        const TemporalHistogram recovered = subtract_background(shaped);
        for (std::size_t i = 0; i < pulse.size(); ++i) CHECK(std::abs(recovered.counts[i] - pulse[i]) <= 1.0);
    }

    TEST_CASE("normalization")
    {
        const std::vector<double> p{0.0, 0.5, 1.0, 0.25};
        CHECK(normalize(p, NormalizeMode::Peak) == p);
        std::vector<double> scaled = p;
        for (double& v : scaled) v *= 7.0;
        const auto a = normalize(scaled, NormalizeMode::Peak);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(a[i] == doctest::Approx(p[i]).epsilon(1e-15));

        const double tau = 134e-12;
        const std::size_t n = 200001;
        const double dt = 1e-9 / static_cast<double>(n - 1);
        std::vector<double> decay(n);
        for (std::size_t k = 0; k < n; ++k) decay[k] = std::exp(-dt * static_cast<double>(k) / tau);
        const auto e = normalize(decay, NormalizeMode::Energy, dt);
        double integral = 0.0;
        for (std::size_t k = 1; k < n; ++k) integral += 0.5 * dt * (e[k - 1] + e[k]);
        CHECK(std::abs(integral - 1.0) <= 1e-6);

        CHECK_THROWS_AS(normalize(std::vector<double>(5, 0.0), NormalizeMode::Peak), DataError);
        CHECK_THROWS_AS(normalize(std::vector<double>(5, 0.0), NormalizeMode::Energy), DataError);
    }

    TEST_CASE("wave packets")
    {
        const auto t = axis();
        const auto y = two_packets(t);
        const auto packets = find_wave_packets(t, y);
        REQUIRE(packets.size() == 2);
        CHECK(packets[0].time == doctest::Approx(170e-12).epsilon(0.01));
        CHECK(packets[1].time == doctest::Approx(250e-12).epsilon(0.01));
        CHECK(packet_delay(packets) == doctest::Approx(80e-12).epsilon(0.02));
        CHECK(std::isnan(packet_delay({packets[0]})));

        // Ripples below the prominence threshold are ignored.
        std::vector<double> ripple = y;
        for (std::size_t k = 0; k < ripple.size(); ++k) ripple[k] += 1e-4 * std::sin(0.9 * static_cast<double>(k));
        CHECK(find_wave_packets(t, ripple).size() == 2);
        CHECK(find_wave_packets(t, std::vector<double>(t.size(), 0.0)).empty());
        CHECK_THROWS_AS(find_wave_packets(t, std::vector<double>(3)), ArgumentError);
    }

    TEST_CASE("comparison against histograms")
    {
        const auto t = axis();
        const auto y = two_packets(t);

        // Self-comparison through 1.34 ps bins.
        std::vector<double> counts(t.size() - 1);
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = 0.5 * (y[i] + y[i + 1]);
        const TemporalHistogram self = TemporalHistogram::uniform(0.0, 1.34e-12, counts);
        const ComparisonMetrics m = compare(t, y, TemporalHistogram::uniform(-0.67e-12, 1.34e-12,
                                                                             std::vector<double>(y.begin(), y.end() - 1)));
        CHECK(m.relative_l2 < 1e-3);
        CHECK(m.overlap_bins > 700);
        CHECK(compare(t, y, self).relative_l2 < 1e-3);

        // Measured data later by 50 ps.
        std::vector<double> shifted(400);
        for (std::size_t i = 0; i < shifted.size(); ++i) {
            const double c = 4e-12 * (static_cast<double>(i) + 0.5) - 50e-12;
            const double a = (c - 170e-12) / 5e-12;
            const double b = (c - 250e-12) / 30e-12;
            shifted[i] = std::exp(-a * a) + 0.3 * std::exp(-b * b);
        }
        const TemporalHistogram later = TemporalHistogram::uniform(0.0, 4e-12, shifted);
        const ComparisonMetrics s = compare(t, y, later);
        CHECK(std::abs(s.peak_offset - 50e-12) <= 4e-12);
        const ComparisonMetrics aligned = compare(t, y, later, Alignment::Peak);
        CHECK(aligned.applied_shift == s.peak_offset);
        CHECK(aligned.relative_l2 < s.relative_l2);
        REQUIRE(aligned.packet_delay_differences.size() == 1);
        CHECK(std::abs(aligned.packet_delay_differences[0]) <= 8e-12);

        const TemporalHistogram far = TemporalHistogram::uniform(5e-9, 4e-12, {1, 2, 1});
        CHECK_THROWS_AS(compare(t, y, far), ArgumentError);
    }

    TEST_CASE("profile csv")
    {
        const std::vector<double> t{0.0, 1.34e-12};
        const std::vector<double> a{1.0, 0.1};
        const std::vector<double> b{0.5, 1.0 / 3.0};
        const fs::path p = scratch("profile.csv");
        write_profile_csv(p, t, {{"intensity", a}, {"filtered", b}});
        std::ifstream in(p);
        std::string header, row1, row2;
        std::getline(in, header);
        std::getline(in, row1);
        std::getline(in, row2);
        CHECK(header == "t_s,intensity,filtered");
        CHECK(row1 == "0,1,0.5");
        CHECK(row2 == "1.3399999999999999e-12,0.10000000000000001,0.33333333333333331");
        CHECK_THROWS_AS(write_profile_csv(p, t, {{"short", std::vector<double>{1.0}}}), ArgumentError);
    }
}
