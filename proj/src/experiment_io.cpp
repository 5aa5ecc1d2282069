#include "fasteit/experiment_io.hpp"

#include "fasteit/errors.hpp"
#include "fasteit/units.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fasteit {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, HistogramFormat format)
{
    std::vector<std::string_view> out;
    if (format == HistogramFormat::Whitespace) {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            const std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i > start) out.push_back(line.substr(start, i - start));
        }
        return out;
    }
    const char delim = format == HistogramFormat::Comma ? ',' : '\t';
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double time_unit_scale(std::string_view unit)
{
    if (unit == "s") return 1.0;
    if (unit == "ms") return 1e-3;
    if (unit == "us") return 1e-6;
    if (unit == "ns") return 1e-9;
    if (unit == "ps") return 1e-12;
    if (unit == "fs") return 1e-15;
    return 0.0;
}

bool parse_number(std::string_view s, double& out)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && end == s.data() + s.size() && std::isfinite(out);
}

void parse_metadata(std::string_view body, TemporalHistogram& hist, std::size_t line)
{
    const std::size_t colon = body.find(':');
    if (colon == std::string_view::npos) return;  // free-form comment
    const std::string_view key = trim(body.substr(0, colon));
    const std::string value(trim(body.substr(colon + 1)));
    try {
        if (key == "background_rate")
            hist.background_rate = parse_quantity(value, Dimension::Rate);
        else if (key == "integration_time")
            hist.integration_time = parse_quantity(value, Dimension::Time);
        else if (key == "repetition_rate")
            hist.repetition_rate = parse_quantity(value, Dimension::Frequency);
    } catch (const ConfigError& e) {
        throw ParseError(std::string(key) + ": " + e.what(), line);
    }
}

}  // namespace

TemporalHistogram parse_histogram(const std::string& text, HistogramFormat format)
{
    TemporalHistogram hist;
    std::vector<double> starts;
    double scale = 0.0;
    bool have_header = false;

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            parse_metadata(line.substr(1), hist, line_no);
            continue;
        }
        if (!have_header) {
            if (format == HistogramFormat::Auto)
                format = line.find(',') != std::string_view::npos    ? HistogramFormat::Comma
                         : line.find('\t') != std::string_view::npos ? HistogramFormat::Tab
                                                                     : HistogramFormat::Whitespace;
            const auto cols = split(line, format);
            if (cols.size() != 2 || cols[1] != "counts" || cols[0].substr(0, 2) != "t_")
                throw ParseError("expected header 't_<unit>,counts'", line_no);
            scale = time_unit_scale(cols[0].substr(2));
            if (scale == 0.0) throw ParseError("unknown time unit '" + std::string(cols[0].substr(2)) + "'", line_no);
            have_header = true;
            continue;
        }

        const auto cols = split(line, format);
        if (cols.size() != 2) throw ParseError("expected 2 columns, found " + std::to_string(cols.size()), line_no);
        double t = 0.0;
        double c = 0.0;
        if (!parse_number(cols[0], t)) throw ParseError("malformed time '" + std::string(cols[0]) + "'", line_no);
        if (!parse_number(cols[1], c)) throw ParseError("malformed counts '" + std::string(cols[1]) + "'", line_no);
        if (c < 0.0) throw ParseError("negative counts", line_no);
        t *= scale;

        const std::size_t n = starts.size();
        if (n >= 1 && !(t > starts[n - 1])) throw ParseError("bin times must increase", line_no);
        if (n >= 2) {
            const double width = starts[1] - starts[0];
            if (std::abs((t - starts[n - 1]) - width) > 1e-9 * width) throw ParseError("non-uniform bin width", line_no);
        }
        starts.push_back(t);
        hist.counts.push_back(c);
    }

    if (starts.empty()) throw ParseError("no data rows", line_no);
    if (starts.size() < 2) throw ParseError("at least two data rows are needed to fix the bin width", line_no);

    const double width = starts[1] - starts[0];
    hist.bin_edges = std::move(starts);
    hist.bin_edges.push_back(hist.bin_edges.back() + width);
    return hist;
}

TemporalHistogram load_histogram(const std::filesystem::path& path, HistogramFormat format)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open histogram file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    try {
        return parse_histogram(buf.str(), format);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.detail(), e.line());
    }
}

void write_histogram(const std::filesystem::path& path, const TemporalHistogram& hist, const std::string& time_unit)
{
    hist.validate();
    const double scale = time_unit_scale(time_unit);
    if (scale == 0.0) throw ArgumentError("write_histogram: unknown time unit '" + time_unit + "'");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write histogram file '" + path.string() + "'");
    char buf[96];
    if (hist.background_rate) {
        std::snprintf(buf, sizeof buf, "# background_rate: %.17g 1/s\n", *hist.background_rate);
        out << buf;
    }
    if (hist.integration_time) {
        std::snprintf(buf, sizeof buf, "# integration_time: %.17g s\n", *hist.integration_time);
        out << buf;
    }
    if (hist.repetition_rate) {
        std::snprintf(buf, sizeof buf, "# repetition_rate: %.17g Hz\n", *hist.repetition_rate);
        out << buf;
    }
    out << "t_" << time_unit << ",counts\n";
    for (std::size_t i = 0; i < hist.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", hist.bin_edges[i] / scale, hist.counts[i]);
        out << buf;
    }
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

double background_level(const TemporalHistogram& hist)
{
    if (!hist.background_rate || !hist.integration_time)
        throw ContractError("subtract_background needs background_rate and integration_time");
    const double rep = hist.repetition_rate.value_or(kDefaultRepetitionRate);
    return *hist.background_rate * *hist.integration_time * hist.bin_width() * rep;
}

TemporalHistogram subtract_background(const TemporalHistogram& hist)
{
    const double level = background_level(hist);
    TemporalHistogram out = hist;
    for (double& c : out.counts) c = std::max(c - level, 0.0);
    return out;
}

std::vector<double> normalize(std::span<const double> profile, NormalizeMode mode, double dt)
{
    double norm = 0.0;
    if (mode == NormalizeMode::Peak) {
        for (double v : profile) norm = std::max(norm, std::abs(v));
    } else {
        if (!(dt > 0.0)) throw ArgumentError("normalize: dt must be positive");
        for (std::size_t k = 1; k < profile.size(); ++k) norm += 0.5 * dt * (profile[k - 1] + profile[k]);
        norm = std::abs(norm);
    }
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DataError("normalize: profile is zero");
    std::vector<double> out(profile.begin(), profile.end());
    for (double& v : out) v /= norm;
    return out;
}

std::vector<WavePacket> find_wave_packets(std::span<const double> times, std::span<const double> profile,
                                          double min_prominence)
{
    if (times.size() != profile.size()) throw ArgumentError("find_wave_packets: axis and profile differ in length");
    const std::size_t n = profile.size();
    std::vector<WavePacket> packets;
    if (n == 0) return packets;
    const double top = *std::max_element(profile.begin(), profile.end());
    if (!(top > 0.0)) return packets;
    const double threshold = min_prominence * top;

    std::size_t i = 0;
    while (i < n) {
        // Extent of a plateau starting at i.
        std::size_t j = i;
        while (j + 1 < n && profile[j + 1] == profile[i]) ++j;
        const bool rises_left = i == 0 || profile[i - 1] < profile[i];
        const bool falls_right = j + 1 == n || profile[j + 1] < profile[i];
        if (rises_left && falls_right && !(i == 0 && j + 1 == n)) {
            const double h = profile[i];
            double left_min = h;
            for (std::size_t k = i; k-- > 0;) {
                if (profile[k] > h) break;
                left_min = std::min(left_min, profile[k]);
            }
            double right_min = h;
            for (std::size_t k = j + 1; k < n; ++k) {
                if (profile[k] > h) break;
                right_min = std::min(right_min, profile[k]);
            }
            const double prominence = h - std::max(left_min, right_min);
            if (prominence >= threshold && prominence > 0.0) packets.push_back({i, times[i], h, prominence});
        }
        i = j + 1;
    }
    return packets;
}

double packet_delay(const std::vector<WavePacket>& packets)
{
    if (packets.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return packets[1].time - packets[0].time;
}

ComparisonMetrics compare(std::span<const double> sim_times, std::span<const double> sim_profile,
                          const TemporalHistogram& meas, Alignment alignment)
{
    if (sim_times.size() != sim_profile.size() || sim_times.size() < 2)
        throw ArgumentError("compare: simulated axis and profile must match and hold at least two samples");
    meas.validate();
    if (meas.size() == 0) throw ArgumentError("compare: empty histogram");

    const std::vector<double> centers = meas.bin_centers();
    const auto sim_peak = std::max_element(sim_profile.begin(), sim_profile.end()) - sim_profile.begin();
    const auto meas_peak = std::max_element(meas.counts.begin(), meas.counts.end()) - meas.counts.begin();

    ComparisonMetrics m;
    m.peak_offset = centers[static_cast<std::size_t>(meas_peak)] - sim_times[static_cast<std::size_t>(sim_peak)];
    m.applied_shift = alignment == Alignment::Peak ? m.peak_offset : 0.0;

    auto sim_at = [&](double t) {
        const double ts = t - m.applied_shift;
        const auto it = std::upper_bound(sim_times.begin(), sim_times.end(), ts);
        const std::size_t hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - sim_times.begin(), 1,
                                                         static_cast<std::ptrdiff_t>(sim_times.size()) - 1));
        const double f = (ts - sim_times[hi - 1]) / (sim_times[hi] - sim_times[hi - 1]);
        return sim_profile[hi - 1] + f * (sim_profile[hi] - sim_profile[hi - 1]);
    };

    std::vector<double> s;
    std::vector<double> y;
    std::vector<double> t;
    for (std::size_t i = 0; i < meas.size(); ++i) {
        const double ts = centers[i] - m.applied_shift;
        if (ts < sim_times.front() || ts > sim_times.back()) continue;
        s.push_back(sim_at(centers[i]));
        y.push_back(meas.counts[i]);
        t.push_back(centers[i]);
    }
    m.overlap_bins = s.size();
    if (s.empty()) throw ArgumentError("compare: simulation and histogram do not overlap in time");

    const std::vector<double> sn = normalize(s, NormalizeMode::Peak);
    const std::vector<double> yn = normalize(y, NormalizeMode::Peak);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < sn.size(); ++i) {
        num += (sn[i] - yn[i]) * (sn[i] - yn[i]);
        den += yn[i] * yn[i];
    }
    m.relative_l2 = std::sqrt(num / den);

    const auto ps = find_wave_packets(t, sn);
    const auto pm = find_wave_packets(t, yn);
    for (std::size_t k = 0; k < ps.size(); ++k) m.packet_delays_sim.push_back(ps[k].time - ps[0].time);
    for (std::size_t k = 0; k < pm.size(); ++k) m.packet_delays_meas.push_back(pm[k].time - pm[0].time);
    for (std::size_t k = 1; k < std::min(ps.size(), pm.size()); ++k)
        m.packet_delay_differences.push_back(m.packet_delays_meas[k] - m.packet_delays_sim[k]);
    return m;
}

void write_profile_csv(const std::filesystem::path& path, std::span<const double> times,
                       const std::vector<std::pair<std::string, std::span<const double>>>& columns)
{
    for (const auto& [name, col] : columns)
        if (col.size() != times.size()) throw ArgumentError("write_profile_csv: column '" + name + "' has wrong length");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "t_s";
    for (const auto& c : columns) out << ',' << c.first;
    out << '\n';
    char buf[32];
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", times[k]);
        out << buf;
        for (const auto& c : columns) {
            std::snprintf(buf, sizeof buf, ",%.17g", c.second[k]);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace fasteit
