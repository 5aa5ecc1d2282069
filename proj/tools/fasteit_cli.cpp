#include "fasteit/config.hpp"
#include "fasteit/errors.hpp"
#include "fasteit/experiment_io.hpp"
#include "fasteit/pipeline.hpp"
#include "fasteit/result_io.hpp"
#include "fasteit/units.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fasteit;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

struct Overrides {
    std::string config_path;
    std::string temperature;
    std::string control;
    std::optional<double> atoms;
    std::optional<std::size_t> jobs;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool with_temperature = true)
{
    cmd->add_option("--config", o.config_path,
                    "JSON experiment config; relative names are also looked up in $FASTEIT_CONFIG_DIR");
    if (with_temperature)
        cmd->add_option("--temperature", o.temperature, "cell temperature, e.g. 75C or 348.15K (bare numbers are C)");
    cmd->add_option("--control", o.control, "control laser on|off")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--atoms", o.atoms, "atom number N in the beam volume (overrides the vapor density)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--jobs", o.jobs, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
}

double parse_celsius_or_unit(const std::string& s)
{
    const bool bare = s.find_first_not_of("+-0123456789.eE ") == std::string::npos;
    return parse_quantity(bare ? s + " C" : s, Dimension::Temperature);
}

ExperimentConfig resolve(const Overrides& o)
{
    ExperimentConfig c;
    if (!o.config_path.empty()) c = load_config(resolve_config_path(o.config_path));
    if (!o.temperature.empty()) c.cell.temperature = parse_celsius_or_unit(o.temperature);
    if (!o.control.empty()) c.control.enabled = o.control == "on";
    if (o.atoms) c.cell.atom_number = *o.atoms;
    if (o.jobs) c.ensemble.jobs = *o.jobs;
    c.validate();
    return c;
}

void print_config(const ExperimentConfig& c)
{
    std::cout << "# resolved config\n" << config_to_json(c).dump(2) << '\n';
    if (c.filter.enabled)
        if (auto w = c.filter_spec().consistency_warning()) std::cerr << "warning: " << *w << '\n';
    std::cout.flush();
}

fs::path with_extension(fs::path p, const char* ext)
{
    p.replace_extension(ext);
    return p;
}

void write_result_files(const fs::path& manifest, const RunResult& r)
{
    if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());
    save_result(manifest, r);
    std::vector<std::pair<std::string, std::span<const double>>> cols{{"intensity", r.intensity}};
    if (!r.filtered_intensity.empty()) cols.emplace_back("filtered_intensity", r.filtered_intensity);
    write_profile_csv(with_extension(manifest, ".csv"), r.time_axis, cols);
}

void print_metrics(const RunResult& r)
{
    for (const auto& [k, v] : r.metrics) std::printf("%-20s %.10g\n", k.c_str(), v);
}

std::string defaults_footer()
{
    const nlohmann::json j = config_to_json(ExperimentConfig{});
    std::string s = "Defaults (SI; config files accept any listed unit):\n";
    for (const auto& [section, body] : j.items()) {
        for (const auto& [key, value] : body.items())
            s += "  " + section + "." + key + " = " + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
    }
    return s;
}

int run(int argc, char** argv)
{
    CLI::App app{"Time-domain Maxwell-Bloch simulator for a short single photon in warm Rb D1 vapor"};
    app.require_subcommand(1);
    app.footer(defaults_footer());

    Overrides o;
    std::string out;

    auto* simulate_cmd = app.add_subcommand("simulate", "run one ensemble and save the result");
    add_overrides(simulate_cmd, o);
    simulate_cmd->add_option("--out", out, "result manifest path (a .bin blob and a .csv profile go next to it)")
        ->default_val("result.json");

    std::vector<std::string> temps;
    auto* sweep_cmd = app.add_subcommand("sweep-temperature", "simulate a list of temperatures");
    add_overrides(sweep_cmd, o, false);
    sweep_cmd->add_option("--temperatures", temps, "temperatures, e.g. 55C 60C 65C (bare numbers are C)")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--out", out, "output directory")->default_val("sweep");

    auto* eit_cmd = app.add_subcommand("eit", "control-on versus control-off transmission gain");
    add_overrides(eit_cmd, o);
    eit_cmd->add_option("--out", out, "output directory")->default_val("eit");

    std::string input;
    auto* filter_cmd = app.add_subcommand("filter", "etalon-filter the intensity profile of a saved result");
    filter_cmd->add_option("--in", input, "result manifest")->required();
    filter_cmd->add_option("--out", out, "filtered result manifest")->required();
    std::string reflectivity;
    std::string cascade;
    filter_cmd->add_option("--reflectivity", reflectivity, "mirror reflectivity, overrides the saved config");
    filter_cmd->add_option("--cascade", cascade, "number of identical etalons");

    std::string histogram;
    bool subtract = false;
    std::string decay_lo;
    std::string decay_hi;
    auto* fit_cmd = app.add_subcommand("fit", "Lorentzian fit and logarithmic decay fit of a histogram");
    fit_cmd->add_option("--histogram", histogram, "CSV histogram with a t_<unit>,counts header")->required();
    fit_cmd->add_flag("--subtract-background", subtract, "remove the flat background given in the file metadata");
    fit_cmd->add_option("--decay-start", decay_lo, "start of the decay-fit window, e.g. 200ps (default: peak)");
    fit_cmd->add_option("--decay-end", decay_hi, "end of the decay-fit window (default: start + 1.5 ns)");

    std::string align = "none";
    auto* compare_cmd = app.add_subcommand("compare", "residuals between a saved simulation and a histogram");
    compare_cmd->add_option("--result", input, "result manifest")->required();
    compare_cmd->add_option("--histogram", histogram, "CSV histogram")->required();
    compare_cmd->add_option("--align", align, "none|peak")->check(CLI::IsMember({"none", "peak"}));
    compare_cmd->add_flag("--subtract-background", subtract, "remove the flat background first");
    bool use_filtered = false;
    compare_cmd->add_flag("--filtered", use_filtered, "compare the filtered profile");

    auto* show_cmd = app.add_subcommand("show-config", "print the resolved config as JSON");
    add_overrides(show_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    if (*show_cmd) {
        print_config(resolve(o));
        return kOk;
    }

    if (*simulate_cmd) {
        const ExperimentConfig c = resolve(o);
        print_config(c);
        const RunResult r = simulate(c);
        write_result_files(out, r);
        print_metrics(r);
        std::cout << "wrote " << out << '\n';
        return kOk;
    }

    if (*sweep_cmd) {
        ExperimentConfig c = resolve(o);
        std::vector<double> kelvin;
        for (const std::string& t : temps) kelvin.push_back(parse_celsius_or_unit(t));
        if (const std::size_t dropped = deduplicate_temperatures(kelvin))
            std::cerr << "warning: ignored " << dropped << " duplicate temperature(s)\n";
        for (double t : kelvin) {
            c.cell.temperature = t;
            c.validate();
        }
        print_config(c);
        fs::create_directories(out);
        const fs::path summary = fs::path(out) / "summary.csv";
        std::ofstream sum(summary, std::ios::binary | std::ios::trunc);
        if (!sum) throw IoError("cannot write '" + summary.string() + "'");
        sum << "temperature_C,atom_number,energy,energy_filtered,packets,first_packet_s,second_packet_s,packet_delay_s\n";
        for (double t : kelvin) {
            const auto rows = sweep_temperature(c, {t});
            const RunResult& r = rows.front().result;
            char name[64];
            std::snprintf(name, sizeof name, "T_%.2fC.json", t - 273.15);
            write_result_files(fs::path(out) / name, r);
            char line[512];
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t - 273.15,
                          r.metrics.at("atom_number"), r.metrics.at("energy"), r.metrics.at("energy_filtered"),
                          r.metrics.at("packets"), r.metrics.at("first_packet_time"), r.metrics.at("second_packet_time"),
                          r.metrics.at("packet_delay"));
            sum << line;
            sum.flush();
            std::printf("%.2f C: packets %g, delay %.6g ps, energy %.6g\n", t - 273.15, r.metrics.at("packets"),
                        r.metrics.at("packet_delay") * 1e12, r.metrics.at("energy"));
            std::fflush(stdout);
        }
        if (!sum) throw IoError("error writing '" + summary.string() + "'");
        std::cout << "wrote " << summary.string() << '\n';
        return kOk;
    }

    if (*eit_cmd) {
        const ExperimentConfig c = resolve(o);
        print_config(c);
        const EitReport rep = run_eit(c);
        fs::create_directories(out);
        write_result_files(fs::path(out) / "control_on.json", rep.on);
        write_result_files(fs::path(out) / "control_off.json", rep.off);
        nlohmann::json j = {
            {"transmission_gain_percent", rep.gain_filtered},
            {"transmission_gain_raw_percent", rep.gain_raw},
            {"filtered", c.filter.enabled},
            {"filter_stage", to_string(c.filter.stage)},
            {"reduction", to_string(c.ensemble.reduction)},
            {"energy_on", rep.on.metrics.at(c.filter.enabled ? "energy_filtered" : "energy")},
            {"energy_off", rep.off.metrics.at(c.filter.enabled ? "energy_filtered" : "energy")},
        };
        std::ofstream rf(fs::path(out) / "report.json", std::ios::trunc);
        rf << j.dump(2) << '\n';
        if (!rf) throw IoError("cannot write report in '" + out + "'");
        std::printf("transmission gain: %.4f %%\n", rep.gain_filtered);
        std::printf("unfiltered gain:   %.4f %%\n", rep.gain_raw);
        return kOk;
    }

    if (*filter_cmd) {
        RunResult r = load_result(input);
        if (!reflectivity.empty()) r.config.filter.reflectivity = std::stod(reflectivity);
        if (!cascade.empty()) r.config.filter.cascade = std::stoi(cascade);
        r.config.filter.enabled = true;
        r.config.filter.stage = FilterStage::Ensemble;
        r.config.validate();
        print_config(r.config);
        const FilterSpec spec = r.config.filter_spec();
        r.filtered_intensity = intensity_of(apply_filter(amplitude_from_intensity(r.intensity), r.time_axis, spec,
                                                         r.config.filter.carrier_offset));
        r.metrics["energy_filtered"] = pulse_energy(r.filtered_intensity, r.config.propagation.dt,
                                                    {r.config.analysis.window_start, r.config.analysis.window_end});
        r.provenance = current_provenance();
        write_result_files(out, r);
        print_metrics(r);
        return kOk;
    }

    if (*fit_cmd) {
        TemporalHistogram h = load_histogram(histogram);
        if (subtract) h = subtract_background(h);
        const LorentzianFit f = fit_lorentzian(h);
        std::printf("q1 %.10g s\nq2 %.10g s\nq3 %.10g s\nq4 %.10g\nresidual %.6g\niterations %d\n", f.params.q1,
                    f.params.q2, f.params.q3, f.params.q4, f.residual, f.iterations);
        std::size_t peak = 0;
        for (std::size_t i = 1; i < h.size(); ++i)
            if (h.counts[i] > h.counts[peak]) peak = i;
        const double lo = decay_lo.empty() ? h.bin_center(peak) : parse_quantity(decay_lo, Dimension::Time);
        double hi = decay_hi.empty() ? lo + kFitSegment : parse_quantity(decay_hi, Dimension::Time);
        hi = std::min(hi, h.bin_center(h.size() - 1));
        std::printf("tau %.10g s\n", extract_decay_time(h, {lo, hi}));
        return kOk;
    }

    if (*compare_cmd) {
        const RunResult r = load_result(input);
        TemporalHistogram h = load_histogram(histogram);
        if (subtract) h = subtract_background(h);
        const std::vector<double>& profile = use_filtered ? r.filtered_intensity : r.intensity;
        if (profile.empty()) throw ArgumentError("result has no filtered profile");
        const ComparisonMetrics m = compare(r.time_axis, profile, h, align == "peak" ? Alignment::Peak : Alignment::None);
        nlohmann::json j = {
            {"relative_l2", m.relative_l2},
            {"peak_offset_s", m.peak_offset},
            {"applied_shift_s", m.applied_shift},
            {"overlap_bins", m.overlap_bins},
            {"packet_delays_sim_s", m.packet_delays_sim},
            {"packet_delays_meas_s", m.packet_delays_meas},
            {"packet_delay_differences_s", m.packet_delay_differences},
        };
        std::cout << j.dump(2) << '\n';
        return kOk;
    }
    return kValidation;
}

}  // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const NumericalBlowup& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << '\n';
        return kNumerical;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid number: " << e.what() << '\n';
        return kValidation;
    }
}
