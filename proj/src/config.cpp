#include "fasteit/config.hpp"

#include "fasteit/errors.hpp"
#include "fasteit/units.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace fasteit {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were used so leftovers can be rejected.
class Section {
public:
    Section(const json& root, std::string path) : path_(std::move(path))
    {
        if (!root.is_object()) throw ConfigError(where() + "expected an object");
        node_ = &root;
    }

    const json* find(const std::string& key)
    {
        used_.insert(key);
        const auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    void quantity(const std::string& key, Dimension dim, double& out)
    {
        if (const json* v = find(key)) out = parse(key, *v, dim);
    }

    void quantity(const std::string& key, Dimension dim, std::optional<double>& out)
    {
        if (const json* v = find(key)) out = v->is_null() ? std::nullopt : std::optional(parse(key, *v, dim));
    }

    void number(const std::string& key, double& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + "expected a number");
            out = v->get<double>();
        }
    }

    void number(const std::string& key, std::optional<double>& out)
    {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            if (!v->is_number()) throw ConfigError(where(key) + "expected a number");
            out = v->get<double>();
        }
    }

    template <typename Int>
    void count(const std::string& key, Int& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(where(key) + "expected an integer");
            const auto raw = v->get<long long>();
            if (raw < 0) throw ConfigError(where(key) + "must not be negative");
            out = static_cast<Int>(raw);
        }
    }

    void flag(const std::string& key, bool& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(where(key) + "expected true or false");
            out = v->get<bool>();
        }
    }

    template <typename E>
    void choice(const std::string& key, E& out, std::initializer_list<E> options)
    {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_string()) throw ConfigError(where(key) + "expected a string");
        const std::string s = v->get<std::string>();
        std::string allowed;
        for (E e : options) {
            if (to_string(e) == s) {
                out = e;
                return;
            }
            allowed += (allowed.empty() ? "" : ", ") + to_string(e);
        }
        throw ConfigError(where(key) + "unknown value '" + s + "' (one of: " + allowed + ")");
    }

    void finish() const
    {
        for (const auto& [k, _] : node_->items())
            if (!used_.count(k)) throw ConfigError(where(k) + "unknown key");
    }

private:
    std::string where(const std::string& key = {}) const
    {
        return "config " + path_ + (key.empty() ? "" : "." + key) + ": ";
    }

    double parse(const std::string& key, const json& v, Dimension dim) const
    {
        if (v.is_number())
            throw ConfigError(where(key) + "physical value needs a unit, e.g. \"" + v.dump() + " " + si_unit(dim) + "\"");
        if (!v.is_string()) throw ConfigError(where(key) + "expected a string with a unit");
        try {
            return parse_quantity(v.get<std::string>(), dim);
        } catch (const ConfigError& e) {
            throw ConfigError(where(key) + e.what());
        }
    }

    const json* node_ = nullptr;
    std::string path_;
    std::set<std::string> used_;
};

json q(double v, Dimension dim) { return format_quantity(v, dim); }

}  // namespace

std::string to_string(Stencil s) { return s == Stencil::Implicit ? "implicit" : "characteristic"; }
std::string to_string(Integrator i) { return i == Integrator::ExponentialSplit ? "exponential-split" : "forward-euler"; }
std::string to_string(SourceScaling s) { return s == SourceScaling::PerSlice ? "per-slice" : "total-atoms"; }
std::string to_string(InitialState s) { return s == InitialState::GroundMixture ? "ground-mixture" : "ground-f1"; }
std::string to_string(ReductionMode r)
{
    return r == ReductionMode::AmplitudeAverage ? "amplitude-average" : "intensity-average";
}
std::string to_string(FilterStage s) { return s == FilterStage::PerInstance ? "per-instance" : "ensemble"; }

void ExperimentConfig::validate() const
{
    probe().validate();
    if (!(cell.length > 0.0) || !(cell.beam_waist > 0.0)) throw ConfigError("cell length and beam waist must be positive");
    if (cell.atom_number && !(*cell.atom_number >= 0.0)) throw ConfigError("cell.atom_number must be non-negative");
    if (!cell.atom_number) (void)vapor_density(cell.temperature);
    if (!(atoms.dipole > 0.0)) throw ConfigError("atoms.dipole must be positive");
    if (!(atoms.decay_rate >= 0.0)) throw ConfigError("atoms.decay_rate must be non-negative");
    if (!(propagation.dt > 0.0)) throw ConfigError("propagation.dt must be positive");
    if (propagation.time_samples < 2) throw ConfigError("propagation.time_samples must be at least 2");
    if (ensemble.detuning_points < 1) throw ConfigError("ensemble.detuning_points must be at least 1");
    if (ensemble.detuning_points > 1 && !(ensemble.detuning_max > ensemble.detuning_min))
        throw ConfigError("ensemble.detuning_max must exceed detuning_min");
    if (ensemble.jobs < 1) throw ConfigError("ensemble.jobs must be at least 1");
    if (control.enabled && !control.rabi && !(control.field >= 0.0))
        throw ConfigError("control.field must be non-negative");
    if (filter.enabled) filter_spec().validate();
    if (!(analysis.window_end > analysis.window_start)) throw ConfigError("analysis window is empty or inverted");
    if (!(analysis.packet_prominence > 0.0 && analysis.packet_prominence < 1.0))
        throw ConfigError("analysis.packet_prominence must lie in (0, 1)");
    ensemble_config().validate();
}

RbD1Constants ExperimentConfig::constants() const
{
    RbD1Constants rb = RbD1Constants::with_dipole(atoms.dipole);
    rb.set_decay(atoms.decay_rate);
    return rb;
}

ProbePulse ExperimentConfig::probe() const
{
    return ProbePulse::from_lifetime(pulse.tau, pulse.center_detuning, pulse.sigma);
}

VaporCell ExperimentConfig::vapor_cell() const
{
    if (cell.atom_number) {
        VaporCell c;
        c.length = cell.length;
        c.temperature = cell.temperature;
        c.beam_waist = cell.beam_waist;
        c.cross_section = std::numbers::pi * (cell.beam_waist / 2.0) * (cell.beam_waist / 2.0);
        return c.with_atom_number(*cell.atom_number);
    }
    return VaporCell::make(cell.temperature, cell.length, cell.beam_waist);
}

FilterSpec ExperimentConfig::filter_spec() const
{
    FilterSpec s;
    s.reflectivity = filter.reflectivity;
    s.fsr = filter.fsr;
    s.linewidth = filter.linewidth;
    s.cascade = filter.cascade;
    s.min_padded_duration = filter.min_padded_duration;
    return s;
}

GridSpec ExperimentConfig::grid() const
{
    GridSpec g;
    g.dt = propagation.dt;
    g.time_samples = propagation.time_samples;
    return g;
}

std::vector<double> ExperimentConfig::detuning_grid() const
{
    if (ensemble.detuning_points == 1) return {ensemble.detuning_min};
    return default_detuning_grid(ensemble.detuning_points, ensemble.detuning_min / kTwoPi,
                                 ensemble.detuning_max / kTwoPi);
}

EnsembleConfig ExperimentConfig::ensemble_config() const
{
    EnsembleConfig e;
    e.temperature = cell.temperature;
    e.detuning_grid = detuning_grid();
    e.doppler_points = ensemble.doppler_points;
    e.control.enabled = control.enabled;
    e.control.field = control.field;
    e.control.rabi = control.rabi;
    e.control.detuning = control.detuning;
    e.reduction = ensemble.reduction;
    e.propagation.grid = grid();
    e.propagation.stencil = propagation.stencil;
    e.propagation.integrator = propagation.integrator;
    e.propagation.source_scaling = propagation.source_scaling;
    e.propagation.initial_state = propagation.initial_state;
    if (filter.enabled && filter.stage == FilterStage::PerInstance) e.per_instance_filter = filter_spec();
    e.carrier_offset = filter.carrier_offset;
    e.jobs = ensemble.jobs;
    return e;
}

ExperimentConfig config_from_json(const json& j)
{
    ExperimentConfig c;
    Section root(j, "");
    auto sub = [&](const std::string& key, auto&& body) {
        if (const json* v = root.find(key)) {
            Section s(*v, key);
            body(s);
            s.finish();
        }
    };

    sub("pulse", [&](Section& s) {
        s.quantity("tau", Dimension::Time, c.pulse.tau);
        s.quantity("center_detuning", Dimension::AngularFrequency, c.pulse.center_detuning);
        s.quantity("sigma", Dimension::AngularFrequency, c.pulse.sigma);
    });
    sub("cell", [&](Section& s) {
        s.quantity("length", Dimension::Length, c.cell.length);
        s.quantity("temperature", Dimension::Temperature, c.cell.temperature);
        s.quantity("beam_waist", Dimension::Length, c.cell.beam_waist);
        s.number("atom_number", c.cell.atom_number);
    });
    sub("atoms", [&](Section& s) {
        s.quantity("dipole", Dimension::DipoleMoment, c.atoms.dipole);
        s.quantity("decay_rate", Dimension::AngularFrequency, c.atoms.decay_rate);
    });
    sub("propagation", [&](Section& s) {
        s.quantity("dt", Dimension::Time, c.propagation.dt);
        s.count("time_samples", c.propagation.time_samples);
        s.choice("stencil", c.propagation.stencil, {Stencil::Characteristic, Stencil::Implicit});
        s.choice("integrator", c.propagation.integrator, {Integrator::ForwardEuler, Integrator::ExponentialSplit});
        s.choice("source_scaling", c.propagation.source_scaling, {SourceScaling::TotalAtoms, SourceScaling::PerSlice});
        s.choice("initial_state", c.propagation.initial_state, {InitialState::GroundF1, InitialState::GroundMixture});
    });
    sub("ensemble", [&](Section& s) {
        s.quantity("detuning_min", Dimension::AngularFrequency, c.ensemble.detuning_min);
        s.quantity("detuning_max", Dimension::AngularFrequency, c.ensemble.detuning_max);
        s.count("detuning_points", c.ensemble.detuning_points);
        s.count("doppler_points", c.ensemble.doppler_points);
        s.choice("reduction", c.ensemble.reduction, {ReductionMode::IntensityAverage, ReductionMode::AmplitudeAverage});
        s.count("jobs", c.ensemble.jobs);
    });
    sub("control", [&](Section& s) {
        s.flag("enabled", c.control.enabled);
        s.quantity("field", Dimension::ElectricField, c.control.field);
        s.quantity("rabi", Dimension::AngularFrequency, c.control.rabi);
        s.quantity("detuning", Dimension::AngularFrequency, c.control.detuning);
    });
    sub("filter", [&](Section& s) {
        s.flag("enabled", c.filter.enabled);
        s.number("reflectivity", c.filter.reflectivity);
        s.quantity("fsr", Dimension::Frequency, c.filter.fsr);
        s.quantity("linewidth", Dimension::Frequency, c.filter.linewidth);
        s.count("cascade", c.filter.cascade);
        s.quantity("carrier_offset", Dimension::Frequency, c.filter.carrier_offset);
        s.quantity("min_padded_duration", Dimension::Time, c.filter.min_padded_duration);
        s.choice("stage", c.filter.stage, {FilterStage::PerInstance, FilterStage::Ensemble});
    });
    sub("analysis", [&](Section& s) {
        s.quantity("window_start", Dimension::Time, c.analysis.window_start);
        s.quantity("window_end", Dimension::Time, c.analysis.window_end);
        s.number("packet_prominence", c.analysis.packet_prominence);
    });
    root.finish();
    return c;
}

json config_to_json(const ExperimentConfig& c)
{
    json j;
    j["pulse"] = {
        {"tau", q(c.pulse.tau, Dimension::Time)},
        {"center_detuning", q(c.pulse.center_detuning, Dimension::AngularFrequency)},
        {"sigma", q(c.pulse.sigma, Dimension::AngularFrequency)},
    };
    j["cell"] = {
        {"length", q(c.cell.length, Dimension::Length)},
        {"temperature", q(c.cell.temperature, Dimension::Temperature)},
        {"beam_waist", q(c.cell.beam_waist, Dimension::Length)},
        {"atom_number", c.cell.atom_number ? json(*c.cell.atom_number) : json(nullptr)},
    };
    j["atoms"] = {
        {"dipole", q(c.atoms.dipole, Dimension::DipoleMoment)},
        {"decay_rate", q(c.atoms.decay_rate, Dimension::AngularFrequency)},
    };
    j["propagation"] = {
        {"dt", q(c.propagation.dt, Dimension::Time)},
        {"time_samples", c.propagation.time_samples},
        {"stencil", to_string(c.propagation.stencil)},
        {"integrator", to_string(c.propagation.integrator)},
        {"source_scaling", to_string(c.propagation.source_scaling)},
        {"initial_state", to_string(c.propagation.initial_state)},
    };
    j["ensemble"] = {
        {"detuning_min", q(c.ensemble.detuning_min, Dimension::AngularFrequency)},
        {"detuning_max", q(c.ensemble.detuning_max, Dimension::AngularFrequency)},
        {"detuning_points", c.ensemble.detuning_points},
        {"doppler_points", c.ensemble.doppler_points},
        {"reduction", to_string(c.ensemble.reduction)},
        {"jobs", c.ensemble.jobs},
    };
    j["control"] = {
        {"enabled", c.control.enabled},
        {"field", q(c.control.field, Dimension::ElectricField)},
        {"rabi", c.control.rabi ? q(*c.control.rabi, Dimension::AngularFrequency) : json(nullptr)},
        {"detuning", q(c.control.detuning, Dimension::AngularFrequency)},
    };
    j["filter"] = {
        {"enabled", c.filter.enabled},
        {"reflectivity", c.filter.reflectivity},
        {"fsr", q(c.filter.fsr, Dimension::Frequency)},
        {"linewidth", q(c.filter.linewidth, Dimension::Frequency)},
        {"cascade", c.filter.cascade},
        {"carrier_offset", q(c.filter.carrier_offset, Dimension::Frequency)},
        {"min_padded_duration", q(c.filter.min_padded_duration, Dimension::Time)},
        {"stage", to_string(c.filter.stage)},
    };
    j["analysis"] = {
        {"window_start", q(c.analysis.window_start, Dimension::Time)},
        {"window_end", q(c.analysis.window_end, Dimension::Time)},
        {"packet_prominence", c.analysis.packet_prominence},
    };
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write config file '" + path.string() + "'");
    out << config_to_json(config).dump(2) << '\n';
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

std::filesystem::path resolve_config_path(const std::filesystem::path& path)
{
    if (path.is_absolute() || std::filesystem::exists(path)) return path;
    if (const char* dir = std::getenv("FASTEIT_CONFIG_DIR")) {
        const std::filesystem::path candidate = std::filesystem::path(dir) / path;
        if (std::filesystem::exists(candidate)) return candidate;
    }
    return path;
}

}  // namespace fasteit
