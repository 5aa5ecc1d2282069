#include "fasteit/units.hpp"

#include "fasteit/atomic_model.hpp"
#include "fasteit/errors.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace fasteit {

namespace {

struct UnitEntry {
    std::string_view name;
    Dimension dim;
    double scale;
};

constexpr std::array kUnits{
    UnitEntry{"m", Dimension::Length, 1.0},
    UnitEntry{"cm", Dimension::Length, 1e-2},
    UnitEntry{"mm", Dimension::Length, 1e-3},
    UnitEntry{"um", Dimension::Length, 1e-6},
    UnitEntry{"nm", Dimension::Length, 1e-9},
    UnitEntry{"s", Dimension::Time, 1.0},
    UnitEntry{"ms", Dimension::Time, 1e-3},
    UnitEntry{"us", Dimension::Time, 1e-6},
    UnitEntry{"ns", Dimension::Time, 1e-9},
    UnitEntry{"ps", Dimension::Time, 1e-12},
    UnitEntry{"fs", Dimension::Time, 1e-15},
    UnitEntry{"min", Dimension::Time, 60.0},
    UnitEntry{"h", Dimension::Time, 3600.0},
    UnitEntry{"Hz", Dimension::Frequency, 1.0},
    UnitEntry{"kHz", Dimension::Frequency, 1e3},
    UnitEntry{"MHz", Dimension::Frequency, 1e6},
    UnitEntry{"GHz", Dimension::Frequency, 1e9},
    UnitEntry{"THz", Dimension::Frequency, 1e12},
    UnitEntry{"rad/s", Dimension::AngularFrequency, 1.0},
    UnitEntry{"K", Dimension::Temperature, 1.0},
    UnitEntry{"C", Dimension::Temperature, 1.0},
    UnitEntry{"degC", Dimension::Temperature, 1.0},
    UnitEntry{"V/m", Dimension::ElectricField, 1.0},
    UnitEntry{"kV/m", Dimension::ElectricField, 1e3},
    UnitEntry{"MV/m", Dimension::ElectricField, 1e6},
    UnitEntry{"1/s", Dimension::Rate, 1.0},
    UnitEntry{"/s", Dimension::Rate, 1.0},
    UnitEntry{"cts/s", Dimension::Rate, 1.0},
    UnitEntry{"C m", Dimension::DipoleMoment, 1.0},
    UnitEntry{"C*m", Dimension::DipoleMoment, 1.0},
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

const char* dimension_name(Dimension dim)
{
    switch (dim) {
    case Dimension::Length: return "length";
    case Dimension::Time: return "time";
    case Dimension::Frequency: return "frequency";
    case Dimension::AngularFrequency: return "angular frequency";
    case Dimension::Temperature: return "temperature";
    case Dimension::ElectricField: return "electric field";
    case Dimension::Rate: return "rate";
    case Dimension::DipoleMoment: return "dipole moment";
    }
    return "?";
}

}  // namespace

const char* si_unit(Dimension dim)
{
    switch (dim) {
    case Dimension::Length: return "m";
    case Dimension::Time: return "s";
    case Dimension::Frequency: return "Hz";
    case Dimension::AngularFrequency: return "rad/s";
    case Dimension::Temperature: return "K";
    case Dimension::ElectricField: return "V/m";
    case Dimension::Rate: return "1/s";
    case Dimension::DipoleMoment: return "C m";
    }
    return "";
}

double parse_quantity(std::string_view text, Dimension dim)
{
    const std::string_view s = trim(text);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || end == s.data())
        throw ConfigError("'" + std::string(text) + "': expected a number followed by a unit");
    const std::string_view unit = trim(std::string_view(end, static_cast<std::size_t>(s.data() + s.size() - end)));
    if (unit.empty())
        throw ConfigError("'" + std::string(text) + "': missing unit (expected " + dimension_name(dim) + ", e.g. " +
                          si_unit(dim) + ")");

    for (const UnitEntry& u : kUnits) {
        if (u.name != unit) continue;
        if (u.dim == dim) {
            if (dim == Dimension::Temperature && u.name != "K") return value + 273.15;
            return value * u.scale;
        }
        if (dim == Dimension::AngularFrequency && u.dim == Dimension::Frequency) return kTwoPi * value * u.scale;
        if (dim == Dimension::Rate && u.dim == Dimension::Frequency) return value * u.scale;
        break;
    }
    throw ConfigError("'" + std::string(text) + "': unit '" + std::string(unit) + "' is not a " + dimension_name(dim) +
                      " unit");
}

std::string format_quantity(double si_value, Dimension dim)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g %s", si_value, si_unit(dim));
    return buf;
}

}  // namespace fasteit
