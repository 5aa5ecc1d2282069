#pragma once

#include <string>
#include <string_view>

namespace fasteit {

// Physical dimension expected by a config or CLI value.
enum class Dimension {
    Length,            // m
    Time,              // s
    Frequency,         // Hz (cyclic)
    AngularFrequency,  // rad/s; cyclic units are multiplied by 2 pi
    Temperature,       // K; "C" and "degC" are offset by 273.15
    ElectricField,     // V/m
    Rate,              // 1/s
    DipoleMoment,      // C m
};

// Parses "<number> <unit>" (space optional) into SI. Throws ConfigError when the unit is
// missing, unknown or of the wrong dimension.
double parse_quantity(std::string_view text, Dimension dim);

// "%.17g <SI unit>", which parse_quantity reads back to the same double.
std::string format_quantity(double si_value, Dimension dim);

const char* si_unit(Dimension dim);

}  // namespace fasteit
