#include "mdiqkd/table.hpp"

#include <utility>

#include "mdiqkd/common.hpp"

namespace mdiqkd {

char intensity_label(IntensityClass c) {
    switch (c) {
        case IntensityClass::Signal: return 's';
        case IntensityClass::Decoy: return 'd';
        case IntensityClass::Vacuum: return 'v';
    }
    return '?';
}

IntensityClass intensity_from_label(char c) {
    switch (c) {
        case 's': return IntensityClass::Signal;
        case 'd': return IntensityClass::Decoy;
        case 'v': return IntensityClass::Vacuum;
        default:
            throw config_error(std::string("unknown intensity label '") + c +
                               "' (expected s, d or v)");
    }
}

const char* basis_label(Basis b) { return b == Basis::Z ? "z" : "x"; }

Basis basis_from_label(const std::string& label) {
    if (label == "z" || label == "Z") return Basis::Z;
    if (label == "x" || label == "X") return Basis::X;
    throw config_error("unknown basis label '" + label + "' (expected z or x)");
}

double IntensitySet::value(IntensityClass c) const {
    switch (c) {
        case IntensityClass::Signal: return mu_signal;
        case IntensityClass::Decoy: return mu_decoy;
        case IntensityClass::Vacuum: return mu_vacuum;
    }
    return 0.0;
}

void IntensitySet::validate() const {
    if (mu_vacuum != 0.0)
        throw config_error("mu_vacuum must be 0");
    if (!(mu_decoy > 0.0))
        throw config_error("mu_decoy must be > 0");
    if (!(mu_signal > mu_decoy))
        throw config_error("intensity ordering violated: requires mu_signal > mu_decoy > mu_vacuum = 0");
}

std::string cell_name(Basis basis, IntensityClass a, IntensityClass b) {
    std::string s = "(";
    s += basis_label(basis);
    s += ", ";
    s += intensity_label(a);
    s += intensity_label(b);
    s += ")";
    return s;
}

const GainErrorRecord& GainErrorTable::require(Basis basis, IntensityClass a,
                                               IntensityClass b) const {
    const auto& c = cell(basis, a, b);
    if (!c) throw config_error("gain/error table is missing cell " + cell_name(basis, a, b));
    return *c;
}

double GainErrorTable::error_gain(Basis basis, IntensityClass a,
                                  IntensityClass b) const {
    const GainErrorRecord& r = require(basis, a, b);
    if (r.gain == 0.0) return 0.0;
    if (!r.error_rate)
        throw config_error("cell " + cell_name(basis, a, b) +
                           " has positive gain but an undefined error rate");
    return *r.error_rate * r.gain;
}

void GainErrorTable::validate_for_analysis() const {
    intensities.validate();
    static constexpr std::pair<IntensityClass, IntensityClass> kNeeded[] = {
        {IntensityClass::Signal, IntensityClass::Signal},
        {IntensityClass::Decoy, IntensityClass::Decoy},
        {IntensityClass::Signal, IntensityClass::Vacuum},
        {IntensityClass::Vacuum, IntensityClass::Signal},
        {IntensityClass::Decoy, IntensityClass::Vacuum},
        {IntensityClass::Vacuum, IntensityClass::Decoy},
        {IntensityClass::Vacuum, IntensityClass::Vacuum},
    };
    std::string missing;
    for (Basis basis : {Basis::Z, Basis::X}) {
        for (const auto& [a, b] : kNeeded) {
            if (!cell(basis, a, b)) {
                if (!missing.empty()) missing += ", ";
                missing += cell_name(basis, a, b);
            }
        }
    }
    if (!missing.empty())
        throw config_error("gain/error table is missing cells required for the decoy analysis: " + missing);
}

}  // namespace mdiqkd
