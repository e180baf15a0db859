#pragma once

#include <array>
#include <optional>
#include <string>

#include "mdiqkd/optics.hpp"

namespace mdiqkd {

enum class IntensityClass { Signal, Decoy, Vacuum };

char intensity_label(IntensityClass c);                 // 's', 'd', 'v'
IntensityClass intensity_from_label(char c);
const char* basis_label(Basis b);                       // "z", "x"
Basis basis_from_label(const std::string& label);

// The three mean photon numbers of the decoy-state protocol. Vacuum is zero
// by definition; mu_signal > mu_decoy > 0 is required.
struct IntensitySet {
    double mu_signal = 0.0;
    double mu_decoy = 0.05;
    double mu_vacuum = 0.0;

    double value(IntensityClass c) const;
    void validate() const;
};

// One measured/simulated cell: gain per gate with Poisson uncertainty, and
// the error rate (absent when no psi-minus events were recorded).
struct GainErrorRecord {
    double gain = 0.0;
    double sigma_gain = 0.0;
    std::optional<double> error_rate;
    double sigma_error = 0.0;
};

// The (basis x intensity-pair) matrix of gains and error rates for one
// setup. Cells may be absent; the decoy analysis requires the seven cells
// entering the bound formulas per basis (ss, dd, sv, vs, dv, vd, vv).
struct GainErrorTable {
    IntensitySet intensities;
    std::array<std::array<std::optional<GainErrorRecord>, 9>, 2> cells{};

    static int basis_index(Basis b) { return b == Basis::Z ? 0 : 1; }
    static int pair_index(IntensityClass a, IntensityClass b) {
        return static_cast<int>(a) * 3 + static_cast<int>(b);
    }

    const std::optional<GainErrorRecord>& cell(Basis basis, IntensityClass a,
                                               IntensityClass b) const {
        return cells[basis_index(basis)][pair_index(a, b)];
    }
    void set_cell(Basis basis, IntensityClass a, IntensityClass b,
                  GainErrorRecord record) {
        cells[basis_index(basis)][pair_index(a, b)] = record;
    }

    // Returns the cell or throws naming the missing (basis, pair).
    const GainErrorRecord& require(Basis basis, IntensityClass a,
                                   IntensityClass b) const;

    // e*Q for a cell; zero-gain cells contribute 0 without needing a defined
    // error rate. Throws if the gain is positive but the error rate absent.
    double error_gain(Basis basis, IntensityClass a, IntensityClass b) const;

    // Checks intensity ordering and the presence of every cell the decoy
    // bounds need, listing all absent (basis, pair) cells in one message.
    void validate_for_analysis() const;
};

std::string cell_name(Basis basis, IntensityClass a, IntensityClass b);

}  // namespace mdiqkd
