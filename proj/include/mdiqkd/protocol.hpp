#pragma once

#include <array>
#include <cstdint>

#include "mdiqkd/config.hpp"
#include "mdiqkd/optics.hpp"
#include "mdiqkd/table.hpp"

namespace mdiqkd {

enum class OutcomeClass { PsiMinus, Discard };

OutcomeClass classify_outcome(const BSMOutcome& outcome);

enum class SiftOutcome { KeyBitMatch, KeyBitError, Discard };

// Sifting with Bob's bit flip: discard unless the measurement projected onto
// psi-minus and the bases match; then Bob's flipped bit against Alice's bit
// decides match vs error.
SiftOutcome sift_and_flip(int alice_bit, int bob_bit, Basis alice_basis,
                          Basis bob_basis,
                          BSMOutcome::Classification classification);

struct CellCounts {
    std::uint64_t gates_sent = 0;
    std::uint64_t psi_minus = 0;
    std::uint64_t errors = 0;
};

struct SiftedCounts {
    std::array<std::array<CellCounts, 9>, 2> cells{};

    CellCounts& cell(Basis basis, IntensityClass a, IntensityClass b) {
        return cells[GainErrorTable::basis_index(basis)][GainErrorTable::pair_index(a, b)];
    }
    const CellCounts& cell(Basis basis, IntensityClass a, IntensityClass b) const {
        return cells[GainErrorTable::basis_index(basis)][GainErrorTable::pair_index(a, b)];
    }
};

// Point estimates with Poisson counting uncertainties:
//   Q = k/N, sigma_Q = sqrt(k)/N, e = m/k, sigma_e = e sqrt(1/m + 1/k).
// The error rate is left undefined when k = 0.
GainErrorRecord estimate_gain_error(const CellCounts& counts);

struct CampaignResult {
    GainErrorTable table;
    SiftedCounts counts;
    double duty_fraction = 1.0;
    double dead_time_utilization = 1.0;  // estimated fraction of gates with both detectors live
    double wall_clock_seconds = 0.0;     // estimated, including duty and dead time
    double mean_overlap = 1.0;           // gate-averaged mode overlap
};

// Runs the full measurement campaign: 2 bases x 9 intensity pairs, each cell
// for gates_per_cell gates with uniformly random state pairs, the overlap
// derived from the drifting channel (advanced every drift_update_interval_s
// of collection time) and psi-minus events drawn from the analytic per-gate
// probability. Cells use independent derived seeds; identical inputs give a
// bit-identical table. Duty cycle and detector dead time enter only the
// wall-clock estimate, never the per-gate gains.
CampaignResult run_campaign(const SetupConfig& setup,
                            std::uint64_t gates_per_cell, std::uint64_t seed);

}  // namespace mdiqkd
