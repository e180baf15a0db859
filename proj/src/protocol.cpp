#include "mdiqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mdiqkd/channel.hpp"
#include "mdiqkd/common.hpp"

namespace mdiqkd {

OutcomeClass classify_outcome(const BSMOutcome& outcome) {
    return outcome.classification == BSMOutcome::Classification::PsiMinus
               ? OutcomeClass::PsiMinus
               : OutcomeClass::Discard;
}

SiftOutcome sift_and_flip(int alice_bit, int bob_bit, Basis alice_basis,
                          Basis bob_basis,
                          BSMOutcome::Classification classification) {
    if ((alice_bit != 0 && alice_bit != 1) || (bob_bit != 0 && bob_bit != 1))
        throw std::invalid_argument("bits must be 0 or 1");
    if (classification != BSMOutcome::Classification::PsiMinus) return SiftOutcome::Discard;
    if (alice_basis != bob_basis) return SiftOutcome::Discard;
    const int flipped = 1 - bob_bit;
    return flipped == alice_bit ? SiftOutcome::KeyBitMatch : SiftOutcome::KeyBitError;
}

GainErrorRecord estimate_gain_error(const CellCounts& counts) {
    if (counts.gates_sent < 1)
        throw std::invalid_argument("estimate_gain_error requires gates_sent >= 1");
    if (counts.psi_minus > counts.gates_sent || counts.errors > counts.psi_minus)
        throw std::invalid_argument("inconsistent counts: errors <= psi_minus <= gates_sent required");

    const double n = static_cast<double>(counts.gates_sent);
    const double k = static_cast<double>(counts.psi_minus);
    const double m = static_cast<double>(counts.errors);
    GainErrorRecord r;
    r.gain = k / n;
    r.sigma_gain = std::sqrt(k) / n;
    if (counts.psi_minus > 0) {
        const double e = m / k;
        r.error_rate = e;
        r.sigma_error = m > 0 ? e * std::sqrt(1.0 / m + 1.0 / k) : 0.0;
    }
    return r;
}

namespace {

// Splits n gates uniformly over the four state pairs of a basis.
std::array<std::uint64_t, 4> draw_pair_counts(std::uint64_t n, std::mt19937_64& rng) {
    std::array<std::uint64_t, 4> counts{};
    std::uint64_t remaining = n;
    for (int i = 0; i < 3; ++i) {
        const double p = 1.0 / (4.0 - i);
        std::binomial_distribution<std::uint64_t> bin(remaining, p);
        counts[i] = bin(rng);
        remaining -= counts[i];
    }
    counts[3] = remaining;
    return counts;
}

// Phase-averaged probability that a given detector clicks in any slot;
// feeds the dead-time throughput estimate only.
double detector_click_probability(const TimeBinPulsePair& alice,
                                  const TimeBinPulsePair& bob, double overlap,
                                  const DetectorModel& det,
                                  std::pair<double, double> trans, int nodes,
                                  int detector) {
    const Quadrature q = gauss_legendre(nodes);
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double phi = M_PI * (q.nodes[i] + 1.0);
        const BeamsplitterOutput out = beamsplitter_transform(
            TimeBinPulsePair{alice.basis, alice.bit, alice.mean_photon_number, alice.global_phase,
                             alice.early * std::sqrt(trans.first), alice.late * std::sqrt(trans.first)},
            TimeBinPulsePair{bob.basis, bob.bit, bob.mean_photon_number, bob.global_phase,
                             bob.early * std::sqrt(trans.second), bob.late * std::sqrt(trans.second)},
            overlap, phi);
        const ClickProbabilities p = click_probabilities(out, det);
        acc += q.weights[i] * (1.0 - (1.0 - p[detector][0]) * (1.0 - p[detector][1]));
    }
    return 0.5 * acc;
}

}  // namespace

CampaignResult run_campaign(const SetupConfig& setup,
                            std::uint64_t gates_per_cell, std::uint64_t seed) {
    if (gates_per_cell < 1)
        throw std::invalid_argument("gates_per_cell must be >= 1");
    setup.validate();

    const std::pair<double, double> trans{transmittance(setup.link_alice),
                                          transmittance(setup.link_bob)};
    const double duty = duty_fraction(setup.stabilizer);
    const double block_seconds = setup.drift_update_interval_s;
    const auto block_gates = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(block_seconds * setup.detector.gate_rate_hz)));

    CampaignResult result;
    result.table.intensities = setup.intensities;
    result.duty_fraction = duty;

    double overlap_weighted = 0.0;
    double click_prob_sum = 0.0;  // per-detector, averaged over cells
    int click_prob_cells = 0;

    static constexpr IntensityClass kClasses[] = {IntensityClass::Signal,
                                                  IntensityClass::Decoy,
                                                  IntensityClass::Vacuum};
    int cell_index = 0;
    for (Basis basis : {Basis::Z, Basis::X}) {
        for (IntensityClass ia : kClasses) {
            for (IntensityClass ib : kClasses) {
                const double mu_a = setup.intensities.value(ia);
                const double mu_b = setup.intensities.value(ib);
                const std::uint64_t cell_seed = mix_seed(setup.seed ^ seed, cell_index);
                std::mt19937_64 rng(cell_seed);
                DriftState drift = make_initial_drift_state(setup.drift, mix_seed(cell_seed, 101));

                CellCounts& counts = result.counts.cell(basis, ia, ib);
                std::uint64_t remaining = gates_per_cell;
                bool first_block = true;
                while (remaining > 0) {
                    const std::uint64_t n = std::min(remaining, block_gates);
                    drift = step_drift(drift, block_seconds, setup.drift, mix_seed(cell_seed, 202));
                    drift = apply_stabilizers(drift, setup.stabilizer, block_seconds).state;
                    const double zeta =
                        mode_overlap(drift_to_distinguishability(drift, setup.drift));
                    overlap_weighted += zeta * static_cast<double>(n);

                    const auto pair_counts = draw_pair_counts(n, rng);
                    int pair = 0;
                    for (int bit_a = 0; bit_a < 2; ++bit_a) {
                        for (int bit_b = 0; bit_b < 2; ++bit_b, ++pair) {
                            if (pair_counts[pair] == 0) continue;
                            const TimeBinPulsePair a =
                                encode_qubit(basis, bit_a, mu_a, 0.0, setup.source_extinction);
                            const TimeBinPulsePair b =
                                encode_qubit(basis, bit_b, mu_b, 0.0, setup.source_extinction);
                            const double p = psi_minus_probability(
                                a, b, zeta, setup.detector, trans, setup.phase_nodes);
                            std::binomial_distribution<std::uint64_t> bin(pair_counts[pair], p);
                            const std::uint64_t hits = bin(rng);
                            counts.psi_minus += hits;
                            if (sift_and_flip(bit_a, bit_b, basis, basis,
                                              BSMOutcome::Classification::PsiMinus) ==
                                SiftOutcome::KeyBitError)
                                counts.errors += hits;
                            if (first_block) {
                                click_prob_sum += 0.5 *
                                    (detector_click_probability(a, b, zeta, setup.detector,
                                                                trans, setup.phase_nodes, 0) +
                                     detector_click_probability(a, b, zeta, setup.detector,
                                                                trans, setup.phase_nodes, 1)) / 4.0;
                            }
                        }
                    }
                    first_block = false;
                    counts.gates_sent += n;
                    remaining -= n;
                }
                ++click_prob_cells;
                result.table.set_cell(basis, ia, ib, estimate_gain_error(counts));
                ++cell_index;
            }
        }
    }

    result.mean_overlap = overlap_weighted / (18.0 * static_cast<double>(gates_per_cell));
    // Dead-time throughput estimate: each click blinds its detector for
    // dead_time * gate_rate gates; a gate needs both detectors live.
    const double mean_click = click_prob_sum / click_prob_cells;
    const double dead_gates = setup.detector.dead_time_us * 1e-6 * setup.detector.gate_rate_hz;
    const double live = 1.0 / (1.0 + mean_click * dead_gates);
    result.dead_time_utilization = live * live;
    result.wall_clock_seconds = 18.0 * static_cast<double>(gates_per_cell) /
                                (setup.detector.gate_rate_hz * duty * result.dead_time_utilization);
    return result;
}

}  // namespace mdiqkd
