#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>

namespace mdiqkd {

enum class Basis { Z, X };

// A weak-coherent time-bin qubit, described by the complex field amplitudes
// of its early and late temporal modes. |early|^2 + |late|^2 equals the mean
// photon number. Classical bit convention: |0>,|-> encode 0 and |1>,|+>
// encode 1.
struct TimeBinPulsePair {
    Basis basis = Basis::Z;
    int bit = 0;
    double mean_photon_number = 0.0;
    double global_phase = 0.0;  // radians, wrapped into [0, 2pi)
    std::complex<double> early{0.0, 0.0};
    std::complex<double> late{0.0, 0.0};
};

// `extinction` models imperfect intensity modulation: the fraction of pulse
// energy leaking into the nominally dark bin of a Z state. Default 0 (ideal).
TimeBinPulsePair encode_qubit(Basis basis, int bit, double mean_photon_number,
                              double global_phase, double extinction = 0.0);

// Degrees of freedom that make the two incoming photons distinguishable at
// the beamsplitter.
struct DistinguishabilityParams {
    double time_offset_ps = 0.0;        // differential arrival time
    double pulse_fwhm_ps = 500.0;       // temporal intensity FWHM
    double polarization_overlap = 1.0;  // field-amplitude overlap, [0,1]
    double frequency_detuning_mhz = 0.0;
};

// Field-mode overlap zeta in [0,1]:
//   zeta = p * exp(-dt^2 / (8 sigma_t^2)) * exp(-2 pi^2 dnu^2 sigma_t^2)
// with sigma_t = FWHM / (2 sqrt(2 ln 2)). Exact for Gaussian single-mode
// envelopes. zeta = 1 iff dt = 0, dnu = 0 and p = 1.
double mode_overlap(const DistinguishabilityParams& params);

// Gated threshold detector pair behind the beamsplitter.
struct DetectorModel {
    double efficiency = 0.145;           // eta, per detector
    double dark_count_prob = 1.88418e-5; // per gate and time slot
    double dead_time_us = 10.0;
    double gate_rate_hz = 2.0e6;
    double coincidence_separation_ns = 1.4;
    double coincidence_tolerance_ns = 0.4;

    void validate() const;
};

// Output field amplitudes of the 50/50 beamsplitter, per detector and time
// slot, split into the component of Bob's field parallel to Alice's mode
// (which interferes) and the orthogonal remainder (which does not).
struct BeamsplitterOutput {
    // [detector][slot], slot 0 = early
    std::array<std::array<std::complex<double>, 2>, 2> parallel{};
    std::array<std::array<std::complex<double>, 2>, 2> orthogonal{};

    double expected_photons(int detector, int slot) const;
    double total_expected_photons() const;
};

BeamsplitterOutput beamsplitter_transform(const TimeBinPulsePair& alice,
                                          const TimeBinPulsePair& bob,
                                          double overlap, double relative_phase);

// Per-gate click probabilities, [detector][slot]:
//   p = 1 - (1 - d) exp(-eta * nbar)
using ClickProbabilities = std::array<std::array<double, 2>, 2>;
ClickProbabilities click_probabilities(const BeamsplitterOutput& output,
                                       const DetectorModel& detector);

// One gate's detection record and its Bell-state classification. PsiMinus
// requires exactly two clicks, on different detectors, one time bin apart
// (the 1.4 +- 0.4 ns coincidence rule for 1.4 ns bin spacing).
struct BSMOutcome {
    enum class Classification { PsiMinus, NoProjection };

    std::array<std::array<bool, 2>, 2> clicks{};  // [detector][slot]
    Classification classification = Classification::NoProjection;
};

BSMOutcome make_bsm_outcome(const std::array<std::array<bool, 2>, 2>& clicks);

// Probability per gate of the psi-minus click pattern, averaged over the
// relative laser phase (phase-randomized sources). Amplitudes are scaled by
// sqrt(transmittance) before the beamsplitter. Deterministic; Gauss-Legendre
// quadrature with `phase_nodes` nodes (must be >= 8).
double psi_minus_probability(const TimeBinPulsePair& alice,
                             const TimeBinPulsePair& bob, double overlap,
                             const DetectorModel& detector,
                             std::pair<double, double> link_transmittances,
                             int phase_nodes = 64);

struct GainError {
    double gain = 0.0;
    std::optional<double> error_rate;  // empty when gain is zero
};

// Gain and error rate for one basis, averaged over the four equally likely
// state pairs. An error is a psi-minus event whose sifted, flipped bits
// disagree (i.e. Alice's and Bob's raw bits were equal).
GainError gain_and_error(Basis basis, double mu_alice, double mu_bob,
                         double overlap, const DetectorModel& detector,
                         std::pair<double, double> link_transmittances,
                         int phase_nodes = 64, double extinction = 0.0);

// Hong-Ou-Mandel visibility V = (C_dist - C_match) / C_dist, where C is the
// two-detector same-slot coincidence probability and C_dist its value at
// zero overlap. Empty when C_dist = 0.
std::optional<double> hom_visibility(double mu, double overlap,
                                     const DetectorModel& detector,
                                     int phase_nodes = 64);

}  // namespace mdiqkd
